#pragma once

// Qubit states and binary POVMs in Bloch form, plus the elementary
// probabilities the certifiers are built from.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace qrc {

/// Slack allowed on norm and weight invariants before an input is rejected.
inline constexpr double kNormSlack = 1e-12;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
    constexpr bool operator==(const Vec3&) const = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// A point of the closed unit ball: a qubit state or a measurement direction.
class BlochVector {
public:
    constexpr BlochVector() = default;

    /// Throws std::invalid_argument when norm(v) > 1 + kNormSlack.
    static BlochVector make(const Vec3& v);
    /// Throws unless |norm(v) - 1| <= kNormSlack.
    static BlochVector pure(const Vec3& v);
    /// Rescales a nonzero direction onto the sphere.
    static BlochVector direction(const Vec3& v);

    static BlochVector x_axis() { return BlochVector({1.0, 0.0, 0.0}); }
    static BlochVector y_axis() { return BlochVector({0.0, 1.0, 0.0}); }
    static BlochVector z_axis() { return BlochVector({0.0, 0.0, 1.0}); }

    const Vec3& vec() const { return v_; }
    double x() const { return v_.x; }
    double y() const { return v_.y; }
    double z() const { return v_.z; }
    double norm() const { return qrc::norm(v_); }
    bool is_pure() const { return std::abs(norm() - 1.0) <= kNormSlack; }

    BlochVector operator-() const { return BlochVector(-v_); }

private:
    explicit constexpr BlochVector(const Vec3& v) : v_(v) {}
    Vec3 v_{};
};

inline double dot(const BlochVector& a, const BlochVector& b) { return dot(a.vec(), b.vec()); }

enum class Outcome : int { zero = 0, one = 1 };

/// How S.T enters an observed probability: the Born rule (signed) or with
/// the absolute value |S.T| the closed-form constraints are written with.
enum class ConstraintMode { signed_born, printed_abs };

/// Binary POVM as a random choice between a projective measurement along
/// `axis` (probability m) and deterministic outputs 0 / 1 (u0 / u1).
class MeasurementModel {
public:
    /// Requires m in (0,1], u0,u1 in [0,1], m+u0+u1 = 1 and a unit axis.
    static MeasurementModel make(double m, double u0, double u1, const BlochVector& axis);
    /// Projective measurement along `axis`.
    static MeasurementModel projective(const BlochVector& axis) { return make(1.0, 0.0, 0.0, axis); }

    double m() const { return m_; }
    double u0() const { return u0_; }
    double u1() const { return u1_; }
    const BlochVector& axis() const { return axis_; }

private:
    MeasurementModel(double m, double u0, double u1, const BlochVector& axis)
        : m_(m), u0_(u0), u1_(u1), axis_(axis) {}
    double m_ = 1.0;
    double u0_ = 0.0;
    double u1_ = 0.0;
    BlochVector axis_;
};

/// rho = q1 |S1><S1| + q2 |S2><S2| with S1, S2 pure.
class PureDecomposition {
public:
    static PureDecomposition make(double q1, const BlochVector& s1, double q2, const BlochVector& s2);

    double q1() const { return q1_; }
    double q2() const { return q2_; }
    const BlochVector& s1() const { return s1_; }
    const BlochVector& s2() const { return s2_; }

private:
    PureDecomposition(double q1, const BlochVector& s1, double q2, const BlochVector& s2)
        : q1_(q1), q2_(q2), s1_(s1), s2_(s2) {}
    double q1_ = 1.0;
    double q2_ = 0.0;
    BlochVector s1_;
    BlochVector s2_;
};

/// Closed probability interval; lo == hi is a point observation.
struct ProbabilityInterval {
    double lo = 0.0;
    double hi = 0.0;

    static ProbabilityInterval point(double p) { return {p, p}; }
    bool is_point() const { return lo == hi; }
    double width() const { return hi - lo; }
    bool contains(double p, double tol = 0.0) const { return p >= lo - tol && p <= hi + tol; }
    bool operator==(const ProbabilityInterval&) const = default;
};

inline constexpr std::size_t kPreparations = 4;
inline constexpr std::size_t kMeasurements = 2;

/// Observed q(0|x,y) for x in 0..3 and y in 0..1; q(1|x,y) is the complement.
class ObservationTable {
public:
    using Grid = std::array<std::array<ProbabilityInterval, kMeasurements>, kPreparations>;

    ObservationTable() = default;
    /// Throws std::invalid_argument if any endpoint leaves [0,1] or lo > hi.
    explicit ObservationTable(const Grid& entries);
    static ObservationTable from_points(const std::array<std::array<double, kMeasurements>, kPreparations>& q0);

    const ProbabilityInterval& at(std::size_t x, std::size_t y) const { return entries_.at(x).at(y); }
    const Grid& entries() const { return entries_; }
    bool all_points() const;

private:
    Grid entries_{};
};

/// QBERs of the matched-basis pairs plus the mismatched-basis observations
/// p(0|2,0) and p(0|3,0).
struct QberSet {
    double e0 = 0.0;
    double e1 = 0.0;
    double e2 = 0.0;
    double e3 = 0.0;
    double p20 = 0.5;
    double p30 = 0.5;

    /// Throws std::invalid_argument unless every e_i is in [0, 0.5] and p20, p30 in [0,1].
    void validate() const;
    bool operator==(const QberSet&) const = default;
};

/// Interval form of QberSet; QBER endpoints may range over [0,1].
struct QberBox {
    ProbabilityInterval e0, e1, e2, e3, p20, p30;

    static QberBox from_point(const QberSet& q);
    void validate() const;
    bool is_point() const;
};

double response_probability(const BlochVector& state, const MeasurementModel& meas, Outcome outcome,
                            ConstraintMode mode = ConstraintMode::signed_born);

/// m [q1 (1/2 + |S1.T|/2) + q2 (1/2 + |S2.T|/2)] + (1 - m).
double guessing_probability(const PureDecomposition& dec, const MeasurementModel& meas);

/// Guessing probability of a single measurement given the best branch value
/// `branch_value` = q1|S1.T| + q2|S2.T| of a decomposition. Capped at 1:
/// at branch_value = 1 the sum can round one ulp above it.
inline double guessing_from_branch_value(double m, double branch_value) {
    return std::min(1.0, m * (0.5 + 0.5 * branch_value) + (1.0 - m));
}

/// -log2(p_guess); throws std::invalid_argument outside (0,1].
double min_entropy(double p_guess);

BlochVector mix(const PureDecomposition& dec);

}  // namespace qrc
