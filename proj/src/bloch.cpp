#include "qrc/bloch.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qrc {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

void check_interval(const ProbabilityInterval& iv, const char* name) {
    if (!(in_unit(iv.lo) && in_unit(iv.hi) && iv.lo <= iv.hi)) {
        throw std::invalid_argument(std::string(name) + ": interval must satisfy 0 <= lo <= hi <= 1");
    }
}

}  // namespace

BlochVector BlochVector::make(const Vec3& v) {
    require(std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z), "Bloch vector must be finite");
    require(qrc::norm(v) <= 1.0 + kNormSlack, "Bloch vector norm exceeds 1");
    return BlochVector(v);
}

BlochVector BlochVector::pure(const Vec3& v) {
    require(std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z), "Bloch vector must be finite");
    require(std::abs(qrc::norm(v) - 1.0) <= kNormSlack, "pure Bloch vector must have unit norm");
    return BlochVector(v);
}

BlochVector BlochVector::direction(const Vec3& v) {
    const double n = qrc::norm(v);
    require(std::isfinite(n) && n > 0.0, "direction must be a finite nonzero vector");
    return BlochVector(v * (1.0 / n));
}

MeasurementModel MeasurementModel::make(double m, double u0, double u1, const BlochVector& axis) {
    require(m > 0.0 && m <= 1.0, "measurement: m must lie in (0,1]");
    require(in_unit(u0) && in_unit(u1), "measurement: u0, u1 must lie in [0,1]");
    require(std::abs(m + u0 + u1 - 1.0) <= kNormSlack, "measurement: m + u0 + u1 must equal 1");
    require(axis.is_pure(), "measurement: projective axis must have unit norm");
    return MeasurementModel(m, u0, u1, axis);
}

PureDecomposition PureDecomposition::make(double q1, const BlochVector& s1, double q2, const BlochVector& s2) {
    require(in_unit(q1) && in_unit(q2), "decomposition: weights must lie in [0,1]");
    require(std::abs(q1 + q2 - 1.0) <= kNormSlack, "decomposition: weights must sum to 1");
    require(s1.is_pure() && s2.is_pure(), "decomposition: branch states must be pure");
    return PureDecomposition(q1, s1, q2, s2);
}

ObservationTable::ObservationTable(const Grid& entries) : entries_(entries) {
    for (const auto& row : entries_) {
        for (const auto& iv : row) {
            check_interval(iv, "observation");
        }
    }
}

ObservationTable ObservationTable::from_points(
    const std::array<std::array<double, kMeasurements>, kPreparations>& q0) {
    Grid g{};
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            g[x][y] = ProbabilityInterval::point(q0[x][y]);
        }
    }
    return ObservationTable(g);
}

bool ObservationTable::all_points() const {
    for (const auto& row : entries_) {
        for (const auto& iv : row) {
            if (!iv.is_point()) {
                return false;
            }
        }
    }
    return true;
}

void QberSet::validate() const {
    for (double e : {e0, e1, e2, e3}) {
        require(e >= 0.0 && e <= 0.5, "QBER values must lie in [0, 0.5]");
    }
    require(in_unit(p20) && in_unit(p30), "p20 and p30 must lie in [0,1]");
}

QberBox QberBox::from_point(const QberSet& q) {
    q.validate();
    using PI = ProbabilityInterval;
    return {PI::point(q.e0), PI::point(q.e1), PI::point(q.e2), PI::point(q.e3), PI::point(q.p20), PI::point(q.p30)};
}

void QberBox::validate() const {
    check_interval(e0, "e0");
    check_interval(e1, "e1");
    check_interval(e2, "e2");
    check_interval(e3, "e3");
    check_interval(p20, "p20");
    check_interval(p30, "p30");
}

bool QberBox::is_point() const {
    return e0.is_point() && e1.is_point() && e2.is_point() && e3.is_point() && p20.is_point() && p30.is_point();
}

double response_probability(const BlochVector& state, const MeasurementModel& meas, Outcome outcome,
                            ConstraintMode mode) {
    double overlap = dot(state, meas.axis());
    if (mode == ConstraintMode::printed_abs) {
        overlap = std::abs(overlap);
    }
    const double p0 = std::clamp(meas.m() * (0.5 + 0.5 * overlap) + meas.u0(), 0.0, 1.0);
    return outcome == Outcome::zero ? p0 : 1.0 - p0;
}

double guessing_probability(const PureDecomposition& dec, const MeasurementModel& meas) {
    const double branch = dec.q1() * std::abs(dot(dec.s1(), meas.axis())) +
                          dec.q2() * std::abs(dot(dec.s2(), meas.axis()));
    return guessing_from_branch_value(meas.m(), branch);
}

double min_entropy(double p_guess) {
    require(p_guess > 0.0 && p_guess <= 1.0, "guessing probability must lie in (0,1]");
    if (p_guess == 1.0) {
        return 0.0;
    }
    return -std::log2(p_guess);
}

BlochVector mix(const PureDecomposition& dec) {
    const Vec3 v = dec.s1().vec() * dec.q1() + dec.s2().vec() * dec.q2();
    // Convex combination of unit vectors; rounding can only push past 1 by ulps.
    const double n = norm(v);
    return BlochVector::make(n > 1.0 ? v * (1.0 / n) : v);
}

}  // namespace qrc
