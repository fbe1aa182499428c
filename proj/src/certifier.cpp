#include "qrc/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qrc/decomposition.hpp"

namespace qrc {

std::string_view to_string(CertStatus s) {
    switch (s) {
        case CertStatus::certified:
            return "certified";
        case CertStatus::infeasible:
            return "infeasible";
        case CertStatus::degenerate:
            return "degenerate";
    }
    return "unknown";
}

void Target::validate() const {
    if (pairs.empty()) {
        throw std::invalid_argument("target must name at least one (x,y) pair");
    }
    for (const auto& p : pairs) {
        if (p.x >= kPreparations || p.y >= kMeasurements) {
            throw std::invalid_argument("target pair out of range: x must be 0..3 and y 0..1");
        }
    }
}

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kSingularSin = 1e-9;

// Points that violate a constraint rank below every feasible point and
// improve as the violation shrinks.
inline double infeasible_score(double violation) { return -10.0 - violation; }

Vec3 onto_ball(const Vec3& v) {
    const double n = norm(v);
    return n > 1.0 ? v * (1.0 / n) : v;
}

double position_in(const ProbabilityInterval& iv, double t) { return iv.lo + t * (iv.hi - iv.lo); }

CertificationResult infeasible_result(int evals) {
    CertificationResult r;
    r.status = CertStatus::infeasible;
    r.p_bar = 1.0;
    r.h_min_bits = 0.0;
    r.evaluations = evals;
    return r;
}

// ---------------------------------------------------------------- BB84 ----

// Free variables (unit box): u0, m0 within [max(1-e0-u0, m_min), 1-u0],
// polar angles of S2 and S3 off the z axis as fractions of their allowed
// transverse radius, azimuth of S3 relative to S2 in [0, pi], then the
// positions of p20 / p30 inside non-degenerate intervals.
struct Bb84Problem {
    double e0 = 0.0;
    double e1 = 0.0;
    double separation = 0.0;  // 2 (1 - e2 - e3)
    ProbabilityInterval p20;
    ProbabilityInterval p30;
    ConstraintMode mode = ConstraintMode::signed_born;

    std::size_t dims() const { return 5 + (p20.is_point() ? 0 : 1) + (p30.is_point() ? 0 : 1); }
};

struct Bb84Point {
    double m0 = 1.0;
    double u0 = 0.0;
    Vec3 s2;
    Vec3 s3;
    double violation = 0.0;
};

// Along-axis component implied by an observation; in printed form the
// value is |S.T| and must be non-negative.
double axis_component(double p, double u0, double m0, ConstraintMode mode, double& violation) {
    const double w = 2.0 * (p - u0) / m0 - 1.0;
    if (mode == ConstraintMode::printed_abs) {
        violation += std::max(0.0, -w) + std::max(0.0, w - 1.0);
        return std::clamp(w, 0.0, 1.0);
    }
    violation += std::max(0.0, std::abs(w) - 1.0);
    return std::clamp(w, -1.0, 1.0);
}

Bb84Point decode(const Bb84Problem& pb, std::span<const double> v) {
    Bb84Point pt;
    const double u_max = std::min(pb.e1, 1.0 - kMinProjectiveFraction);
    pt.u0 = v[0] * u_max;
    const double m_lo = std::max(1.0 - pb.e0 - pt.u0, kMinProjectiveFraction);
    const double m_hi = 1.0 - pt.u0;
    pt.m0 = m_lo + v[1] * (m_hi - m_lo);

    std::size_t next = 5;
    const double p20 = pb.p20.is_point() ? pb.p20.lo : position_in(pb.p20, v[next++]);
    const double p30 = pb.p30.is_point() ? pb.p30.lo : position_in(pb.p30, v[next++]);

    double z2 = axis_component(p20, pt.u0, pt.m0, pb.mode, pt.violation);
    double z3 = axis_component(p30, pt.u0, pt.m0, pb.mode, pt.violation);
    if (pb.mode == ConstraintMode::printed_abs) {
        // S.T0 = +|z2| and -|z3| maximizes the separation, the only place the
        // signs enter, so it dominates the other sign branches.
        z3 = -z3;
    }
    const double r2 = std::sqrt(std::max(0.0, 1.0 - z2 * z2)) * std::sin(kHalfPi * v[2]);
    const double r3 = std::sqrt(std::max(0.0, 1.0 - z3 * z3)) * std::sin(kHalfPi * v[3]);
    const double phi = std::numbers::pi * v[4];
    pt.s2 = {r2, 0.0, z2};
    pt.s3 = {r3 * std::cos(phi), r3 * std::sin(phi), z3};

    if (pb.separation > 0.0) {
        const Vec3 d = pt.s2 - pt.s3;
        pt.violation += std::max(0.0, pb.separation * pb.separation - dot(d, d) - kBb84FeasibilityTol);
    }
    return pt;
}

constexpr Vec3 kZ{0.0, 0.0, 1.0};

double bb84_objective(const Bb84Problem& pb, std::span<const double> v) {
    const Bb84Point pt = decode(pb, v);
    if (pt.violation > 0.0) {
        return infeasible_score(pt.violation);
    }
    const double pg2 = guessing_from_branch_value(pt.m0, optimal_decomposition_value(pt.s2, kZ));
    const double pg3 = guessing_from_branch_value(pt.m0, optimal_decomposition_value(pt.s3, kZ));
    return 0.5 + 0.25 * (pg2 + pg3);
}

CertificationResult solve_bb84(const Bb84Problem& pb, const SolverOptions& opts) {
    const BoxObjective f = [&pb](std::span<const double> v) { return bb84_objective(pb, v); };
    const MultiStartResult ms = multistart_maximize(f, pb.dims(), opts.starts, opts.seed, opts.local, opts.exec);
    const Bb84Point pt = decode(pb, ms.best.x);
    if (pt.violation > 0.0) {
        return infeasible_result(ms.total_evals);
    }

    CertificationResult r;
    r.evaluations = ms.total_evals;
    const auto t0 = BlochVector::z_axis();
    const double u1 = std::max(0.0, 1.0 - pt.m0 - pt.u0);
    const auto meas0 = MeasurementModel::make(pt.m0, pt.u0, u1, t0);
    r.strategy.meas[0] = meas0;
    const Vec3 states[2] = {pt.s2, pt.s3};
    double pg[2] = {0.0, 0.0};
    for (std::size_t k = 0; k < 2; ++k) {
        const auto s = BlochVector::make(onto_ball(states[k]));
        const KernelResult kr = optimal_decomposition(s, t0);
        r.strategy.states[2 + k] = s;
        r.strategy.decs[2 + k][0] = kr.witness;
        pg[k] = guessing_from_branch_value(pt.m0, kr.value);
        r.p_guess[2 + k][0] = pg[k];
    }
    // matched-basis pairs are conceded to the adversary
    r.p_guess[0][0] = 1.0;
    r.p_guess[1][0] = 1.0;
    r.p_bar = std::min(1.0, 0.25 * (2.0 + pg[0] + pg[1]));
    r.h_min_bits = min_entropy(r.p_bar);
    r.status = pt.m0 <= kMinProjectiveFraction + 1e-12 ? CertStatus::degenerate : CertStatus::certified;
    return r;
}

// ------------------------------------------------------------- general ----

// Free variables (unit box): m0, u0^0, m1, u1^0, angle of T1 from T0 in
// [0, pi], then one position per interval entry. S_x . T_y follows from
// q(0|x,y); the remaining in-plane component of S_x follows from the two
// projections, and the out-of-plane component is zero (it only raises
// |S| and |S_perp|).
struct GeneralProblem {
    ObservationTable table;
    Target target;
    ConstraintMode mode = ConstraintMode::signed_born;
    std::vector<CellIndex> interval_cells;

    std::size_t dims() const { return 5 + interval_cells.size(); }
};

struct GeneralPoint {
    double m[2] = {1.0, 1.0};
    double u0[2] = {0.0, 0.0};
    Vec3 axis[2];
    std::array<Vec3, kPreparations> states{};
    double violation = 0.0;
    double penalty = 0.0;
};

GeneralPoint decode(const GeneralProblem& pb, std::span<const double> v) {
    GeneralPoint pt;
    for (std::size_t y = 0; y < kMeasurements; ++y) {
        pt.m[y] = kMinProjectiveFraction + v[2 * y] * (1.0 - kMinProjectiveFraction);
        pt.u0[y] = v[2 * y + 1] * (1.0 - pt.m[y]);
    }
    const double theta = std::numbers::pi * v[4];
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    pt.axis[0] = kZ;
    pt.axis[1] = {st, 0.0, ct};
    const bool singular = st < kSingularSin;

    std::array<std::array<double, kMeasurements>, kPreparations> q{};
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            q[x][y] = pb.table.at(x, y).lo;
        }
    }
    for (std::size_t k = 0; k < pb.interval_cells.size(); ++k) {
        const auto& c = pb.interval_cells[k];
        q[c.x][c.y] = position_in(pb.table.at(c.x, c.y), v[5 + k]);
    }

    for (std::size_t x = 0; x < kPreparations; ++x) {
        double c[2];
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            c[y] = axis_component(q[x][y], pt.u0[y], pt.m[y], pb.mode, pt.violation);
        }
        // printed form: try both relative signs of the two projections (a
        // global flip is a symmetry) and keep the one closest to the ball
        const int branches = pb.mode == ConstraintMode::printed_abs ? 2 : 1;
        double best_sx = 0.0;
        double best_excess = std::numeric_limits<double>::infinity();
        double best_mismatch = 0.0;
        for (int b = 0; b < branches; ++b) {
            const double c1 = b == 0 ? c[1] : -c[1];
            double sx = 0.0;
            double mismatch = 0.0;
            if (singular) {
                mismatch = c1 - ct * c[0];
            } else {
                sx = (c1 - ct * c[0]) / st;
            }
            const double excess = sx * sx + c[0] * c[0] - 1.0 + mismatch * mismatch;
            if (excess < best_excess) {
                best_excess = excess;
                best_sx = sx;
                best_mismatch = mismatch;
            }
        }
        pt.states[x] = {best_sx, 0.0, c[0]};
        pt.violation += std::max(0.0, dot(pt.states[x], pt.states[x]) - 1.0 - kGeneralFeasibilityTol);
        if (singular) {
            // T1 = +-T0: elimination breaks down, the projections must agree
            pt.penalty += kSingularPenaltyWeight * best_mismatch * best_mismatch;
        }
    }
    return pt;
}

double general_objective(const GeneralProblem& pb, std::span<const double> v) {
    const GeneralPoint pt = decode(pb, v);
    if (pt.violation > 0.0) {
        return infeasible_score(pt.violation);
    }
    double sum = 0.0;
    for (const auto& c : pb.target.pairs) {
        const double k = optimal_decomposition_value(onto_ball(pt.states[c.x]), pt.axis[c.y]);
        sum += guessing_from_branch_value(pt.m[c.y], k);
    }
    return sum / static_cast<double>(pb.target.pairs.size()) - pt.penalty;
}

CertificationResult solve_general(const GeneralProblem& pb, const SolverOptions& opts) {
    const BoxObjective f = [&pb](std::span<const double> v) { return general_objective(pb, v); };
    const MultiStartResult ms = multistart_maximize(f, pb.dims(), opts.starts, opts.seed, opts.local, opts.exec);
    const GeneralPoint pt = decode(pb, ms.best.x);
    // penalty fallback: re-check the (anti)parallel-axis consistency at the tolerance
    const double mismatch2 = pt.penalty / kSingularPenaltyWeight;
    if (pt.violation > 0.0 || mismatch2 > kGeneralFeasibilityTol * kGeneralFeasibilityTol) {
        return infeasible_result(ms.total_evals);
    }

    CertificationResult r;
    r.evaluations = ms.total_evals;
    std::array<MeasurementModel, 2> meas = {
        MeasurementModel::make(pt.m[0], pt.u0[0], std::max(0.0, 1.0 - pt.m[0] - pt.u0[0]), BlochVector::z_axis()),
        MeasurementModel::make(pt.m[1], pt.u0[1], std::max(0.0, 1.0 - pt.m[1] - pt.u0[1]),
                               BlochVector::direction(pt.axis[1]))};
    r.strategy.meas[0] = meas[0];
    r.strategy.meas[1] = meas[1];
    for (std::size_t x = 0; x < kPreparations; ++x) {
        r.strategy.states[x] = BlochVector::make(onto_ball(pt.states[x]));
    }
    double sum = 0.0;
    bool degenerate = false;
    for (const auto& c : pb.target.pairs) {
        const KernelResult kr = optimal_decomposition(*r.strategy.states[c.x], meas[c.y].axis());
        r.strategy.decs[c.x][c.y] = kr.witness;
        const double pg = guessing_from_branch_value(pt.m[c.y], kr.value);
        r.p_guess[c.x][c.y] = pg;
        sum += pg;
        degenerate = degenerate || pt.m[c.y] <= kMinProjectiveFraction + 1e-12;
    }
    r.p_bar = std::min(1.0, sum / static_cast<double>(pb.target.pairs.size()));
    r.h_min_bits = min_entropy(r.p_bar);
    r.status = degenerate ? CertStatus::degenerate : CertStatus::certified;
    return r;
}

}  // namespace

CertificationResult certify_general(const ObservationTable& table, const Target& target, const SolverOptions& opts) {
    target.validate();
    GeneralProblem pb{table, target, opts.mode, {}};
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            if (!table.at(x, y).is_point()) {
                pb.interval_cells.push_back({x, y});
            }
        }
    }
    return solve_general(pb, opts);
}

CertificationResult certify_bb84(const QberSet& qbers, const SolverOptions& opts) {
    qbers.validate();
    return certify_bb84_interval(QberBox::from_point(qbers), opts);
}

CertificationResult certify_bb84_interval(const QberBox& box, const SolverOptions& opts) {
    box.validate();
    Bb84Problem pb;
    pb.e0 = box.e0.hi;
    pb.e1 = box.e1.hi;
    pb.separation = 2.0 * (1.0 - box.e2.hi - box.e3.hi);
    pb.p20 = box.p20;
    pb.p30 = box.p30;
    pb.mode = opts.mode;
    return solve_bb84(pb, opts);
}

}  // namespace qrc
