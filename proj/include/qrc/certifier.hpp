#pragma once

// Outer optimization: the largest guessing probability an adversary can
// reach with any device strategy that reproduces the observations.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "qrc/bloch.hpp"
#include "qrc/exec.hpp"
#include "qrc/nelder_mead.hpp"

namespace qrc {

enum class CertStatus { certified, infeasible, degenerate };

std::string_view to_string(CertStatus s);

struct CellIndex {
    std::size_t x = 0;
    std::size_t y = 0;
    bool operator==(const CellIndex&) const = default;
};

/// Which guessing probabilities to maximize: one (x,y) pair, or the mean
/// over several pairs evaluated on the same strategy.
struct Target {
    std::vector<CellIndex> pairs;

    static Target single(std::size_t x, std::size_t y) { return {{{x, y}}}; }
    /// Throws std::invalid_argument for an empty list or out-of-range pairs.
    void validate() const;
};

struct Strategy {
    std::array<std::optional<MeasurementModel>, kMeasurements> meas;
    std::array<std::optional<BlochVector>, kPreparations> states;
    std::array<std::array<std::optional<PureDecomposition>, kMeasurements>, kPreparations> decs;
};

struct CertificationResult {
    std::array<std::array<std::optional<double>, kMeasurements>, kPreparations> p_guess;
    /// Averaged figure: 1/4 sum_x p_g(x,0) in BB84 mode, the target mean in general mode.
    double p_bar = 1.0;
    double h_min_bits = 0.0;
    Strategy strategy;
    CertStatus status = CertStatus::infeasible;
    /// The solver lower-bounds a maximum, so h_min is an upper estimate of
    /// the certified entropy unless cross-checked.
    bool entropy_is_upper_estimate = true;
    int evaluations = 0;
};

/// Smallest projective fraction m searched; results at this edge are degenerate.
inline constexpr double kMinProjectiveFraction = 1e-6;
/// Norm-constraint slack (on |S|^2) accepted when reproducing a general table.
inline constexpr double kGeneralFeasibilityTol = 1e-6;
/// Slack on the squared state separation and on |S.T| <= 1 in BB84 mode.
inline constexpr double kBb84FeasibilityTol = 1e-12;
/// Quadratic penalty weight used when T1 is (anti)parallel to T0.
inline constexpr double kSingularPenaltyWeight = 1e6;

struct SolverOptions {
    std::size_t starts = 64;
    std::uint64_t seed = 0;
    ConstraintMode mode = ConstraintMode::signed_born;
    Exec exec = Exec::parallel;
    NelderMeadOptions local{};
};

/// Maximizes p_g over strategies reproducing every table entry (point
/// entries within kGeneralFeasibilityTol after projection onto the ball,
/// interval entries by membership). T0 = z and T1 lies in the xz-plane.
CertificationResult certify_general(const ObservationTable& table, const Target& target,
                                    const SolverOptions& opts = {});

/// BB84 specialization: maximizes 1/2 + (p_g(2,0) + p_g(3,0))/4 subject to
/// m0 + u0 >= 1 - e0, u0 <= e1, |S2 - S3| >= 2(1 - e2 - e3) and the
/// mismatched-basis observations p20, p30.
CertificationResult certify_bb84(const QberSet& qbers, const SolverOptions& opts = {});

/// Worst case over a box of observations. QBERs enter through their upper
/// ends (a larger QBER only relaxes the constraints); p20 and p30 become
/// free within their intervals.
CertificationResult certify_bb84_interval(const QberBox& box, const SolverOptions& opts = {});

}  // namespace qrc
