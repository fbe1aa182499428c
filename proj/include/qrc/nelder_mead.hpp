#pragma once

// Derivative-free maximization on the unit box [0,1]^n: Nelder-Mead with
// coordinate clamping, restarted from its own optimum, launched from a
// shifted Halton sequence.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qrc/exec.hpp"

namespace qrc {

using BoxObjective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    double initial_step = 0.15;
    /// Stop a run once the simplex values spread by at most this much.
    double f_tol = 1e-9;
    int max_evals = 1500;
    /// Fresh simplices (half the previous step) built around the best vertex.
    int restarts = 2;
};

struct LocalOptimum {
    std::vector<double> x;
    double value = 0.0;
    int evals = 0;
};

LocalOptimum nelder_mead_maximize(const BoxObjective& f, std::span<const double> start,
                                  const NelderMeadOptions& opts = {});

/// `count` points of the Halton sequence in [0,1]^dim, rotated (mod 1) by a
/// seed-dependent offset. dim <= 16.
std::vector<std::vector<double>> halton_points(std::size_t dim, std::size_t count, std::uint64_t seed);

struct MultiStartResult {
    LocalOptimum best;
    std::size_t best_start = 0;
    int total_evals = 0;
};

/// Runs one Nelder-Mead per start (in parallel when asked) and reduces with
/// a strict max in start order, so the lowest index wins ties. `extra_starts`
/// are tried after the Halton points.
MultiStartResult multistart_maximize(const BoxObjective& f, std::size_t dim, std::size_t starts,
                                     std::uint64_t seed, const NelderMeadOptions& opts, Exec exec,
                                     const std::vector<std::vector<double>>& extra_starts = {});

}  // namespace qrc
