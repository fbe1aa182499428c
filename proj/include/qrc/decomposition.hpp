#pragma once

// Inner optimization: for a fixed mixed state and measurement axis, the
// two-point pure decomposition that maximizes q1|S1.T| + q2|S2.T|.

#include "qrc/bloch.hpp"
#include "qrc/exec.hpp"

namespace qrc {

struct KernelResult {
    /// max of q1|S1.axis| + q2|S2.axis| over pure decompositions of the target.
    double value = 0.0;
    PureDecomposition witness;
};

/// Number of chord angles scanned before golden-section refinement.
inline constexpr int kKernelScanPoints = 4096;
inline constexpr double kKernelRefineTol = 1e-10;

/// Searches chords in the plane spanned by target and axis. Pure targets
/// return the trivial decomposition; targets colinear with the axis return
/// the antipodal (+axis, -axis) decomposition with value 1. Among equal
/// witnesses the one with q1 <= q2 is returned.
KernelResult optimal_decomposition(const BlochVector& target, const BlochVector& axis);

/// Value-only form of optimal_decomposition for hot loops. Inputs are not
/// validated: |target| <= 1 and |axis| = 1 are the caller's responsibility.
double optimal_decomposition_value(const Vec3& target, const Vec3& axis);

/// Exhaustive oracle: S1 ranges over a (grid+1) x grid polar/azimuthal grid
/// of the sphere, S2 is the second intersection of the chord S1->target with
/// the sphere. Requires grid >= 64. Doubling the grid never lowers the result.
KernelResult brute_force_decomposition(const BlochVector& target, const BlochVector& axis, int grid,
                                       Exec exec = Exec::parallel);

/// Value-only brute force (serial), used inside the grid oracle's parallel loops.
double brute_force_value(const Vec3& target, const Vec3& axis, int grid);

}  // namespace qrc
