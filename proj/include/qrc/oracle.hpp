#pragma once

// Exhaustive grid searches that bound the certifiers from below without
// sharing their search path: no local descent, and the decomposition value
// comes from brute_force_decomposition rather than the in-plane kernel.

#include <optional>

#include "qrc/bloch.hpp"
#include "qrc/certifier.hpp"
#include "qrc/exec.hpp"

namespace qrc {

/// Brute-force kernel resolution used for every oracle evaluation.
inline constexpr int kOracleKernelGrid = 64;

/// Best P-bar over a nested grid: u0 and m0 on (resolution+1) points of
/// their feasible ranges, S2 on (resolution+1) polar fractions, p20 / p30 on
/// (resolution+1) points of non-degenerate intervals. S3 is placed
/// antiparallel to S2's transverse part with the smallest transverse radius
/// meeting the separation constraint (the kernel value is non-increasing in
/// that radius). Returns nullopt when no grid point is feasible.
std::optional<double> grid_oracle_bb84(const QberBox& box, int resolution,
                                       ConstraintMode mode = ConstraintMode::signed_born,
                                       Exec exec = Exec::parallel);

inline std::optional<double> grid_oracle_bb84(const QberSet& q, int resolution,
                                              ConstraintMode mode = ConstraintMode::signed_born,
                                              Exec exec = Exec::parallel) {
    return grid_oracle_bb84(QberBox::from_point(q), resolution, mode, exec);
}

/// Best p_g(x,y) for a point table (signed constraints). The targeted
/// measurement's (m, u0) and the angle between the two axes are gridded;
/// for each grid point the other measurement's (1/m, u0/m) is solved
/// exactly: feasibility and the target's transverse component are linear in
/// it, so the minimum over the feasible polygon is found at its vertices.
/// Axis angles 0 and pi are skipped. Throws std::invalid_argument for
/// interval tables.
std::optional<double> grid_oracle_general(const ObservationTable& table, CellIndex target, int resolution,
                                          Exec exec = Exec::parallel);

}  // namespace qrc
