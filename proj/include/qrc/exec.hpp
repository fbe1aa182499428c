#pragma once

namespace qrc {

/// Selects the OpenMP kernel or the serial reference loop. Both produce
/// bit-identical results: parallel loops write per-index slots that are
/// reduced serially in index order.
enum class Exec { serial, parallel };

/// Applies the QRC_WORKERS environment variable (positive integer) to the
/// OpenMP thread count. Returns the number of workers in effect.
int configure_workers();

/// True when this is a parallel build and `exec` asks for it.
bool use_parallel(Exec exec);

}  // namespace qrc
