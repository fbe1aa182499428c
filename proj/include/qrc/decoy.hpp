#pragma once

// Single-photon bounds from phase-randomized weak coherent pulses observed
// at several intensities, and entropy per pulse from those bounds.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrc/bloch.hpp"
#include "qrc/certifier.hpp"
#include "qrc/exec.hpp"

namespace qrc {

struct DecoyObservation {
    double mu = 0.0;
    ObservationTable table;  // point entries
};

/// Bounds on q1(0|x,y).
struct PhotonBounds {
    std::array<std::array<double, kMeasurements>, kPreparations> lo{};
    std::array<std::array<double, kMeasurements>, kPreparations> hi{};

    ObservationTable as_table() const;
    void validate() const;
};

/// Thrown when some cell's constraints admit no photon-number model.
class DecoyInfeasible : public std::runtime_error {
public:
    explicit DecoyInfeasible(std::vector<CellIndex> cells);
    const std::vector<CellIndex>& cells() const { return cells_; }

private:
    std::vector<CellIndex> cells_;
};

inline constexpr int kDefaultPhotonCutoff = 10;
/// Defaults for examples and sweeps, not tied to any particular source.
inline constexpr double kDefaultDecoyIntensities[] = {0.1, 0.2, 0.5};
inline constexpr double kDefaultSignalIntensity = 0.5;

/// e^-mu mu^n / n!.
double poisson_weight(int n, double mu);

/// Per cell, min and max of q_1 over q_0..q_ncut in [0,1] with
///   sum_n p_n(mu_i) q_n <= q_mu_i <= sum_n p_n(mu_i) q_n + (1 - sum_n p_n(mu_i))
/// for every intensity. Requires a non-empty list, mu > 0, point tables and
/// n_cut >= 2. Throws DecoyInfeasible listing every inconsistent cell.
PhotonBounds bound_single_photon(const std::vector<DecoyObservation>& obs, int n_cut = kDefaultPhotonCutoff,
                                 Exec exec = Exec::parallel);

/// Photon-number-resolving detection: the single-photon table is observed directly.
PhotonBounds pnr_passthrough(const ObservationTable& q1_table);

/// e0 = 1 - q(0|0,0), e1 = q(0|1,0), e2 = 1 - q(0|2,1), e3 = q(0|3,1),
/// p20 = q(0|2,0), p30 = q(0|3,0), each as an interval.
QberBox qber_box_from_bounds(const PhotonBounds& bounds);

using IntervalCertifier = std::function<CertificationResult(const QberBox&)>;

struct PulseEntropy {
    double single_photon_bits = 0.0;
    double bits_per_pulse = 0.0;
    CertificationResult single_photon;
};

/// p_1(mu_signal) times the worst-case single-photon entropy over the box;
/// multi-photon pulses contribute nothing.
PulseEntropy total_min_entropy(const PhotonBounds& bounds, double mu_signal, const IntervalCertifier& cert);

}  // namespace qrc
