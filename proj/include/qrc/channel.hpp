#pragma once

// QBER of a lossy fiber link with dark counts and misalignment, used to
// drive loss sweeps.

#include "qrc/bloch.hpp"

namespace qrc {

struct ChannelParams {
    double loss_db = 0.0;
    double eta_d = 0.1;
    double p_dark = 1e-5;
    double d_e = 0.01;

    /// Throws std::invalid_argument unless loss_db >= 0, eta_d in (0,1],
    /// p_dark in [0,1) and d_e in [0,0.5].
    void validate() const;
};

/// as_written: e = [p_d (1-T)/2 + eta_d d_e] / [T + (1-T) p_d] with T = 10^(-d/10),
///        evaluated as written.
/// physical: the detected signal probability eta_d T replaces T, and the
///        misalignment term is weighted by it.
enum class ChannelVariant { as_written, physical };

struct QberEstimate {
    double e = 0.0;    // clipped to [0, 0.5]
    double raw = 0.0;  // before clipping
    bool clipped = false;
};

QberEstimate qber_from_channel(const ChannelParams& params, ChannelVariant variant = ChannelVariant::as_written);

/// e0 = e1 = e2 = e3 = e with the given mismatched-basis observations.
QberSet table_from_qber(double e, double p20 = 0.5, double p30 = 0.5);

}  // namespace qrc
