#include "qrc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qrc {

void ChannelParams::validate() const {
    if (!(loss_db >= 0.0 && std::isfinite(loss_db))) {
        throw std::invalid_argument("loss_db must be finite and >= 0");
    }
    if (!(eta_d > 0.0 && eta_d <= 1.0)) {
        throw std::invalid_argument("eta_d must lie in (0,1]");
    }
    if (!(p_dark >= 0.0 && p_dark < 1.0)) {
        throw std::invalid_argument("p_dark must lie in [0,1)");
    }
    if (!(d_e >= 0.0 && d_e <= 0.5)) {
        throw std::invalid_argument("d_e must lie in [0,0.5]");
    }
}

QberEstimate qber_from_channel(const ChannelParams& params, ChannelVariant variant) {
    params.validate();
    const double t = std::pow(10.0, -params.loss_db / 10.0);
    double raw = 0.0;
    if (variant == ChannelVariant::as_written) {
        raw = (0.5 * (1.0 - t) * params.p_dark + params.eta_d * params.d_e) / (t + (1.0 - t) * params.p_dark);
    } else {
        const double signal = params.eta_d * t;
        raw = (0.5 * (1.0 - signal) * params.p_dark + signal * params.d_e) / (signal + (1.0 - signal) * params.p_dark);
    }
    const double e = std::clamp(raw, 0.0, 0.5);
    return {e, raw, e != raw};
}

QberSet table_from_qber(double e, double p20, double p30) {
    const QberSet q{e, e, e, e, p20, p30};
    q.validate();
    return q;
}

}  // namespace qrc
