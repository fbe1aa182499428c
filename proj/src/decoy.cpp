#include "qrc/decoy.hpp"

#include <algorithm>
#include <cmath>

#include "qrc/lp.hpp"

namespace qrc {

namespace {

std::string describe(const std::vector<CellIndex>& cells) {
    std::string s = "decoy observations admit no photon-number model in cells";
    for (const auto& c : cells) {
        s += " (" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
    }
    return s;
}

void validate_observations(const std::vector<DecoyObservation>& obs, int n_cut) {
    if (obs.empty()) {
        throw std::invalid_argument("decoy: observation list is empty");
    }
    if (n_cut < 2) {
        throw std::invalid_argument("decoy: n_cut must be at least 2");
    }
    for (const auto& o : obs) {
        if (!(o.mu > 0.0 && std::isfinite(o.mu))) {
            throw std::invalid_argument("decoy: intensity mu must be positive");
        }
        if (!o.table.all_points()) {
            throw std::invalid_argument("decoy: observation tables must hold point entries");
        }
    }
}

struct CellBounds {
    bool feasible = false;
    double lo = 0.0;
    double hi = 0.0;
};

// Rows: q_n <= 1, sum p q <= q_mu, -sum p q <= tail - q_mu.
CellBounds solve_cell(const std::vector<std::vector<double>>& weights, const std::vector<double>& tails,
                      const std::vector<double>& observed) {
    const std::size_t n = weights.front().size();
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(n, 0.0);
        row[j] = 1.0;
        a.push_back(std::move(row));
        b.push_back(1.0);
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        a.push_back(weights[i]);
        b.push_back(observed[i]);
        std::vector<double> neg(n);
        std::transform(weights[i].begin(), weights[i].end(), neg.begin(), [](double w) { return -w; });
        a.push_back(std::move(neg));
        b.push_back(tails[i] - observed[i]);
    }
    std::vector<double> c(n, 0.0);
    c[1] = 1.0;
    const auto hi = maximize_lp(a, b, c);
    if (hi.status != LpStatus::optimal) {
        return {};
    }
    c[1] = -1.0;
    const auto lo = maximize_lp(a, b, c);
    if (lo.status != LpStatus::optimal) {
        return {};
    }
    const double l = std::clamp(-lo.value, 0.0, 1.0);
    const double h = std::clamp(hi.value, 0.0, 1.0);
    return {true, std::min(l, h), h};
}

}  // namespace

DecoyInfeasible::DecoyInfeasible(std::vector<CellIndex> cells)
    : std::runtime_error(describe(cells)), cells_(std::move(cells)) {}

ObservationTable PhotonBounds::as_table() const {
    ObservationTable::Grid g{};
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            g[x][y] = {lo[x][y], hi[x][y]};
        }
    }
    return ObservationTable(g);
}

void PhotonBounds::validate() const { (void)as_table(); }

double poisson_weight(int n, double mu) {
    if (n < 0 || !(mu >= 0.0)) {
        throw std::invalid_argument("poisson_weight: need n >= 0 and mu >= 0");
    }
    if (mu == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

PhotonBounds bound_single_photon(const std::vector<DecoyObservation>& obs, int n_cut, Exec exec) {
    validate_observations(obs, n_cut);
    std::vector<std::vector<double>> weights;
    std::vector<double> tails;
    for (const auto& o : obs) {
        std::vector<double> w(static_cast<std::size_t>(n_cut) + 1);
        double total = 0.0;
        for (int n = 0; n <= n_cut; ++n) {
            w[static_cast<std::size_t>(n)] = poisson_weight(n, o.mu);
            total += w[static_cast<std::size_t>(n)];
        }
        weights.push_back(std::move(w));
        tails.push_back(std::max(0.0, 1.0 - total));
    }

    constexpr int kCells = static_cast<int>(kPreparations * kMeasurements);
    std::array<CellBounds, kCells> cells{};
    const bool par = use_parallel(exec);
#pragma omp parallel for schedule(dynamic) if (par)
    for (int k = 0; k < kCells; ++k) {
        const std::size_t x = static_cast<std::size_t>(k) / kMeasurements;
        const std::size_t y = static_cast<std::size_t>(k) % kMeasurements;
        std::vector<double> observed;
        for (const auto& o : obs) {
            observed.push_back(o.table.at(x, y).lo);
        }
        cells[static_cast<std::size_t>(k)] = solve_cell(weights, tails, observed);
    }

    PhotonBounds out;
    std::vector<CellIndex> bad;
    for (int k = 0; k < kCells; ++k) {
        const std::size_t x = static_cast<std::size_t>(k) / kMeasurements;
        const std::size_t y = static_cast<std::size_t>(k) % kMeasurements;
        const auto& c = cells[static_cast<std::size_t>(k)];
        if (!c.feasible) {
            bad.push_back({x, y});
            continue;
        }
        out.lo[x][y] = c.lo;
        out.hi[x][y] = c.hi;
    }
    if (!bad.empty()) {
        throw DecoyInfeasible(std::move(bad));
    }
    return out;
}

PhotonBounds pnr_passthrough(const ObservationTable& q1_table) {
    if (!q1_table.all_points()) {
        throw std::invalid_argument("pnr_passthrough: table must hold point entries");
    }
    PhotonBounds b;
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            b.lo[x][y] = b.hi[x][y] = q1_table.at(x, y).lo;
        }
    }
    return b;
}

QberBox qber_box_from_bounds(const PhotonBounds& b) {
    b.validate();
    auto complement = [&](std::size_t x, std::size_t y) { return ProbabilityInterval{1.0 - b.hi[x][y], 1.0 - b.lo[x][y]}; };
    auto direct = [&](std::size_t x, std::size_t y) { return ProbabilityInterval{b.lo[x][y], b.hi[x][y]}; };
    QberBox box{complement(0, 0), direct(1, 0), complement(2, 1), direct(3, 1), direct(2, 0), direct(3, 0)};
    box.validate();
    return box;
}

PulseEntropy total_min_entropy(const PhotonBounds& bounds, double mu_signal, const IntervalCertifier& cert) {
    if (!(mu_signal > 0.0 && std::isfinite(mu_signal))) {
        throw std::invalid_argument("total_min_entropy: mu_signal must be positive");
    }
    PulseEntropy out;
    out.single_photon = cert(qber_box_from_bounds(bounds));
    out.single_photon_bits = out.single_photon.h_min_bits;
    out.bits_per_pulse = poisson_weight(1, mu_signal) * out.single_photon_bits;
    return out;
}

}  // namespace qrc
