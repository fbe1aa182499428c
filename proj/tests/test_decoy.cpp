#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "qrc/decoy.hpp"

using namespace qrc;

namespace {

constexpr int kTruthPhotons = 80;

using PhotonTable = std::array<std::array<std::vector<double>, kMeasurements>, kPreparations>;

PhotonTable random_photon_table(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PhotonTable t;
    for (auto& row : t) {
        for (auto& cell : row) {
            cell.resize(kTruthPhotons + 1);
            for (double& v : cell) {
                v = u(rng);
            }
        }
    }
    return t;
}

// q_mu from the full photon-number distribution (no truncation).
DecoyObservation observe(const PhotonTable& t, double mu) {
    std::array<std::array<double, kMeasurements>, kPreparations> q{};
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            double s = 0.0;
            for (int n = 0; n <= kTruthPhotons; ++n) {
                s += poisson_weight(n, mu) * t[x][y][static_cast<std::size_t>(n)];
            }
            q[x][y] = std::min(1.0, s);
        }
    }
    return {mu, ObservationTable::from_points(q)};
}

double max_width(const PhotonBounds& b) {
    double w = 0.0;
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            w = std::max(w, b.hi[x][y] - b.lo[x][y]);
        }
    }
    return w;
}

// Gauss-Jordan inverse with partial pivoting.
std::vector<std::vector<double>> invert(std::vector<std::vector<double>> m) {
    const std::size_t n = m.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = 1.0;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(m[r][c]) > std::abs(m[p][c])) {
                p = r;
            }
        }
        std::swap(m[c], m[p]);
        std::swap(inv[c], inv[p]);
        const double d = m[c][c];
        for (std::size_t j = 0; j < n; ++j) {
            m[c][j] /= d;
            inv[c][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) {
                continue;
            }
            const double f = m[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                m[r][j] -= f * m[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

const auto kIdealTable = ObservationTable::from_points({{{1, 0.5}, {0, 0.5}, {0.5, 1}, {0.5, 0}}});

}  // namespace

TEST_CASE("poisson weights") {
    CHECK(poisson_weight(0, 0.0) == 1.0);
    CHECK(poisson_weight(3, 0.0) == 0.0);
    CHECK(poisson_weight(1, 0.5) == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-14));
    CHECK(poisson_weight(1, 0.5) == doctest::Approx(0.30327).epsilon(1e-5));
    double total = 0.0;
    for (int n = 0; n <= 20; ++n) {
        total += poisson_weight(n, 0.5);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK_THROWS_AS(poisson_weight(-1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(poisson_weight(1, -0.5), std::invalid_argument);
}

TEST_CASE("decoy: synthetic mixtures are always contained") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 100; ++trial) {
        const auto truth = random_photon_table(rng);
        const std::vector<DecoyObservation> obs = {observe(truth, 0.1), observe(truth, 0.3), observe(truth, 0.5)};
        const auto b = bound_single_photon(obs);
        for (std::size_t x = 0; x < kPreparations; ++x) {
            for (std::size_t y = 0; y < kMeasurements; ++y) {
                const double q1 = truth[x][y][1];
                CHECK(b.lo[x][y] >= 0.0);
                CHECK(b.hi[x][y] <= 1.0);
                CHECK(b.lo[x][y] <= b.hi[x][y]);
                CHECK(b.lo[x][y] <= q1 + 1e-9);
                CHECK(q1 <= b.hi[x][y] + 1e-9);
            }
        }
    }
}

TEST_CASE("decoy: other models consistent with the data lie in the box") {
    // Perturb the planted q_0..q_ncut inside the null space of the weight
    // matrix, which leaves every predicted q_mu unchanged.
    std::mt19937_64 rng(61);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = kDefaultPhotonCutoff + 1;
    const std::vector<double> mus = {0.1, 0.3, 0.5};
    std::vector<std::vector<double>> basis;
    for (double mu : mus) {
        std::vector<double> r(n);
        for (std::size_t k = 0; k < n; ++k) {
            r[k] = poisson_weight(static_cast<int>(k), mu);
        }
        for (const auto& e : basis) {
            double d = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                d += r[k] * e[k];
            }
            for (std::size_t k = 0; k < n; ++k) {
                r[k] -= d * e[k];
            }
        }
        double nr = 0.0;
        for (double v : r) {
            nr += v * v;
        }
        for (double& v : r) {
            v /= std::sqrt(nr);
        }
        basis.push_back(std::move(r));
    }
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto truth = random_photon_table(rng);
        std::vector<DecoyObservation> obs;
        for (double mu : mus) {
            obs.push_back(observe(truth, mu));
        }
        const auto b = bound_single_photon(obs);
        for (std::size_t x = 0; x < kPreparations; ++x) {
            for (std::size_t y = 0; y < kMeasurements; ++y) {
                for (int s = 0; s < 50; ++s) {
                    std::vector<double> d(n);
                    for (double& v : d) {
                        v = gauss(rng);
                    }
                    for (const auto& e : basis) {
                        double dd = 0.0;
                        for (std::size_t k = 0; k < n; ++k) {
                            dd += d[k] * e[k];
                        }
                        for (std::size_t k = 0; k < n; ++k) {
                            d[k] -= dd * e[k];
                        }
                    }
                    const double scale = 0.5 * u(rng);
                    std::vector<double> q(n);
                    bool inside = true;
                    for (std::size_t k = 0; k < n; ++k) {
                        q[k] = truth[x][y][k] + scale * d[k];
                        inside = inside && q[k] >= 0.0 && q[k] <= 1.0;
                    }
                    if (!inside) {
                        continue;
                    }
                    ++checked;
                    CHECK(b.lo[x][y] <= q[1] + 1e-9);
                    CHECK(q[1] <= b.hi[x][y] + 1e-9);
                }
            }
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("decoy: more intensities never widen the box") {
    std::mt19937_64 rng(67);
    const double mus[] = {0.5, 0.1, 0.3, 0.05, 0.4, 0.2};
    for (int trial = 0; trial < 10; ++trial) {
        const auto truth = random_photon_table(rng);
        std::vector<DecoyObservation> obs;
        PhotonBounds prev;
        for (std::size_t k = 0; k < std::size(mus); ++k) {
            obs.push_back(observe(truth, mus[k]));
            const auto b = bound_single_photon(obs);
            if (k > 0) {
                for (std::size_t x = 0; x < kPreparations; ++x) {
                    for (std::size_t y = 0; y < kMeasurements; ++y) {
                        CHECK(b.lo[x][y] >= prev.lo[x][y] - 1e-9);
                        CHECK(b.hi[x][y] <= prev.hi[x][y] + 1e-9);
                    }
                }
            } else {
                CHECK(max_width(b) > 0.5);
            }
            prev = b;
        }
        CHECK(max_width(prev) < 0.05);
    }
}

TEST_CASE("decoy: with n_cut + 1 intensities the width obeys the tail sensitivity bound") {
    // Exact data pins P q to within the tail slack, so the q1 range is at
    // most sum_i |(P^-1)_{1i}| tail_i.
    std::mt19937_64 rng(71);
    const int n_cut = kDefaultPhotonCutoff;
    std::vector<double> mus;
    for (int i = 0; i <= n_cut; ++i) {
        mus.push_back(0.05 + 0.05 * i);
    }
    std::vector<std::vector<double>> p(mus.size(), std::vector<double>(n_cut + 1));
    std::vector<double> tails;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        double w = 0.0;
        for (int n = 0; n <= n_cut; ++n) {
            p[i][static_cast<std::size_t>(n)] = poisson_weight(n, mus[i]);
            w += p[i][static_cast<std::size_t>(n)];
        }
        tails.push_back(1.0 - w);
    }
    const auto inv = invert(p);
    double bound = 0.0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        bound += std::abs(inv[1][i]) * tails[i];
    }
    const double tail_max = tails.back();
    CHECK(bound > tail_max);  // the bound is looser than the raw tail mass
    for (int trial = 0; trial < 5; ++trial) {
        const auto truth = random_photon_table(rng);
        std::vector<DecoyObservation> obs;
        for (double mu : mus) {
            obs.push_back(observe(truth, mu));
        }
        const auto b = bound_single_photon(obs, n_cut);
        CHECK(max_width(b) <= bound + 1e-9);
    }
}

TEST_CASE("decoy: serial and parallel agree") {
    std::mt19937_64 rng(73);
    const auto truth = random_photon_table(rng);
    const std::vector<DecoyObservation> obs = {observe(truth, 0.1), observe(truth, 0.2), observe(truth, 0.5)};
    const auto a = bound_single_photon(obs, 10, Exec::serial);
    const auto b = bound_single_photon(obs, 10, Exec::parallel);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
}

TEST_CASE("decoy: inconsistent observations are reported per cell") {
    auto hi_table = ObservationTable::from_points({{{0.3, 0.3}, {0.3, 1.0}, {0.3, 0.3}, {0.3, 0.3}}});
    auto lo_table = ObservationTable::from_points({{{0.3, 0.3}, {0.3, 0.0}, {0.3, 0.3}, {0.3, 0.3}}});
    try {
        bound_single_photon({{0.1, hi_table}, {0.5, lo_table}});
        FAIL("expected DecoyInfeasible");
    } catch (const DecoyInfeasible& e) {
        REQUIRE(e.cells().size() == 1);
        CHECK(e.cells()[0] == CellIndex{1, 1});
    }
    CHECK_THROWS_AS(bound_single_photon({}), std::invalid_argument);
    CHECK_THROWS_AS(bound_single_photon({{0.0, hi_table}}), std::invalid_argument);
    CHECK_THROWS_AS(bound_single_photon({{0.1, hi_table}}, 1), std::invalid_argument);
}

TEST_CASE("pnr passthrough is a degenerate box") {
    const auto b = pnr_passthrough(kIdealTable);
    CHECK(b.lo == b.hi);
    CHECK(b.lo[0][0] == 1.0);
    CHECK(b.lo[3][1] == 0.0);
    const auto box = qber_box_from_bounds(b);
    CHECK(box.is_point());
    CHECK(box.e0.hi == 0.0);
    CHECK(box.p20.lo == 0.5);
}

TEST_CASE("entropy per pulse") {
    SolverOptions opts;
    opts.starts = 24;
    const IntervalCertifier cert = [&](const QberBox& box) { return certify_bb84_interval(box, opts); };

    // p1(0.5) * -log2(0.75)
    const auto ideal = total_min_entropy(pnr_passthrough(kIdealTable), 0.5, cert);
    CHECK(ideal.bits_per_pulse == doctest::Approx(0.5 * std::exp(-0.5) * -std::log2(0.75)).epsilon(1e-4));
    CHECK(std::abs(ideal.bits_per_pulse - 0.1259) <= 5e-4);
    CHECK(ideal.bits_per_pulse <= poisson_weight(1, 0.5));

    // PNR composed with the interval certifier is the point certification
    const QberSet q{0.05, 0.08, 0.03, 0.06, 0.45, 0.52};
    const auto table = ObservationTable::from_points(
        {{{1 - q.e0, 0.5}, {q.e1, 0.5}, {q.p20, 1 - q.e2}, {q.p30, q.e3}}});
    const auto via_pnr = total_min_entropy(pnr_passthrough(table), 0.5, cert);
    CHECK(std::abs(via_pnr.single_photon.p_bar - certify_bb84(q, opts).p_bar) <= 1e-6);

    // widening never helps
    auto wide = pnr_passthrough(table);
    wide.lo[2][0] -= 0.03;
    wide.hi[3][1] += 0.02;
    CHECK(total_min_entropy(wide, 0.5, cert).bits_per_pulse <= via_pnr.bits_per_pulse + 1e-6);

    const auto noisy = ObservationTable::from_points({{{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}});
    CHECK(total_min_entropy(pnr_passthrough(noisy), 0.5, cert).bits_per_pulse <= 0.002 * poisson_weight(1, 0.5));
    CHECK_THROWS_AS(total_min_entropy(pnr_passthrough(kIdealTable), 0.0, cert), std::invalid_argument);
}
