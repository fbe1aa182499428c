#include "qrc/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qrc/decomposition.hpp"

namespace qrc {

namespace {

constexpr Vec3 kAxis{0.0, 0.0, 1.0};
constexpr double kRangeTol = 1e-12;
constexpr double kNoValue = -std::numeric_limits<double>::infinity();

double grid_at(const ProbabilityInterval& iv, int i, int resolution) {
    if (iv.is_point()) {
        return iv.lo;
    }
    return iv.lo + (iv.hi - iv.lo) * (static_cast<double>(i) / resolution);
}

struct SignedComponent {
    bool ok = false;
    double value = 0.0;
};

SignedComponent component(double p, double u0, double m0) {
    const double w = 2.0 * (p - u0) / m0 - 1.0;
    if (std::abs(w) > 1.0 + kRangeTol) {
        return {};
    }
    return {true, std::clamp(w, -1.0, 1.0)};
}

// Best value over the S2 polar grid for fixed along-axis components.
double best_over_polar(double m0, double z2, double z3, double separation, int resolution) {
    const double rad2 = std::sqrt(std::max(0.0, 1.0 - z2 * z2));
    const double rad3 = std::sqrt(std::max(0.0, 1.0 - z3 * z3));
    const double dz = z2 - z3;
    const double need = separation > 0.0 ? separation * separation - dz * dz : -1.0;
    double best = kNoValue;
    double k3_on_axis = kNoValue;  // S3 on the axis recurs whenever no separation is needed
    for (int ib = 0; ib <= resolution; ++ib) {
        const double r2 = rad2 * std::sin((std::numbers::pi / 2.0) * (static_cast<double>(ib) / resolution));
        double r3 = 0.0;
        if (need > 0.0) {
            r3 = std::max(0.0, std::sqrt(need) - r2);
            if (r3 > rad3 + kRangeTol) {
                continue;
            }
            r3 = std::min(r3, rad3);
        }
        const double k2 = brute_force_value({r2, 0.0, z2}, kAxis, kOracleKernelGrid);
        double k3 = 0.0;
        if (r3 == 0.0) {
            if (k3_on_axis == kNoValue) {
                k3_on_axis = brute_force_value({0.0, 0.0, z3}, kAxis, kOracleKernelGrid);
            }
            k3 = k3_on_axis;
        } else {
            k3 = brute_force_value({-r3, 0.0, z3}, kAxis, kOracleKernelGrid);
        }
        const double value = 0.5 + 0.25 * (guessing_from_branch_value(m0, k2) + guessing_from_branch_value(m0, k3));
        best = std::max(best, value);
    }
    return best;
}

}  // namespace

std::optional<double> grid_oracle_bb84(const QberBox& box, int resolution, ConstraintMode mode, Exec exec) {
    box.validate();
    if (resolution < 1) {
        throw std::invalid_argument("grid oracle resolution must be positive");
    }
    const double e0 = box.e0.hi;
    const double e1 = box.e1.hi;
    const double separation = 2.0 * (1.0 - box.e2.hi - box.e3.hi);
    const double u_max = std::min(e1, 1.0 - kMinProjectiveFraction);
    const int n20 = box.p20.is_point() ? 1 : resolution + 1;
    const int n30 = box.p30.is_point() ? 1 : resolution + 1;
    const int side = resolution + 1;

    std::vector<double> best(static_cast<std::size_t>(side) * side, kNoValue);
    const bool par = use_parallel(exec);
#pragma omp parallel for schedule(dynamic) if (par)
    for (int cell = 0; cell < side * side; ++cell) {
        const int iu = cell / side;
        const int im = cell % side;
        const double u0 = u_max * (static_cast<double>(iu) / resolution);
        const double m_lo = std::max(1.0 - e0 - u0, kMinProjectiveFraction);
        const double m_hi = 1.0 - u0;
        const double m0 = m_lo + (m_hi - m_lo) * (static_cast<double>(im) / resolution);
        double local = kNoValue;
        for (int i20 = 0; i20 < n20; ++i20) {
            for (int i30 = 0; i30 < n30; ++i30) {
                const double p20 = grid_at(box.p20, i20, resolution);
                const double p30 = grid_at(box.p30, i30, resolution);
                if (mode == ConstraintMode::signed_born) {
                    const auto z2 = component(p20, u0, m0);
                    const auto z3 = component(p30, u0, m0);
                    if (z2.ok && z3.ok) {
                        local = std::max(local, best_over_polar(m0, z2.value, z3.value, separation, resolution));
                    }
                    continue;
                }
                // printed form: |S.T0| is observed, every sign pair is admissible
                const auto a2 = component(p20, u0, m0);
                const auto a3 = component(p30, u0, m0);
                if (!(a2.ok && a3.ok) || a2.value < -kRangeTol || a3.value < -kRangeTol) {
                    continue;
                }
                for (double s2 : {1.0, -1.0}) {
                    for (double s3 : {1.0, -1.0}) {
                        local = std::max(local, best_over_polar(m0, s2 * std::max(0.0, a2.value),
                                                                s3 * std::max(0.0, a3.value), separation,
                                                                resolution));
                    }
                }
            }
        }
        best[static_cast<std::size_t>(cell)] = local;
    }
    double out = kNoValue;
    for (double v : best) {
        out = std::max(out, v);
    }
    if (out == kNoValue) {
        return std::nullopt;
    }
    return out;
}

namespace {

struct HalfPlane {
    // a * alpha + b * beta <= c
    double a, b, c;
};

// min |g . (alpha, beta) + g0| over the bounded polygon {h_k}; nullopt if empty.
std::optional<double> min_abs_over_polygon(const std::vector<HalfPlane>& hs, double ga, double gb, double g0) {
    constexpr double tol = 1e-12;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        for (std::size_t j = i + 1; j < hs.size(); ++j) {
            const double det = hs[i].a * hs[j].b - hs[i].b * hs[j].a;
            if (std::abs(det) < 1e-14) {
                continue;
            }
            const double alpha = (hs[i].c * hs[j].b - hs[i].b * hs[j].c) / det;
            const double beta = (hs[i].a * hs[j].c - hs[i].c * hs[j].a) / det;
            bool inside = true;
            for (const auto& h : hs) {
                const double scale = 1.0 + std::abs(h.a * alpha) + std::abs(h.b * beta);
                if (h.a * alpha + h.b * beta - h.c > tol * scale) {
                    inside = false;
                    break;
                }
            }
            if (!inside) {
                continue;
            }
            any = true;
            const double g = ga * alpha + gb * beta + g0;
            lo = std::min(lo, g);
            hi = std::max(hi, g);
        }
    }
    if (!any) {
        return std::nullopt;
    }
    if (lo <= 0.0 && hi >= 0.0) {
        return 0.0;
    }
    return std::min(std::abs(lo), std::abs(hi));
}

}  // namespace

std::optional<double> grid_oracle_general(const ObservationTable& table, CellIndex target, int resolution,
                                          Exec exec) {
    if (!table.all_points()) {
        throw std::invalid_argument("general grid oracle requires a point table");
    }
    if (target.x >= kPreparations || target.y >= kMeasurements) {
        throw std::invalid_argument("target pair out of range");
    }
    if (resolution < 2) {
        throw std::invalid_argument("general grid oracle resolution must be at least 2");
    }
    const std::size_t yp = target.y;
    const std::size_t yo = 1 - yp;
    const double alpha_max = 1.0 / kMinProjectiveFraction;
    const int side = resolution + 1;

    std::vector<double> best(static_cast<std::size_t>(side) * side, kNoValue);
    const bool par = use_parallel(exec);
#pragma omp parallel for schedule(dynamic) if (par)
    for (int cell = 0; cell < side * side; ++cell) {
        const int im = cell / side;
        const int iu = cell % side;
        const double m = kMinProjectiveFraction + (1.0 - kMinProjectiveFraction) * (static_cast<double>(im) / resolution);
        const double u0 = (1.0 - m) * (static_cast<double>(iu) / resolution);
        std::array<double, kPreparations> cp{};
        bool ok = true;
        for (std::size_t x = 0; x < kPreparations; ++x) {
            const auto c = component(table.at(x, yp).lo, u0, m);
            ok = ok && c.ok;
            cp[x] = c.value;
        }
        if (!ok) {
            continue;
        }
        double best_perp = std::numeric_limits<double>::infinity();
        for (int it = 1; it < resolution; ++it) {
            const double theta = std::numbers::pi * (static_cast<double>(it) / resolution);
            const double st = std::sin(theta);
            const double ct = std::cos(theta);
            // unknowns: alpha = 1/m_o in [1, alpha_max], beta = u_o/m_o in [0, alpha - 1]
            std::vector<HalfPlane> hs = {
                {-1.0, 0.0, -1.0}, {1.0, 0.0, alpha_max}, {0.0, -1.0, 0.0}, {-1.0, 1.0, -1.0}};
            for (std::size_t x = 0; x < kPreparations; ++x) {
                // S.T_o = 2 q alpha - 2 beta - 1 must stay within the ellipse slice
                const double q = table.at(x, yo).lo;
                const double h = st * std::sqrt(std::max(0.0, 1.0 - cp[x] * cp[x]));
                const double shift = 1.0 + ct * cp[x];
                hs.push_back({2.0 * q, -2.0, h + shift});
                hs.push_back({-2.0 * q, 2.0, h - shift});
            }
            const double q = table.at(target.x, yo).lo;
            const auto g = min_abs_over_polygon(hs, 2.0 * q, -2.0, -1.0 - ct * cp[target.x]);
            if (g) {
                best_perp = std::min(best_perp, *g / st);
            }
        }
        if (std::isinf(best_perp)) {
            continue;
        }
        const double z = cp[target.x];
        const double perp = std::min(best_perp, std::sqrt(std::max(0.0, 1.0 - z * z)));
        const double k = brute_force_value({perp, 0.0, z}, kAxis, kOracleKernelGrid);
        best[static_cast<std::size_t>(cell)] = guessing_from_branch_value(m, k);
    }
    double out = kNoValue;
    for (double v : best) {
        out = std::max(out, v);
    }
    if (out == kNoValue) {
        return std::nullopt;
    }
    return out;
}

}  // namespace qrc
