#include "qrc/decomposition.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qrc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kColinearTol = 1e-12;
constexpr double kDegenerateChord = 1e-30;

struct ChordPoint {
    double value = -1.0;
    double t2 = 1.0;  // target sits at t = 1 on S1 + t (S - S1); S2 at t = t2
};

// Chord through the in-plane target (r, z) starting at the unit-circle point
// (u1, w1); coordinates are (transverse, along-axis).
inline ChordPoint chord(double r, double z, double u1, double w1) {
    const double du = r - u1;
    const double dw = z - w1;
    const double dd = du * du + dw * dw;
    if (dd < kDegenerateChord) {
        return {std::abs(w1), 1.0};
    }
    const double t2 = -2.0 * (u1 * du + w1 * dw) / dd;
    const double w2 = w1 + t2 * dw;
    const double q2 = 1.0 / t2;
    return {(1.0 - q2) * std::abs(w1) + q2 * std::abs(w2), t2};
}

inline ChordPoint chord_at(double r, double z, double alpha) {
    return chord(r, z, std::sin(alpha), std::cos(alpha));
}

const std::array<std::pair<double, double>, kKernelScanPoints>& scan_table() {
    static const auto table = [] {
        std::array<std::pair<double, double>, kKernelScanPoints> t{};
        for (int i = 0; i < kKernelScanPoints; ++i) {
            const double a = kTwoPi * i / kKernelScanPoints;
            t[i] = {std::sin(a), std::cos(a)};
        }
        return t;
    }();
    return table;
}

struct PlaneFrame {
    double r = 0.0;  // |target component orthogonal to axis|
    double z = 0.0;  // target . axis
    Vec3 e;          // unit transverse direction
    Vec3 a;
};

PlaneFrame frame_of(const Vec3& target, const Vec3& axis) {
    PlaneFrame f;
    f.a = axis;
    f.z = dot(target, axis);
    const Vec3 perp = target - axis * f.z;
    f.r = norm(perp);
    f.e = f.r > 0.0 ? perp * (1.0 / f.r) : Vec3{};
    return f;
}

struct ScanOptimum {
    double alpha = 0.0;
    ChordPoint point;
};

ScanOptimum scan_and_refine(double r, double z) {
    const auto& table = scan_table();
    int best = 0;
    double best_value = -1.0;
    for (int i = 0; i < kKernelScanPoints; ++i) {
        const double v = chord(r, z, table[i].first, table[i].second).value;
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    const double step = kTwoPi / kKernelScanPoints;
    double lo = step * (best - 1);
    double hi = step * (best + 1);

    // golden-section maximization on the bracketing cell pair
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = chord_at(r, z, c).value;
    double fd = chord_at(r, z, d).value;
    while (hi - lo > kKernelRefineTol) {
        if (fc >= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = chord_at(r, z, c).value;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = chord_at(r, z, d).value;
        }
    }
    const double refined = 0.5 * (lo + hi);
    const ChordPoint rp = chord_at(r, z, refined);
    if (rp.value >= best_value) {
        return {refined, rp};
    }
    return {step * best, chord(r, z, table[best].first, table[best].second)};
}

Vec3 unit(const Vec3& v) { return v * (1.0 / norm(v)); }

PureDecomposition ordered(double q1, const Vec3& s1, double q2, const Vec3& s2) {
    if (q1 > q2) {
        std::swap(q1, q2);
        return PureDecomposition::make(q1, BlochVector::pure(unit(s2)), q2, BlochVector::pure(unit(s1)));
    }
    return PureDecomposition::make(q1, BlochVector::pure(unit(s1)), q2, BlochVector::pure(unit(s2)));
}

KernelResult trivial_result(const BlochVector& target, const Vec3& axis) {
    const BlochVector s = BlochVector::pure(unit(target.vec()));
    return {std::abs(dot(s.vec(), axis)), PureDecomposition::make(0.0, s, 1.0, s)};
}

KernelResult antipodal_result(const PlaneFrame& f) {
    const double w_plus = 0.5 * (1.0 + f.z);
    return {1.0, ordered(w_plus, f.a, 1.0 - w_plus, -f.a)};
}

void validate_kernel_inputs(const BlochVector& axis) {
    if (!axis.is_pure()) {
        throw std::invalid_argument("decomposition axis must have unit norm");
    }
}

}  // namespace

double optimal_decomposition_value(const Vec3& target, const Vec3& axis) {
    const PlaneFrame f = frame_of(target, axis);
    if (norm(target) >= 1.0 - kNormSlack) {
        return std::abs(f.z);
    }
    if (f.r <= kColinearTol) {
        return 1.0;
    }
    return scan_and_refine(f.r, f.z).point.value;
}

KernelResult optimal_decomposition(const BlochVector& target, const BlochVector& axis) {
    validate_kernel_inputs(axis);
    const PlaneFrame f = frame_of(target.vec(), axis.vec());
    if (target.norm() >= 1.0 - kNormSlack) {
        return trivial_result(target, axis.vec());
    }
    if (f.r <= kColinearTol) {
        return antipodal_result(f);
    }
    const ScanOptimum opt = scan_and_refine(f.r, f.z);
    const Vec3 s1 = f.e * std::sin(opt.alpha) + f.a * std::cos(opt.alpha);
    const Vec3 s2 = s1 + (target.vec() - s1) * opt.point.t2;
    const double q2 = 1.0 / opt.point.t2;
    return {opt.point.value, ordered(1.0 - q2, s1, q2, s2)};
}

namespace {

struct GridBest {
    double value = -1.0;
    int i = 0;
    int j = 0;
    double t2 = 1.0;
};

inline Vec3 sphere_point(int i, int j, int grid) {
    const double theta = (std::numbers::pi * i) / grid;
    const double phi = (kTwoPi * j) / grid;
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

GridBest grid_row(const Vec3& target, const Vec3& axis, int grid, int i) {
    GridBest best;
    best.i = i;
    for (int j = 0; j < grid; ++j) {
        const Vec3 s1 = sphere_point(i, j, grid);
        const Vec3 d = target - s1;
        const double dd = dot(d, d);
        double value = 0.0;
        double t2 = 1.0;
        if (dd < kDegenerateChord) {
            value = std::abs(dot(s1, axis));
        } else {
            t2 = -2.0 * dot(s1, d) / dd;
            const Vec3 s2 = s1 + d * t2;
            const double q2 = 1.0 / t2;
            value = (1.0 - q2) * std::abs(dot(s1, axis)) + q2 * std::abs(dot(s2, axis));
        }
        if (value > best.value) {
            best = {value, i, j, t2};
        }
    }
    return best;
}

GridBest grid_search(const Vec3& target, const Vec3& axis, int grid, Exec exec) {
    std::vector<GridBest> rows(static_cast<std::size_t>(grid) + 1);
    const bool par = use_parallel(exec);
#pragma omp parallel for schedule(static) if (par)
    for (int i = 0; i <= grid; ++i) {
        rows[static_cast<std::size_t>(i)] = grid_row(target, axis, grid, i);
    }
    GridBest best;
    for (const auto& row : rows) {
        if (row.value > best.value) {
            best = row;
        }
    }
    return best;
}

}  // namespace

double brute_force_value(const Vec3& target, const Vec3& axis, int grid) {
    return grid_search(target, axis, grid, Exec::serial).value;
}

KernelResult brute_force_decomposition(const BlochVector& target, const BlochVector& axis, int grid, Exec exec) {
    validate_kernel_inputs(axis);
    if (grid < 64) {
        throw std::invalid_argument("brute-force grid resolution must be at least 64");
    }
    const GridBest best = grid_search(target.vec(), axis.vec(), grid, exec);
    const Vec3 s1 = sphere_point(best.i, best.j, grid);
    const Vec3 d = target.vec() - s1;
    if (dot(d, d) < kDegenerateChord) {
        return trivial_result(target, axis.vec());
    }
    const Vec3 s2 = s1 + d * best.t2;
    const double q2 = 1.0 / best.t2;
    return {best.value, ordered(1.0 - q2, s1, q2, s2)};
}

}  // namespace qrc
