#include "qrc/nelder_mead.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace qrc {

namespace {

struct Vertex {
    std::vector<double> x;
    double value = 0.0;
};

void clamp_unit(std::vector<double>& x) {
    for (double& v : x) {
        v = std::clamp(v, 0.0, 1.0);
    }
}

class Counter {
public:
    explicit Counter(const BoxObjective& f) : f_(f) {}
    double operator()(std::vector<double>& x) {
        clamp_unit(x);
        ++evals;
        const double v = f_(x);
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    }
    int evals = 0;

private:
    const BoxObjective& f_;
};

// One Nelder-Mead run (maximizing) from a simplex of size `step` at `start`.
Vertex run_simplex(Counter& eval, const Vertex& start, double step, const NelderMeadOptions& opts) {
    const std::size_t n = start.x.size();
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(start);
    for (std::size_t i = 0; i < n; ++i) {
        Vertex v{start.x, 0.0};
        // step inward when the start sits on the upper face
        v.x[i] += v.x[i] + step <= 1.0 ? step : -step;
        v.value = eval(v.x);
        simplex.push_back(std::move(v));
    }

    const int budget = eval.evals + opts.max_evals;
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.value > b.value; };

    while (eval.evals < budget) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        if (simplex.front().value - simplex.back().value <= opts.f_tol) {
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                centroid[i] += simplex[k].x[i] / static_cast<double>(n);
            }
        }
        Vertex& worst = simplex.back();
        auto along = [&](double coef, std::vector<double>& out) {
            for (std::size_t i = 0; i < n; ++i) {
                out[i] = centroid[i] + coef * (worst.x[i] - centroid[i]);
            }
            return eval(out);
        };

        const double fr = along(-1.0, trial);
        if (fr > simplex.front().value) {
            const double fe = along(-2.0, trial2);
            if (fe > fr) {
                worst = {trial2, fe};
            } else {
                worst = {trial, fr};
            }
            continue;
        }
        if (fr > simplex[n - 1].value) {
            worst = {trial, fr};
            continue;
        }
        const bool outside = fr > worst.value;
        const double fc = along(outside ? -0.5 : 0.5, trial2);
        if (fc > (outside ? fr : worst.value)) {
            worst = {trial2, fc};
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                simplex[k].x[i] = simplex[0].x[i] + 0.5 * (simplex[k].x[i] - simplex[0].x[i]);
            }
            simplex[k].value = eval(simplex[k].x);
        }
    }
    return *std::max_element(simplex.begin(), simplex.end(),
                             [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
}

constexpr std::array<int, 16> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t index, int base) {
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
        f /= base;
    }
    return result;
}

}  // namespace

LocalOptimum nelder_mead_maximize(const BoxObjective& f, std::span<const double> start,
                                  const NelderMeadOptions& opts) {
    if (start.empty()) {
        throw std::invalid_argument("nelder_mead_maximize: empty start point");
    }
    Counter eval(f);
    Vertex best{std::vector<double>(start.begin(), start.end()), 0.0};
    best.value = eval(best.x);
    double step = opts.initial_step;
    best = run_simplex(eval, best, step, opts);
    for (int r = 0; r < opts.restarts; ++r) {
        step *= 0.5;
        const Vertex again = run_simplex(eval, best, step, opts);
        const bool improved = again.value > best.value + opts.f_tol;
        if (again.value > best.value) {
            best = again;
        }
        if (!improved) {
            break;
        }
    }
    return {best.x, best.value, eval.evals};
}

std::vector<std::vector<double>> halton_points(std::size_t dim, std::size_t count, std::uint64_t seed) {
    if (dim > kPrimes.size()) {
        throw std::invalid_argument("halton_points: dimension too large");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> shift(dim);
    for (double& s : shift) {
        s = u(rng);
    }
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            const double v = radical_inverse(i + 1, kPrimes[d]) + shift[d];
            pts[i][d] = v - std::floor(v);
        }
    }
    return pts;
}

MultiStartResult multistart_maximize(const BoxObjective& f, std::size_t dim, std::size_t starts,
                                     std::uint64_t seed, const NelderMeadOptions& opts, Exec exec,
                                     const std::vector<std::vector<double>>& extra_starts) {
    auto points = halton_points(dim, starts, seed);
    points.insert(points.end(), extra_starts.begin(), extra_starts.end());
    if (points.empty()) {
        throw std::invalid_argument("multistart_maximize: no starting points");
    }
    std::vector<LocalOptimum> results(points.size());
    const bool par = use_parallel(exec);
    const auto n = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic) if (par)
    for (long i = 0; i < n; ++i) {
        results[static_cast<std::size_t>(i)] = nelder_mead_maximize(f, points[static_cast<std::size_t>(i)], opts);
    }
    MultiStartResult out;
    out.best = results.front();
    for (std::size_t i = 0; i < results.size(); ++i) {
        out.total_evals += results[i].evals;
        if (results[i].value > out.best.value) {
            out.best = results[i];
            out.best_start = i;
        }
    }
    return out;
}

}  // namespace qrc
