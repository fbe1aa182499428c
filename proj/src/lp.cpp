#include "qrc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qrc {

namespace {

// The tableau is kept in extended precision: the decoy LPs are Vandermonde
// systems whose bound on q1 amplifies row residuals by ~1e5.
using Real = long double;

constexpr Real kPivotEps = 1e-15L;
constexpr Real kPhaseOneTol = 1e-12L;

class Tableau {
public:
    // Columns: structural, one slack per row, one artificial per row with b < 0.
    Tableau(const std::vector<std::vector<double>>& a, const std::vector<double>& b, std::size_t n)
        : rows_(b.size()), n_(n) {
        std::size_t n_art = 0;
        for (double bi : b) {
            n_art += bi < 0.0 ? 1 : 0;
        }
        cols_ = n_ + rows_ + n_art;
        t_.assign(rows_ * (cols_ + 1), 0.0);
        basis_.resize(rows_);
        std::size_t art = n_ + rows_;
        for (std::size_t i = 0; i < rows_; ++i) {
            const Real sign = b[i] < 0.0 ? -1.0L : 1.0L;
            for (std::size_t j = 0; j < n_; ++j) {
                at(i, j) = sign * a[i][j];
            }
            at(i, n_ + i) = sign;
            rhs(i) = sign * b[i];
            if (sign < 0) {
                at(i, art) = 1.0;
                basis_[i] = art++;
            } else {
                basis_[i] = n_ + i;
            }
        }
    }

    std::size_t cols() const { return cols_; }
    std::size_t first_artificial() const { return n_ + rows_; }

    // Runs simplex iterations on cost vector `cost` (size cols_) restricted
    // to columns < allowed. Returns false if unbounded.
    bool optimize(const std::vector<Real>& cost, std::size_t allowed) {
        for (;;) {
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                if (reduced_cost(cost, j) > kPivotEps) {
                    enter = j;
                    break;
                }
            }
            if (enter == allowed) {
                return true;
            }
            std::size_t leave = rows_;
            Real best_ratio = std::numeric_limits<Real>::infinity();
            for (std::size_t i = 0; i < rows_; ++i) {
                const Real aij = at(i, enter);
                if (aij > kPivotEps) {
                    const Real ratio = rhs(i) / aij;
                    if (ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[leave])) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == rows_) {
                return false;
            }
            pivot(leave, enter);
        }
    }

    Real objective(const std::vector<Real>& cost) const {
        Real v = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            v += cost[basis_[i]] * rhs(i);
        }
        return v;
    }

    // Pivots basic artificials out where a structural or slack column allows.
    void expel_artificials() {
        for (std::size_t i = 0; i < rows_; ++i) {
            if (basis_[i] < first_artificial()) {
                continue;
            }
            for (std::size_t j = 0; j < first_artificial(); ++j) {
                if (std::abs(at(i, j)) > kPivotEps) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    std::vector<double> solution() const {
        std::vector<double> x(n_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            if (basis_[i] < n_) {
                x[basis_[i]] = static_cast<double>(std::max<Real>(0.0, rhs(i)));
            }
        }
        return x;
    }

private:
    Real& at(std::size_t i, std::size_t j) { return t_[i * (cols_ + 1) + j]; }
    Real at(std::size_t i, std::size_t j) const { return t_[i * (cols_ + 1) + j]; }
    Real& rhs(std::size_t i) { return at(i, cols_); }
    Real rhs(std::size_t i) const { return at(i, cols_); }

    Real reduced_cost(const std::vector<Real>& cost, std::size_t j) const {
        Real r = cost[j];
        for (std::size_t i = 0; i < rows_; ++i) {
            r -= cost[basis_[i]] * at(i, j);
        }
        return r;
    }

    void pivot(std::size_t r, std::size_t c) {
        const Real p = at(r, c);
        for (std::size_t j = 0; j <= cols_; ++j) {
            at(r, j) /= p;
        }
        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == r) {
                continue;
            }
            const Real f = at(i, c);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j <= cols_; ++j) {
                at(i, j) -= f * at(r, j);
            }
        }
        basis_[r] = c;
    }

    std::size_t rows_;
    std::size_t n_;
    std::size_t cols_ = 0;
    std::vector<Real> t_;
    std::vector<std::size_t> basis_;
};

}  // namespace

LpResult maximize_lp(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                     const std::vector<double>& c) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("LP: row count of A and b differ");
    }
    for (const auto& row : a) {
        if (row.size() != c.size()) {
            throw std::invalid_argument("LP: row of A has wrong width");
        }
    }
    Tableau t(a, b, c.size());

    if (t.cols() > t.first_artificial()) {
        std::vector<Real> phase1(t.cols(), 0.0L);
        for (std::size_t j = t.first_artificial(); j < t.cols(); ++j) {
            phase1[j] = -1.0;
        }
        t.optimize(phase1, t.cols());
        if (t.objective(phase1) < -kPhaseOneTol) {
            return {LpStatus::infeasible, 0.0, {}};
        }
        t.expel_artificials();
    }

    std::vector<Real> cost(t.cols(), 0.0L);
    std::copy(c.begin(), c.end(), cost.begin());
    if (!t.optimize(cost, t.first_artificial())) {
        return {LpStatus::unbounded, 0.0, {}};
    }
    auto x = t.solution();
    double value = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        value += c[j] * x[j];
    }
    return {LpStatus::optimal, value, std::move(x)};
}

}  // namespace qrc
