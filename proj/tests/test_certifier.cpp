#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qrc/certifier.hpp"
#include "qrc/decomposition.hpp"
#include "test_support.hpp"

using namespace qrc;

namespace {

SolverOptions quick(std::size_t starts = 24) {
    SolverOptions o;
    o.starts = starts;
    return o;
}

// P-bar for e0 = e1 = e2 = e3 = e and p20 = p30 = 1/2, frozen from an
// independent exhaustive search (grid over u0, m0 and the transverse radii
// with the closed-form kernel sqrt(1 - r^2), 201 x 201 x 401 points).
struct Frozen {
    double e;
    double p_bar;
};
constexpr Frozen kSymmetricSweep[] = {
    {0.00, 0.75},
    {0.05, 0.8730752262296653},
    {0.10, 0.92},
    {0.25, 0.9832531754730548},
    {0.40, 0.9989897948556636},
};

void check_bb84_strategy(const CertificationResult& r, const QberSet& q) {
    REQUIRE(r.strategy.meas[0].has_value());
    const auto& meas = *r.strategy.meas[0];
    CHECK(meas.m() + meas.u0() >= 1.0 - q.e0 - 1e-12);
    CHECK(meas.u0() <= q.e1 + 1e-12);
    const auto& s2 = *r.strategy.states[2];
    const auto& s3 = *r.strategy.states[3];
    CHECK(std::abs(response_probability(s2, meas, Outcome::zero) - q.p20) <= 1e-9);
    CHECK(std::abs(response_probability(s3, meas, Outcome::zero) - q.p30) <= 1e-9);
    CHECK(norm(s2.vec() - s3.vec()) >= 2.0 * (1.0 - q.e2 - q.e3) - 1e-9);
    for (std::size_t x : {2u, 3u}) {
        const auto& dec = *r.strategy.decs[x][0];
        CHECK(norm(mix(dec).vec() - r.strategy.states[x]->vec()) <= 1e-9);
        CHECK(guessing_probability(dec, meas) == doctest::Approx(*r.p_guess[x][0]).epsilon(1e-12));
    }
    CHECK(*r.p_guess[0][0] == 1.0);
    CHECK(*r.p_guess[1][0] == 1.0);
    CHECK(r.p_bar == doctest::Approx(0.25 * (2.0 + *r.p_guess[2][0] + *r.p_guess[3][0])).epsilon(1e-15));
}

}  // namespace

TEST_CASE("bb84: ideal point gives 3/4") {
    const QberSet q{0, 0, 0, 0, 0.5, 0.5};
    const auto r = certify_bb84(q);
    CHECK(r.status == CertStatus::certified);
    CHECK(std::abs(r.p_bar - 0.75) <= 0.005);
    CHECK(r.h_min_bits == doctest::Approx(-std::log2(r.p_bar)));
    CHECK(r.entropy_is_upper_estimate);
    check_bb84_strategy(r, q);
}

TEST_CASE("bb84: fully noisy point reaches 1") {
    const auto r = certify_bb84({0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, quick());
    CHECK(r.p_bar >= 0.999);
    CHECK(r.h_min_bits <= 0.002);
}

TEST_CASE("bb84: symmetric sweep matches frozen exhaustive-search values") {
    for (const auto& f : kSymmetricSweep) {
        const QberSet q{f.e, f.e, f.e, f.e, 0.5, 0.5};
        const auto r = certify_bb84(q, quick());
        CAPTURE(f.e);
        CHECK(std::abs(r.p_bar - f.p_bar) <= 1e-6);
        check_bb84_strategy(r, q);
    }
}

TEST_CASE("bb84: incompatible mismatched-basis data is infeasible") {
    const auto r = certify_bb84({0, 0, 0, 0, 0.9, 0.9}, quick(8));
    CHECK(r.status == CertStatus::infeasible);
    CHECK(r.p_bar == 1.0);
    CHECK(r.h_min_bits == 0.0);
    CHECK_THROWS_AS(certify_bb84({0.6, 0, 0, 0, 0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("bb84: fixed seed is deterministic and serial equals parallel") {
    const QberSet q{0.07, 0.11, 0.03, 0.09, 0.45, 0.58};
    auto opts = quick(16);
    opts.seed = 99;
    const auto a = certify_bb84(q, opts);
    const auto b = certify_bb84(q, opts);
    opts.exec = Exec::serial;
    const auto c = certify_bb84(q, opts);
    CHECK(a.p_bar == b.p_bar);
    CHECK(a.p_bar == c.p_bar);
    CHECK(a.evaluations == c.evaluations);
    CHECK(a.strategy.states[2]->vec() == c.strategy.states[2]->vec());
}

TEST_CASE("bb84: printed-abs constraints agree on the ideal point") {
    auto opts = quick();
    opts.mode = ConstraintMode::printed_abs;
    CHECK(std::abs(certify_bb84({0, 0, 0, 0, 0.5, 0.5}, opts).p_bar - 0.75) <= 0.005);
    CHECK(certify_bb84({0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, opts).p_bar >= 0.999);
}

TEST_CASE("property: relaxing a QBER never lowers P-bar") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 4; ++trial) {
        QberSet q{0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng), 0.35 + 0.3 * u(rng), 0.35 + 0.3 * u(rng)};
        const double base = certify_bb84(q, quick()).p_bar;
        double* fields[] = {&q.e0, &q.e1, &q.e2, &q.e3};
        const auto which = static_cast<std::size_t>(rng() % 4);
        *fields[which] = std::min(0.5, *fields[which] + 0.05);
        CHECK(certify_bb84(q, quick()).p_bar >= base - 1e-6);
    }
}

TEST_CASE("property: no sampled feasible strategy beats the solver") {
    const QberSet q{0.08, 0.12, 0.1, 0.05, 0.47, 0.55};
    const double solved = certify_bb84(q).p_bar;
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double sep = 2.0 * (1.0 - q.e2 - q.e3);
    int accepted = 0;
    for (int trial = 0; trial < 200000 && accepted < 2000; ++trial) {
        const double m0 = u(rng);
        const double u0 = u(rng) * std::min(q.e1, 1.0 - m0);
        if (m0 <= 0.0 || m0 + u0 < 1.0 - q.e0) {
            continue;
        }
        const double z2 = 2.0 * (q.p20 - u0) / m0 - 1.0;
        const double z3 = 2.0 * (q.p30 - u0) / m0 - 1.0;
        if (std::abs(z2) > 1.0 || std::abs(z3) > 1.0) {
            continue;
        }
        const double a2 = 2.0 * std::numbers::pi * u(rng);
        const double a3 = 2.0 * std::numbers::pi * u(rng);
        const double r2 = std::sqrt(1.0 - z2 * z2) * std::sqrt(u(rng));
        const double r3 = std::sqrt(1.0 - z3 * z3) * std::sqrt(u(rng));
        const Vec3 s2{r2 * std::cos(a2), r2 * std::sin(a2), z2};
        const Vec3 s3{r3 * std::cos(a3), r3 * std::sin(a3), z3};
        if (norm(s2 - s3) < sep) {
            continue;
        }
        ++accepted;
        const Vec3 z{0, 0, 1};
        const double value = 0.5 + 0.25 * (guessing_from_branch_value(m0, optimal_decomposition_value(s2, z)) +
                                           guessing_from_branch_value(m0, optimal_decomposition_value(s3, z)));
        CHECK(value <= solved + 2e-3);
    }
    CHECK(accepted >= 100);
}

TEST_CASE("property: rotating the reported strategy changes nothing observable") {
    const QberSet q{0.05, 0.05, 0.05, 0.05, 0.5, 0.5};
    const auto r = certify_bb84(q, quick());
    std::mt19937_64 rng(41);
    const auto& meas = *r.strategy.meas[0];
    for (int i = 0; i < 20; ++i) {
        const auto rot = testing::random_rotation(rng);
        auto turn = [&](const BlochVector& v) { return BlochVector::make(rot.apply(v.vec()) * (1.0 / std::max(1.0, norm(rot.apply(v.vec()))))); };
        auto turn_pure = [&](const BlochVector& v) { return BlochVector::direction(rot.apply(v.vec())); };
        const auto rmeas = MeasurementModel::make(meas.m(), meas.u0(), meas.u1(), turn_pure(meas.axis()));
        for (std::size_t x : {2u, 3u}) {
            const auto& s = *r.strategy.states[x];
            CHECK(response_probability(turn(s), rmeas, Outcome::zero) ==
                  doctest::Approx(response_probability(s, meas, Outcome::zero)).epsilon(1e-12));
            const auto& d = *r.strategy.decs[x][0];
            const auto rd = PureDecomposition::make(d.q1(), turn_pure(d.s1()), d.q2(), turn_pure(d.s2()));
            CHECK(guessing_probability(rd, rmeas) == doctest::Approx(*r.p_guess[x][0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("bb84 interval: degenerate box equals the point solver") {
    const QberSet q{0.04, 0.09, 0.12, 0.02, 0.52, 0.44};
    const auto point = certify_bb84(q, quick());
    const auto box = certify_bb84_interval(QberBox::from_point(q), quick());
    CHECK(std::abs(point.p_bar - box.p_bar) <= 1e-6);
}

TEST_CASE("bb84 interval: widening never lowers P-bar and contains the point value") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        const QberSet q{0.15 * u(rng), 0.15 * u(rng), 0.15 * u(rng), 0.15 * u(rng), 0.4 + 0.2 * u(rng),
                        0.4 + 0.2 * u(rng)};
        QberBox box = QberBox::from_point(q);
        const double point = certify_bb84_interval(box, quick()).p_bar;
        box.p20 = {q.p20 - 0.02, q.p20 + 0.03};
        const double wide1 = certify_bb84_interval(box, quick()).p_bar;
        box.e2 = {q.e2, q.e2 + 0.02};
        box.p30 = {q.p30 - 0.01, q.p30 + 0.01};
        const double wide2 = certify_bb84_interval(box, quick()).p_bar;
        CHECK(wide1 >= point - 1e-6);
        CHECK(wide2 >= wide1 - 1e-6);
    }
    QberBox around_ideal{{0, 0.01}, {0, 0.01}, {0, 0.01}, {0, 0.01}, {0.49, 0.51}, {0.49, 0.51}};
    CHECK(certify_bb84_interval(around_ideal, quick()).p_bar >= 0.75);
    QberBox bad = around_ideal;
    bad.p20 = {0.6, 0.5};
    CHECK_THROWS_AS(certify_bb84_interval(bad), std::invalid_argument);
}

namespace {

ObservationTable ideal_table() { return ObservationTable::from_points({{{1, 0.5}, {0, 0.5}, {0.5, 1}, {0.5, 0}}}); }

void check_reproduces(const CertificationResult& r, const ObservationTable& t) {
    for (std::size_t x = 0; x < kPreparations; ++x) {
        for (std::size_t y = 0; y < kMeasurements; ++y) {
            const double p = response_probability(*r.strategy.states[x], *r.strategy.meas[y], Outcome::zero);
            CHECK(t.at(x, y).contains(p, 1e-6));
        }
    }
}

}  // namespace

TEST_CASE("general: ideal BB84 table") {
    const auto t = ideal_table();
    const auto r = certify_general(t, Target::single(2, 0));
    CHECK(r.status == CertStatus::certified);
    CHECK(std::abs(r.p_bar - 0.5) <= 2e-3);
    check_reproduces(r, t);
    const auto avg = certify_general(t, Target{{{0, 0}, {1, 0}, {2, 0}, {3, 0}}}, quick());
    CHECK(std::abs(avg.p_bar - 0.75) <= 2e-3);
}

TEST_CASE("general: deterministic observation certifies nothing") {
    const auto t = ObservationTable::from_points({{{0.9, 0.3}, {0.2, 0.6}, {1.0, 0.5}, {0.4, 0.5}}});
    const auto r = certify_general(t, Target::single(2, 0), quick());
    CHECK(r.p_bar == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("general: contradictory table is infeasible") {
    // S0 = T0 = T1 and S1 = T0 = -T1 cannot both hold
    const auto t = ObservationTable::from_points({{{1, 1}, {1, 0}, {0.5, 0.5}, {0.5, 0.5}}});
    const auto r = certify_general(t, Target::single(2, 0), quick(16));
    CHECK(r.status == CertStatus::infeasible);
    CHECK(r.h_min_bits == 0.0);
}

TEST_CASE("general: interval entries relax a point table") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double th = 1.1;
    const Vec3 axes[2] = {{0, 0, 1}, {std::sin(th), 0, std::cos(th)}};
    std::array<std::array<double, 2>, 4> q{};
    for (auto& row : q) {
        const Vec3 s = testing::random_unit(rng) * 0.97;
        for (std::size_t y = 0; y < 2; ++y) {
            row[y] = 0.95 * (0.5 + 0.5 * dot(s, axes[y])) + 0.02;
        }
    }
    const auto point_table = ObservationTable::from_points(q);
    const auto point = certify_general(point_table, Target::single(1, 0), quick());
    CHECK(point.status != CertStatus::infeasible);
    check_reproduces(point, point_table);
    auto grid = point_table.entries();
    grid[3][1] = {std::max(0.0, q[3][1] - 0.02), std::min(1.0, q[3][1] + 0.02)};
    grid[1][1] = {std::max(0.0, q[1][1] - 0.01), std::min(1.0, q[1][1] + 0.01)};
    const auto wide_table = ObservationTable(grid);
    const auto wide = certify_general(wide_table, Target::single(1, 0), quick());
    CHECK(wide.p_bar >= point.p_bar - 1e-6);
    check_reproduces(wide, wide_table);
}

TEST_CASE("general: malformed targets are rejected") {
    CHECK_THROWS_AS(certify_general(ideal_table(), Target{}), std::invalid_argument);
    CHECK_THROWS_AS(certify_general(ideal_table(), Target::single(4, 0)), std::invalid_argument);
    CHECK_THROWS_AS(certify_general(ideal_table(), Target::single(0, 2)), std::invalid_argument);
}
