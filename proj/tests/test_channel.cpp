#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "qrc/channel.hpp"

using namespace qrc;

TEST_CASE("channel: reference loss points") {
    const auto zero = qber_from_channel({0.0});
    CHECK(zero.e == doctest::Approx(0.001).epsilon(1e-12));
    CHECK_FALSE(zero.clipped);

    // T = 10^-2.5; (0.5 (1-T) 1e-5 + 1e-3) / (T + (1-T) 1e-5)
    const double t = std::pow(10.0, -2.5);
    const double expected = (0.5 * (1 - t) * 1e-5 + 1e-3) / (t + (1 - t) * 1e-5);
    const auto at25 = qber_from_channel({25.0});
    CHECK(at25.e == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(at25.e - 0.317) <= 0.002);
    CHECK_FALSE(at25.clipped);

    const auto at60 = qber_from_channel({60.0});
    CHECK(at60.raw > 0.5);
    CHECK(at60.e == 0.5);
    CHECK(at60.clipped);
}

TEST_CASE("channel: d = 0 leaves only the misalignment term") {
    for (double eta : {0.05, 0.1, 0.7, 1.0}) {
        for (double de : {0.0, 0.01, 0.3}) {
            CHECK(qber_from_channel({0.0, eta, 1e-4, de}).e == doctest::Approx(std::min(0.5, eta * de)).epsilon(1e-15));
        }
    }
}

TEST_CASE("channel: QBER is nondecreasing in loss and always clipped to [0, 0.5]") {
    for (auto variant : {ChannelVariant::as_written, ChannelVariant::physical}) {
        double prev = -1.0;
        for (int i = 0; i <= 400; ++i) {
            const auto q = qber_from_channel({0.25 * i, 0.1, 1e-5, 0.01}, variant);
            CHECK(q.e >= 0.0);
            CHECK(q.e <= 0.5);
            CHECK(q.raw >= prev - 1e-15);
            prev = q.raw;
        }
    }
}

TEST_CASE("channel: physical variant reference values") {
    // eta T = 0.1 at d = 0: (0.5 * 0.9 * 1e-5 + 0.1 * 0.01) / (0.1 + 0.9 * 1e-5)
    const auto q = qber_from_channel({0.0}, ChannelVariant::physical);
    CHECK(q.e == doctest::Approx((0.5 * 0.9e-5 + 1e-3) / (0.1 + 0.9e-5)).epsilon(1e-14));
    CHECK(qber_from_channel({25.0}, ChannelVariant::physical).e < qber_from_channel({25.0}).e);
}

TEST_CASE("channel: parameter validation") {
    CHECK_THROWS_AS(qber_from_channel({-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(qber_from_channel({1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(qber_from_channel({1.0, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(qber_from_channel({1.0, 0.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(qber_from_channel({1.0, 0.1, 1e-5, 0.6}), std::invalid_argument);
}

TEST_CASE("table_from_qber builds symmetric sets") {
    CHECK(table_from_qber(0.0) == QberSet{0, 0, 0, 0, 0.5, 0.5});
    CHECK(table_from_qber(0.25) == QberSet{0.25, 0.25, 0.25, 0.25, 0.5, 0.5});
    CHECK(table_from_qber(0.5, 0.3, 0.6) == QberSet{0.5, 0.5, 0.5, 0.5, 0.3, 0.6});
    CHECK_THROWS_AS(table_from_qber(0.51), std::invalid_argument);
    CHECK_THROWS_AS(table_from_qber(0.1, 1.2), std::invalid_argument);
}
