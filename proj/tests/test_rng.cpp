#include <doctest.h>

#include <cmath>
#include <set>

#include "lsh/rng.hpp"

using namespace lsh;

namespace {
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
}  // namespace

TEST_CASE("threefry blocks are deterministic and key-sensitive") {
    const auto a = rng::threefry2x64(1, 2, 3, 4);
    const auto b = rng::threefry2x64(1, 2, 3, 4);
    CHECK(a == b);
    CHECK(rng::threefry2x64(1, 2, 3, 5) != a);
    CHECK(rng::threefry2x64(2, 2, 3, 4) != a);

    // distinct counters produce distinct blocks (no short cycles)
    std::set<std::uint64_t> seen;
    for (std::uint64_t c = 0; c < 4096; ++c) {
        seen.insert(rng::threefry2x64(c, 0, 42, 7).first);
    }
    CHECK(seen.size() == 4096);
}

TEST_CASE("uniform_open stays strictly inside (0,1)") {
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const double u = rng::uniform_open(i, 0, 2024, 0);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal_icdf inverts the normal CDF") {
    for (double p : {1e-12, 1e-6, 1e-3, 0.05, 0.2, 0.425, 0.5, 0.7, 0.95, 1.0 - 1e-6}) {
        const double x = rng::normal_icdf(p);
        CHECK(std::abs(normal_cdf(x) - p) <= 1e-13 * (1.0 + p));
    }
    CHECK(rng::normal_icdf(0.5) == 0.0);
    CHECK(rng::normal_icdf(0.25) == doctest::Approx(-rng::normal_icdf(0.75)).epsilon(1e-15));
}

TEST_CASE("normal stream moments") {
    const std::size_t n = 100000;
    double sum = 0.0, sumsq = 0.0;
    rng::PathStream stream(7, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = stream.normal(i, 0);
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    // 4 standard errors of the estimators
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) <= 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("paths are independent streams") {
    rng::PathStream a(7, 0);
    rng::PathStream b(7, 1);
    double corr = 0.0;
    const std::size_t n = 50000;
    for (std::size_t i = 0; i < n; ++i) corr += a.normal(i, 0) * b.normal(i, 0);
    corr /= static_cast<double>(n);
    CHECK(std::abs(corr) <= 4.0 / std::sqrt(static_cast<double>(n)));
}
