#include <doctest.h>

#include <cmath>
#include <vector>

#include "abmphase/rng.hpp"
#include "abmphase/stats.hpp"

using namespace abmphase;

TEST_CASE("rng streams are deterministic and key-separated") {
    RngStream a(42, 3, 7), b(42, 3, 7), c(42, 3, 8);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    bool any_diff = false;
    RngStream a2(42, 3, 7);
    for (int i = 0; i < 100; ++i) any_diff |= (a2.next_u64() != c.next_u64());
    CHECK(any_diff);
}

TEST_CASE("uniform lies in (0,1) and normal has the right moments") {
    RngStream rng(7);
    std::vector<double> u(200000), z(200000);
    for (auto& v : u) v = rng.uniform();
    for (auto& v : z) v = rng.normal();
    for (double v : u) {
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
    }
    CHECK(stats::mean(u) == doctest::Approx(0.5).epsilon(0.01));
    const auto s = stats::shape_moments(z);
    CHECK(s.mean == doctest::Approx(0.0).epsilon(0.01));
    CHECK(std::abs(s.mean) < 0.01);
    CHECK(s.stddev == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(s.skewness) < 0.03);
    CHECK(s.kurtosis == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("shuffle is a seeded permutation") {
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
    auto w = v;
    RngStream r1(5), r2(5);
    shuffle(v, r1);
    shuffle(w, r2);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("median and quantiles") {
    CHECK(stats::median({1.0, 2.0, 3.0}) == 2.0);
    CHECK(stats::median({1.0, 2.0, 3.0, 10.0}) == 2.5);
    CHECK(stats::quantile({0.0, 1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.0));
    CHECK(stats::interquartile_range({0.0, 1.0, 2.0, 3.0, 4.0}) == doctest::Approx(2.0));
}

TEST_CASE("correlations on hand cases") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{2, 4, 6, 8, 10};
    CHECK(stats::pearson_correlation(x, y) == doctest::Approx(1.0));
    std::vector<double> z{10, 8, 6, 4, 2};
    CHECK(stats::pearson_correlation(x, z) == doctest::Approx(-1.0));
    // monotone nonlinear map has spearman 1 but pearson < 1
    std::vector<double> e{std::exp(1.0), std::exp(2.0), std::exp(3.0), std::exp(4.0),
                          std::exp(5.0)};
    CHECK(stats::spearman_correlation(x, e) == doctest::Approx(1.0));
    CHECK(stats::pearson_correlation(x, e) < 0.999);
    // ties get average ranks
    std::vector<double> t1{1, 1, 2}, t2{5, 5, 9};
    CHECK(stats::spearman_correlation(t1, t2) == doctest::Approx(1.0));
}

TEST_CASE("raw and shape moments") {
    std::vector<double> v{1.0, -1.0};
    const auto m = stats::raw_moments(v);
    CHECK(m.m1 == 0.0);
    CHECK(m.m2 == 1.0);
    CHECK(m.m3 == 0.0);
    CHECK(m.m4 == 1.0);
}
