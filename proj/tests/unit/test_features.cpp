#include <doctest.h>

#include <cmath>
#include <set>

#include "abmphase/features.hpp"
#include "abmphase/rng.hpp"
#include "abmphase/stats.hpp"

using namespace abmphase;
using namespace abmphase::features;

namespace {

sim::Snapshot snap(std::vector<double> agents, double time = 0.0, double sigma = 1.0,
                   int id = 0) {
    sim::Snapshot s;
    s.agents = std::move(agents);
    s.time = time;
    s.sigma = sigma;
    s.trajectory_id = id;
    return s;
}

}  // namespace

TEST_CASE("histogram of a point mass") {
    const auto h = histogram(snap(std::vector<double>(100, 0.0)));
    // 0 falls in bin 20 of 40 over [-4,4]
    for (int b = 0; b < 40; ++b) {
        if (b == 20)
            CHECK(h.density[static_cast<std::size_t>(b)] == doctest::Approx(1.0 / 0.2));
        else
            CHECK(h.density[static_cast<std::size_t>(b)] == 0.0);
    }
    CHECK(h.clipped == 0);
    double mass = 0.0;
    for (double d : h.density) mass += d * h.bin_width();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram of a large uniform sample is flat") {
    RngStream rng(3);
    std::vector<double> agents(200000);
    for (auto& x : agents) x = rng.uniform(-4.0, 4.0);
    const auto h = histogram(snap(std::move(agents)));
    for (double d : h.density) CHECK(std::abs(d - 0.125) < 0.01);
}

TEST_CASE("mirrored ensemble reverses the histogram") {
    RngStream rng(4);
    std::vector<double> agents(5000), mirrored(5000);
    for (std::size_t i = 0; i < agents.size(); ++i) {
        agents[i] = rng.normal(0.4, 0.9);
        mirrored[i] = -agents[i];
    }
    const auto h1 = histogram(snap(std::move(agents)));
    const auto h2 = histogram(snap(std::move(mirrored)));
    for (int b = 0; b < 40; ++b)
        CHECK(h1.density[static_cast<std::size_t>(b)] ==
              h2.density[static_cast<std::size_t>(39 - b)]);
}

TEST_CASE("out-of-range agents clip into boundary bins and keep unit mass") {
    const auto h = histogram(snap({-10.0, 10.0, 0.0, 0.0}));
    CHECK(h.clipped == 2);
    CHECK(h.density[0] > 0.0);
    CHECK(h.density[39] > 0.0);
    double mass = 0.0;
    for (double d : h.density) mass += d * h.bin_width();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram honors custom bin counts") {
    for (int bins : {20, 40, 80}) {
        const auto h = histogram(snap(std::vector<double>(10, 1.0)), bins);
        CHECK(static_cast<int>(h.density.size()) == bins);
        double mass = 0.0;
        for (double d : h.density) mass += d * h.bin_width();
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("moment examples") {
    const auto z = moments(snap({0.0, 0.0, 0.0}));
    CHECK(z.m1 == 0.0);
    CHECK(z.m2 == 0.0);
    CHECK(z.m3 == 0.0);
    CHECK(z.m4 == 0.0);
    const auto pm = moments(snap({1.0, -1.0}));
    CHECK(pm.m1 == 0.0);
    CHECK(pm.m2 == 1.0);
    CHECK(pm.m3 == 0.0);
    CHECK(pm.m4 == 1.0);
    const auto two = moments(snap({2.0}));
    CHECK(two.m1 == 2.0);
    CHECK(two.m2 == 4.0);
    CHECK(two.m3 == 8.0);
    CHECK(two.m4 == 16.0);
}

TEST_CASE("moment reflection equivariance and raw-moment inequalities") {
    RngStream rng(5);
    std::vector<double> agents(1000), mirrored(1000);
    for (std::size_t i = 0; i < agents.size(); ++i) {
        agents[i] = rng.normal(0.2, 1.1);
        mirrored[i] = -agents[i];
    }
    const auto m = moments(snap(std::move(agents)));
    const auto mm = moments(snap(std::move(mirrored)));
    CHECK(mm.m1 == -m.m1);
    CHECK(mm.m2 == m.m2);
    CHECK(mm.m3 == -m.m3);
    CHECK(mm.m4 == m.m4);
    CHECK(m.m2 >= m.m1 * m.m1);
    CHECK(m.m4 >= m.m2 * m.m2);
}

TEST_CASE("moments from histogram bin centers agree loosely at N=12000") {
    RngStream rng(6);
    std::vector<double> agents(12000);
    for (auto& x : agents) x = rng.normal(0.3, 0.8);
    const auto s = snap(std::move(agents));
    const auto m = moments(s);
    const auto h = histogram(s);
    double m1_hist = 0.0;
    for (int b = 0; b < 40; ++b) {
        const double center = 0.5 * (h.edges[static_cast<std::size_t>(b)] +
                                     h.edges[static_cast<std::size_t>(b) + 1]);
        m1_hist += center * h.density[static_cast<std::size_t>(b)] * h.bin_width();
    }
    CHECK(std::abs(m1_hist - m.m1) < 0.05);
}

TEST_CASE("cut_transient arithmetic, identity, idempotence") {
    std::vector<sim::Snapshot> traj;
    for (int k = 0; k < 400; ++k) traj.push_back(snap({0.0}, 0.025 * k));
    CHECK(cut_transient(traj, 1.0).size() == 360);
    CHECK(cut_transient(traj, 0.5).size() == 380);
    CHECK(cut_transient(traj, 0.0).size() == 400);
    const auto once = cut_transient(traj, 1.0);
    const auto twice = cut_transient(once, 1.0);
    CHECK(once.size() == twice.size());
    CHECK_THROWS(cut_transient(traj, 11.0));
}

TEST_CASE("subsample keeps everything at target = n and collapses duplicates") {
    FeatureMatrix fm;
    fm.rows = Eigen::MatrixXd::Random(37, 4);
    fm.meta.resize(37);
    const auto all = subsample(fm, 37, 1);
    CHECK(all.size() == 37);
    std::set<std::size_t> uniq(all.begin(), all.end());
    CHECK(uniq.size() == 37);

    FeatureMatrix dup;
    dup.rows = Eigen::MatrixXd::Ones(10, 3);
    dup.meta.resize(10);
    CHECK(subsample(dup, 1, 1).size() == 1);
}

TEST_CASE("subsample lands within 5% of the target") {
    RngStream rng(8);
    FeatureMatrix fm;
    fm.rows.resize(4000, 2);
    for (Eigen::Index i = 0; i < fm.rows.size(); ++i) fm.rows.data()[i] = rng.uniform();
    fm.meta.resize(4000);
    for (const std::size_t target : {400ul, 1000ul}) {
        const auto kept = subsample(fm, target, 3);
        CHECK(kept.size() >= target - target / 20);
        CHECK(kept.size() <= target + target / 20);
    }
}

TEST_CASE("thinned subsample has tighter spacing than a random one") {
    RngStream rng(9);
    FeatureMatrix fm;
    fm.rows.resize(10000, 2);
    for (Eigen::Index i = 0; i < fm.rows.size(); ++i) fm.rows.data()[i] = rng.uniform();
    fm.meta.resize(10000);
    const auto kept = subsample(fm, 1000, 5);

    std::vector<std::size_t> random_idx(10000);
    for (std::size_t i = 0; i < 10000; ++i) random_idx[i] = i;
    shuffle(random_idx, rng);
    random_idx.resize(kept.size());

    auto nn_dists = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> d;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            double best = 1e300;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                if (i == j) continue;
                best = std::min(best, (fm.rows.row(static_cast<Eigen::Index>(idx[i])) -
                                       fm.rows.row(static_cast<Eigen::Index>(idx[j])))
                                          .squaredNorm());
            }
            d.push_back(std::sqrt(best));
        }
        return d;
    };
    const auto d_thin = nn_dists(kept);
    const auto d_rand = nn_dists(random_idx);
    CHECK(stats::variance(d_thin) < stats::variance(d_rand));
}

TEST_CASE("feature matrix construction carries meta and mode") {
    std::vector<sim::Snapshot> snaps{snap({1.0, -1.0}, 0.5, 0.7, 3),
                                     snap({0.5, 0.5}, 0.525, 0.7, 3)};
    const auto fm = build_feature_matrix(snaps, FeatureMode::moments);
    REQUIRE(fm.rows.rows() == 2);
    CHECK(fm.rows(0, 0) == 0.0);   // M1 of {1,-1}
    CHECK(fm.rows(0, 1) == 1.0);   // M2
    CHECK(fm.meta[0].sigma == 0.7);
    CHECK(fm.meta[0].trajectory_id == 3);
    CHECK(fm.meta[1].time == 0.525);
    const auto fh = build_feature_matrix(snaps, FeatureMode::histograms, 40);
    CHECK(fh.rows.cols() == 40);
}
