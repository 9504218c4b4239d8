#include <doctest.h>

#include <cmath>

#include "abmphase/dmaps.hpp"
#include "abmphase/rng.hpp"
#include "abmphase/stats.hpp"

using namespace abmphase;
using namespace abmphase::dmaps;

namespace {

features::FeatureMatrix matrix_of(const Eigen::MatrixXd& rows) {
    features::FeatureMatrix fm;
    fm.rows = rows;
    fm.meta.resize(static_cast<std::size_t>(rows.rows()));
    return fm;
}

// Non-uniformly sampled arc in the plane; the embedding should recover the
// arc parameter.
Eigen::MatrixXd arc_points(int n, std::uint64_t seed) {
    RngStream rng(seed);
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const double theta = 2.2 * u * u;  // density piles up near theta = 0
        pts(i, 0) = std::cos(theta);
        pts(i, 1) = std::sin(theta);
    }
    return pts;
}

}  // namespace

TEST_CASE("pairwise squared distances") {
    Eigen::MatrixXd rows(2, 2);
    rows << 0, 0, 3, 4;
    const auto D = pairwise_sq_dists(rows);
    CHECK(D(0, 0) == 0.0);
    CHECK(D(1, 1) == 0.0);
    CHECK(D(0, 1) == doctest::Approx(25.0));
    CHECK(D(1, 0) == doctest::Approx(25.0));

    Eigen::MatrixXd same(3, 4);
    same.setConstant(1.3);
    CHECK(pairwise_sq_dists(same).maxCoeff() == doctest::Approx(0.0));

    Eigen::MatrixXd rnd = Eigen::MatrixXd::Random(20, 5);
    const auto Dr = pairwise_sq_dists(rnd);
    CHECK((Dr - Dr.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("epsilon from the median pairwise distance") {
    // three collinear points with pairwise distances {1, 2, 3}
    Eigen::MatrixXd rows(3, 1);
    rows << 0.0, 1.0, 3.0;
    const auto D = pairwise_sq_dists(rows);
    CHECK(select_epsilon(D, 0.03) == doctest::Approx(0.12));
    CHECK(select_epsilon(D, 1.0) == doctest::Approx(4.0));
    // homogeneity: scaling distances by s scales epsilon by s^2
    Eigen::MatrixXd scaled = rows * 5.0;
    CHECK(select_epsilon(pairwise_sq_dists(scaled), 1.0) == doctest::Approx(100.0));
    Eigen::MatrixXd degenerate = Eigen::MatrixXd::Zero(3, 1);
    CHECK_THROWS(select_epsilon(pairwise_sq_dists(degenerate), 1.0));
}

TEST_CASE("kernel entries") {
    Eigen::MatrixXd D(2, 2);
    D << 0.0, 2.0, 2.0, 0.0;
    const auto K = build_kernel(D, 1.0);
    CHECK(K(0, 0) == 1.0);
    CHECK(K(0, 1) == doctest::Approx(std::exp(-1.0)));
    Eigen::MatrixXd Dr = pairwise_sq_dists(Eigen::MatrixXd::Random(15, 3));
    const auto Kr = build_kernel(Dr, 0.7);
    CHECK(Kr.maxCoeff() <= 1.0);
    CHECK(Kr.minCoeff() > 0.0);
}

TEST_CASE("density normalization hand case and symmetry") {
    Eigen::MatrixXd K = Eigen::MatrixXd::Ones(2, 2);
    Eigen::VectorXd p;
    const auto Kt = density_normalize(K, &p);
    CHECK(p(0) == doctest::Approx(2.0));
    CHECK(Kt(0, 0) == doctest::Approx(0.25));
    CHECK(Kt(0, 1) == doctest::Approx(0.25));
    Eigen::MatrixXd Kr = build_kernel(pairwise_sq_dists(Eigen::MatrixXd::Random(15, 3)), 0.5);
    const auto Ktr = density_normalize(Kr);
    CHECK((Ktr - Ktr.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("markov normalization is row-stochastic") {
    Eigen::MatrixXd Kt(2, 2);
    Kt << 1.0, 0.5, 0.5, 1.0;
    Eigen::VectorXd d;
    const auto M = markov_normalize(Kt, &d);
    CHECK(M(0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(M(0, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(M(1, 0) == doctest::Approx(1.0 / 3.0));
    Eigen::MatrixXd Kr = build_kernel(pairwise_sq_dists(Eigen::MatrixXd::Random(25, 3)), 0.5);
    const auto Mr = markov_normalize(density_normalize(Kr));
    for (Eigen::Index i = 0; i < Mr.rows(); ++i)
        CHECK(std::abs(Mr.row(i).sum() - 1.0) < 1e-12);
}

TEST_CASE("eigendecomposition of the two-point chain") {
    Eigen::MatrixXd Kt(2, 2);
    Kt << 1.0, 0.5, 0.5, 1.0;
    Eigen::VectorXd d;
    const auto M = markov_normalize(Kt, &d);
    const auto emb = eigendecompose(M, d, 1);
    CHECK(emb.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(emb.eigenvalues(1) == doctest::Approx(1.0 / 3.0));
    // trivial eigenvector is constant
    CHECK(emb.eigenvectors(0, 0) == doctest::Approx(emb.eigenvectors(1, 0)));
    // second eigenvector proportional to (1, -1)
    CHECK(emb.eigenvectors(0, 1) == doctest::Approx(-emb.eigenvectors(1, 1)));
    CHECK(std::abs(emb.eigenvectors(0, 1)) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("spectral residuals and eigenvalue range on random data") {
    Eigen::MatrixXd rows = Eigen::MatrixXd::Random(60, 4);
    const auto emb = fit_embedding(matrix_of(rows), KernelConfig{0.0, 1.0}, 8);
    CHECK(std::abs(emb.eigenvalues(0) - 1.0) < 1e-10);
    // rebuild M to verify the residuals
    const auto D = pairwise_sq_dists(rows);
    const auto K = build_kernel(D, emb.epsilon);
    const auto M = markov_normalize(density_normalize(K));
    for (int k = 0; k <= 8; ++k) {
        const Eigen::VectorXd psi = emb.eigenvectors.col(k);
        CHECK((M * psi - emb.eigenvalues(k) * psi).norm() <= 1e-8 * psi.norm());
        CHECK(emb.eigenvalues(k) > 0.0);
        CHECK(emb.eigenvalues(k) <= 1.0 + 1e-12);
    }
    // sign convention: largest-magnitude entry positive
    for (int k = 0; k <= 8; ++k) {
        Eigen::Index imax = 0;
        emb.eigenvectors.col(k).cwiseAbs().maxCoeff(&imax);
        CHECK(emb.eigenvectors(imax, k) > 0.0);
    }
}

TEST_CASE("embedding of a non-uniformly sampled arc tracks arclength") {
    const int n = 300;
    RngStream rng(11);
    Eigen::MatrixXd pts(n, 2);
    std::vector<double> theta(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        theta[static_cast<std::size_t>(i)] = 2.2 * u * u;
        pts(i, 0) = std::cos(theta[static_cast<std::size_t>(i)]);
        pts(i, 1) = std::sin(theta[static_cast<std::size_t>(i)]);
    }
    const auto emb = fit_embedding(matrix_of(pts), KernelConfig{0.0, 2.0}, 4);
    std::vector<double> psi1(n);
    for (int i = 0; i < n; ++i) psi1[static_cast<std::size_t>(i)] = emb.eigenvectors(i, 1);
    // density-invariant normalization recovers the arc parameter monotonically
    CHECK(std::abs(stats::spearman_correlation(psi1, theta)) >= 0.99);
}

TEST_CASE("local linear residuals flag harmonics and new directions") {
    const int n = 400;
    DiffusionEmbedding emb;
    emb.eigenvalues = Eigen::VectorXd::Ones(3);
    emb.eigenvectors.resize(n, 3);
    RngStream rng(12);

    SUBCASE("psi2 = psi1^2 is a harmonic") {
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * rng.uniform() - 1.0;
            emb.eigenvectors(i, 0) = 1.0;
            emb.eigenvectors(i, 1) = t;
            emb.eigenvectors(i, 2) = t * t;
        }
        const auto rep = local_linear_residuals(emb);
        CHECK(rep.r[0] == 1.0);
        CHECK(rep.r[1] < 0.2);
    }

    SUBCASE("independent grid coordinate is a new direction") {
        for (int i = 0; i < n; ++i) {
            emb.eigenvectors(i, 0) = 1.0;
            emb.eigenvectors(i, 1) = 2.0 * rng.uniform() - 1.0;
            emb.eigenvectors(i, 2) = 2.0 * rng.uniform() - 1.0;
        }
        const auto rep = local_linear_residuals(emb);
        CHECK(rep.r[1] > 0.8);
    }
}

TEST_CASE("top_two returns the eigenvector numbers of the largest residuals") {
    ResidualReport rep;
    rep.r = {1.0, 0.9, 0.1, 0.3};
    const auto [a, b] = rep.top_two();
    CHECK(a == 1);
    CHECK(b == 2);
}

TEST_CASE("nystrom extension") {
    const auto pts = arc_points(120, 13);
    const auto emb = fit_embedding(matrix_of(pts), KernelConfig{0.0, 2.0}, 4);

    SUBCASE("training points are reproduced at the nodes") {
        const auto coords = nystrom_extend(emb, pts, 3);
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            for (int k = 1; k <= 3; ++k)
                CHECK(std::abs(coords(i, k - 1) - emb.eigenvectors(i, k)) < 1e-6);
    }

    SUBCASE("midpoint of near-identical training points stays in their hull") {
        Eigen::MatrixXd tri = pts.topRows(2);
        tri.row(1) = tri.row(0) + Eigen::RowVector2d(1e-4, -1e-4);
        Eigen::MatrixXd mid = 0.5 * (tri.row(0) + tri.row(1));
        const auto base = nystrom_extend(emb, tri, 2);
        const auto ext = nystrom_extend(emb, mid, 2);
        for (int k = 0; k < 2; ++k) {
            const double lo = std::min(base(0, k), base(1, k)) - 1e-9;
            const double hi = std::max(base(0, k), base(1, k)) + 1e-9;
            CHECK(ext(0, k) >= lo);
            CHECK(ext(0, k) <= hi);
        }
    }

    SUBCASE("tiny eigenvalues are refused") {
        DiffusionEmbedding bad = emb;
        bad.eigenvalues(2) = 1e-9;
        CHECK_THROWS(nystrom_extend(bad, pts.topRows(3), 3));
        CHECK_NOTHROW(nystrom_extend(bad, pts.topRows(3), 1));
    }

    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS(nystrom_extend(emb, Eigen::MatrixXd::Random(2, 5), 2));
    }
}
