#include "abmphase/dmaps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "abmphase/stats.hpp"

namespace abmphase::dmaps {

std::pair<int, int> ResidualReport::top_two() const {
    if (r.size() < 2) throw std::runtime_error("ResidualReport: need at least two residuals");
    int first = 0, second = 1;
    if (r[second] > r[first]) std::swap(first, second);
    for (int k = 2; k < static_cast<int>(r.size()); ++k) {
        if (r[static_cast<std::size_t>(k)] > r[static_cast<std::size_t>(first)]) {
            second = first;
            first = k;
        } else if (r[static_cast<std::size_t>(k)] > r[static_cast<std::size_t>(second)]) {
            second = k;
        }
    }
    return {first + 1, second + 1};
}

Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& rows) {
    const Eigen::Index n = rows.rows();
    if (n < 2) throw std::invalid_argument("pairwise_sq_dists: need at least 2 rows");
    const Eigen::VectorXd sq = rows.rowwise().squaredNorm();
    Eigen::MatrixXd D = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                        2.0 * rows * rows.transpose();
    D = D.cwiseMax(0.0);
    D.diagonal().setZero();
    // symmetrize away rounding
    D = 0.5 * (D + D.transpose()).eval();
    return D;
}

double select_epsilon(const Eigen::MatrixXd& sq_dists, double c) {
    const Eigen::Index n = sq_dists.rows();
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d.push_back(std::sqrt(sq_dists(i, j)));
    if (d.empty() || *std::max_element(d.begin(), d.end()) <= 0.0)
        throw std::invalid_argument("select_epsilon: no positive pairwise distance");
    const double med = stats::median(std::move(d));
    return c * med * med;
}

Eigen::MatrixXd build_kernel(const Eigen::MatrixXd& sq_dists, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("build_kernel: epsilon must be positive");
    return (-sq_dists / (2.0 * epsilon)).array().exp();
}

Eigen::MatrixXd density_normalize(const Eigen::MatrixXd& K, Eigen::VectorXd* degrees) {
    const Eigen::VectorXd p = K.rowwise().sum();
    if ((p.array() <= 0.0).any())
        throw std::runtime_error("density_normalize: zero kernel row sum");
    const Eigen::VectorXd pinv = p.cwiseInverse();
    if (degrees) *degrees = p;
    return pinv.asDiagonal() * K * pinv.asDiagonal();
}

Eigen::MatrixXd markov_normalize(const Eigen::MatrixXd& Kt, Eigen::VectorXd* degrees) {
    const Eigen::VectorXd d = Kt.rowwise().sum();
    if ((d.array() <= 0.0).any())
        throw std::runtime_error("markov_normalize: zero row sum");
    if (degrees) *degrees = d;
    return d.cwiseInverse().asDiagonal() * Kt;
}

DiffusionEmbedding eigendecompose(const Eigen::MatrixXd& M, const Eigen::VectorXd& D,
                                  int n_pairs) {
    const Eigen::Index n = M.rows();
    if (n_pairs + 1 > n)
        throw std::invalid_argument("eigendecompose: n_pairs + 1 exceeds matrix size");

    // S = D^(1/2) M D^(-1/2) is symmetric, so the spectrum is real and the
    // solve is stable.
    const Eigen::VectorXd dsqrt = D.cwiseSqrt();
    const Eigen::VectorXd dinvsqrt = dsqrt.cwiseInverse();
    Eigen::MatrixXd S = dsqrt.asDiagonal() * M * dinvsqrt.asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecompose: eigensolver failed to converge");

    // Eigen returns ascending order; take the top n_pairs+1.
    DiffusionEmbedding emb;
    emb.eigenvalues.resize(n_pairs + 1);
    emb.eigenvectors.resize(n, n_pairs + 1);
    for (int k = 0; k <= n_pairs; ++k) {
        const Eigen::Index src = n - 1 - k;
        emb.eigenvalues(k) = solver.eigenvalues()(src);
        Eigen::VectorXd psi = dinvsqrt.asDiagonal() * solver.eigenvectors().col(src);
        psi.normalize();
        Eigen::Index imax = 0;
        psi.cwiseAbs().maxCoeff(&imax);
        if (psi(imax) < 0.0) psi = -psi;
        emb.eigenvectors.col(k) = psi;
    }
    return emb;
}

DiffusionEmbedding fit_embedding(const features::FeatureMatrix& fm, const KernelConfig& cfg,
                                 int n_pairs) {
    fm.validate();
    const Eigen::MatrixXd sq = pairwise_sq_dists(fm.rows);
    const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : select_epsilon(sq, cfg.c);
    const Eigen::MatrixXd K = build_kernel(sq, eps);
    Eigen::VectorXd p, d;
    const Eigen::MatrixXd Kt = density_normalize(K, &p);
    const Eigen::MatrixXd M = markov_normalize(Kt, &d);
    DiffusionEmbedding emb = eigendecompose(M, d, n_pairs);
    emb.training_rows = fm.rows;
    emb.meta = fm.meta;
    emb.density_degrees = p;
    emb.markov_degrees = d;
    emb.epsilon = eps;
    emb.c = cfg.c;
    emb.mode = fm.mode;
    return emb;
}

namespace {

// Kernel-weighted linear fit of y on predictors, leave-one-out at every
// point. Returns ||y - yhat|| / ||y||.
double loo_residual(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& y,
                    double bandwidth, bool* degenerate) {
    const Eigen::Index n = predictors.rows();
    const Eigen::Index p = predictors.cols();
    if (!(bandwidth > 0.0)) {
        *degenerate = true;
        return 1.0;
    }
    const Eigen::MatrixXd sq = pairwise_sq_dists(predictors);
    const double inv_bw2 = 1.0 / (bandwidth * bandwidth);

    Eigen::MatrixXd X(n, p + 1);
    X.col(0).setOnes();
    X.rightCols(p) = predictors;

    double num = 0.0;
    Eigen::VectorXd w(n);
    Eigen::MatrixXd Xw(n, p + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        w = (-sq.col(i) * inv_bw2).array().exp();
        w(i) = 0.0;  // leave-one-out
        Xw = w.asDiagonal() * X;
        Eigen::MatrixXd xtwx = X.transpose() * Xw;
        const Eigen::VectorXd xtwy = Xw.transpose() * y;
        xtwx.diagonal().array() += 1e-12 * (1.0 + xtwx.diagonal().maxCoeff());
        const Eigen::VectorXd theta = xtwx.ldlt().solve(xtwy);
        const double pred = X.row(i).dot(theta);
        num += (y(i) - pred) * (y(i) - pred);
    }
    const double den = y.squaredNorm();
    if (!(den > 0.0)) {
        *degenerate = true;
        return 1.0;
    }
    return std::sqrt(num / den);
}

double median_pairwise_distance(const Eigen::MatrixXd& predictors) {
    const Eigen::MatrixXd sq = pairwise_sq_dists(predictors);
    const Eigen::Index n = sq.rows();
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d.push_back(std::sqrt(sq(i, j)));
    return stats::median(std::move(d));
}

}  // namespace

ResidualReport local_linear_residuals(const DiffusionEmbedding& emb, double bandwidth_factor) {
    const int K = emb.n_coords();
    if (K < 2)
        throw std::invalid_argument("local_linear_residuals: need >= 2 non-trivial eigenvectors");
    ResidualReport rep;
    rep.r.assign(static_cast<std::size_t>(K), 1.0);  // r_1 = 1 by convention
    for (int k = 2; k <= K; ++k) {
        const Eigen::MatrixXd predictors = emb.eigenvectors.middleCols(1, k - 1);
        const Eigen::VectorXd y = emb.eigenvectors.col(k);
        const double bw = bandwidth_factor * median_pairwise_distance(predictors);
        bool degenerate = false;
        double r = loo_residual(predictors, y, bw, &degenerate);
        if (degenerate) {
            r = 1.0;
            ++rep.warnings;
        }
        rep.r[static_cast<std::size_t>(k - 1)] = std::min(r, 1.0);
    }
    return rep;
}

Eigen::MatrixXd nystrom_extend(const DiffusionEmbedding& emb, const Eigen::MatrixXd& new_rows,
                               int n_coords) {
    if (new_rows.cols() != emb.training_rows.cols())
        throw std::invalid_argument("nystrom_extend: feature dimension mismatch");
    if (n_coords < 1 || n_coords > emb.n_coords())
        throw std::invalid_argument("nystrom_extend: bad coordinate count");
    for (int k = 1; k <= n_coords; ++k)
        if (emb.eigenvalues(k) < 1e-6)
            throw std::runtime_error("nystrom_extend: eigenvalue " + std::to_string(k) +
                                     " below 1e-6, extension refused");

    const Eigen::Index n_new = new_rows.rows();
    Eigen::MatrixXd coords(n_new, n_coords);
    const Eigen::VectorXd train_sq = emb.training_rows.rowwise().squaredNorm();
    const Eigen::VectorXd pinv = emb.density_degrees.cwiseInverse();

    constexpr Eigen::Index chunk = 2048;
    for (Eigen::Index start = 0; start < n_new; start += chunk) {
        const Eigen::Index len = std::min(chunk, n_new - start);
        const auto block = new_rows.middleRows(start, len);
        // squared distances of the chunk against all training rows
        Eigen::MatrixXd sq = (-2.0 * block * emb.training_rows.transpose()).rowwise() +
                             train_sq.transpose();
        sq.colwise() += block.rowwise().squaredNorm();
        sq = sq.cwiseMax(0.0);
        Eigen::MatrixXd Krow = (-sq / (2.0 * emb.epsilon)).array().exp();
        // same two normalizations as training, with stored training degrees;
        // the new point's own density degree cancels in the row normalization
        Krow = Krow * pinv.asDiagonal();
        const Eigen::VectorXd rowsum = Krow.rowwise().sum();
        if ((rowsum.array() <= 0.0).any())
            throw std::runtime_error("nystrom_extend: new point has zero kernel row sum");
        Krow.array().colwise() /= rowsum.array();
        for (int k = 1; k <= n_coords; ++k)
            coords.block(start, k - 1, len, 1).noalias() =
                Krow * emb.eigenvectors.col(k) / emb.eigenvalues(k);
    }
    return coords;
}

}  // namespace abmphase::dmaps
