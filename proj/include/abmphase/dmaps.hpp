#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "abmphase/features.hpp"

namespace abmphase::dmaps {

struct KernelConfig {
    // Kernel scale. When epsilon <= 0 it is derived at fit time as
    // c * median(pairwise distance)^2.
    double epsilon = 0.0;
    double c = 1.0;
};

// Spectral embedding of a training feature matrix together with everything
// the out-of-sample extension needs: the retained rows, the kernel scale
// and both normalization degree vectors.
struct DiffusionEmbedding {
    Eigen::VectorXd eigenvalues;      // descending, eigenvalues[0] = 1
    Eigen::MatrixXd eigenvectors;     // n x (n_pairs+1); column 0 is the trivial constant
    Eigen::MatrixXd training_rows;    // n x dim
    std::vector<features::RowMeta> meta;
    Eigen::VectorXd density_degrees;  // P_ii = sum_j K_ij
    Eigen::VectorXd markov_degrees;   // D_ii = sum_j Ktilde_ij
    double epsilon = 0.0;
    double c = 0.0;
    features::FeatureMode mode = features::FeatureMode::histograms;

    int n_coords() const { return static_cast<int>(eigenvalues.size()) - 1; }
    // Non-trivial coordinate k (1-based, psi_1 is coordinate 1).
    Eigen::VectorXd coordinate(int k) const { return eigenvectors.col(k); }
};

// Local-linear-regression residuals r_k for eigenvector selection;
// r[0] corresponds to psi_1 and is 1 by convention.
struct ResidualReport {
    std::vector<double> r;
    int warnings = 0;

    // Indices (1-based eigenvector numbers) of the two largest residuals.
    std::pair<int, int> top_two() const;
};

Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& rows);

// epsilon = c * median(off-diagonal pairwise distance)^2. The input is the
// squared-distance matrix.
double select_epsilon(const Eigen::MatrixXd& sq_dists, double c);

Eigen::MatrixXd build_kernel(const Eigen::MatrixXd& sq_dists, double epsilon);

// Ktilde = P^-1 K P^-1 with P_ii the kernel row sums; removes the
// sampling-density bias. Degrees are returned for the extension step.
Eigen::MatrixXd density_normalize(const Eigen::MatrixXd& K, Eigen::VectorXd* degrees = nullptr);

// M = D^-1 Ktilde, row-stochastic.
Eigen::MatrixXd markov_normalize(const Eigen::MatrixXd& Kt, Eigen::VectorXd* degrees = nullptr);

// Top n_pairs+1 eigenpairs of M via the symmetric conjugate
// S = D^(1/2) M D^(-1/2); eigenvectors are mapped back with D^(-1/2),
// unit-normalized, and sign-fixed so the largest-magnitude entry is positive.
// Only the spectral fields of the returned embedding are filled.
DiffusionEmbedding eigendecompose(const Eigen::MatrixXd& M, const Eigen::VectorXd& D,
                                  int n_pairs);

// Full pipeline on a feature matrix; retains rows/meta/degrees for Nystrom.
DiffusionEmbedding fit_embedding(const features::FeatureMatrix& fm, const KernelConfig& cfg,
                                 int n_pairs = 10);

// Leave-one-out local linear regression of each eigenvector on all
// preceding ones (Gaussian weights, bandwidth = bandwidth_factor * median
// pairwise predictor distance). Large residual = new direction.
ResidualReport local_linear_residuals(const DiffusionEmbedding& emb,
                                      double bandwidth_factor = 1.0 / 3.0);

// Nystrom extension of new rows onto the leading n_coords non-trivial
// coordinates. Throws if an eigenvalue used falls below 1e-6.
Eigen::MatrixXd nystrom_extend(const DiffusionEmbedding& emb, const Eigen::MatrixXd& new_rows,
                               int n_coords);

}  // namespace abmphase::dmaps
