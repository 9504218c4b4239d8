#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "abmphase/mlp.hpp"

namespace abmphase::cae {

struct YNetHyper {
    int batch_size = 32;
    int epochs = 500;
    double lr = 1e-3;
    double alpha = 10.0;  // weight of the conformality penalty
    double train_frac = 0.8;
    double val_frac = 0.1;  // remainder is the test split
    std::uint64_t seed = 0;
    int hidden_width = 20;
    int hidden_layers = 4;

    void validate() const;
};

// Encoder (psi1,psi2) -> (nu1,nu2), decoder back, and an estimator mapping
// nu1 alone to the parameter. Inputs and parameter are min-max scaled.
struct YNetModel {
    nn::Mlp encoder;
    nn::Mlp decoder;
    nn::Mlp estimator;
    nn::Scaler input_scaler = nn::Scaler();
    nn::Scaler sigma_scaler = nn::Scaler();
};

struct YNetEval {
    Eigen::MatrixXd latent;     // 2 x n (nu1; nu2)
    Eigen::MatrixXd recon;      // 2 x n, in raw psi units
    Eigen::VectorXd sigma_hat;  // n, in raw sigma units
};

// Forward pass on raw (unscaled) psi columns.
YNetEval ynet_forward(const YNetModel& m, const Eigen::MatrixXd& psi_raw);

// Mean cos^2 of the angle between the two encoder gradient rows over a
// batch of raw inputs. Samples with a vanishing gradient row count as
// cos = 0 and increment *warnings.
double conformality_loss(const YNetModel& m, const Eigen::MatrixXd& psi_raw,
                         int* warnings = nullptr);

double mean_abs_cos_theta(const YNetModel& m, const Eigen::MatrixXd& psi_raw,
                          int* warnings = nullptr);

struct YNetEpoch {
    double train_recon = 0.0, train_conf = 0.0, train_est = 0.0;
    double val_recon = 0.0, val_conf = 0.0, val_est = 0.0;
};

struct YNetSplits {
    std::vector<std::size_t> train, val, test;
};

struct YNetTrainResult {
    YNetModel model;
    std::vector<YNetEpoch> history;
    YNetSplits splits;
    bool diverged = false;
};

// Two sequential updates per mini-batch: (1) encoder+decoder on
// reconstruction + alpha * MSE(cos theta, 0); (2) estimator+encoder on the
// parameter estimate, re-encoding the same batch. No early stopping.
YNetTrainResult train_ynet(const Eigen::MatrixXd& psi_rows, const Eigen::VectorXd& sigma,
                           const YNetHyper& h);

}  // namespace abmphase::cae
