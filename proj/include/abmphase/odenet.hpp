#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "abmphase/mlp.hpp"

namespace abmphase::odenet {

// One latent trajectory: nu2 values at constant spacing h, tagged with the
// parameter it was generated at.
struct LatentTrajectory {
    std::vector<double> nu2;
    double sigma = 0.0;
    int trajectory_id = 0;
    double t0 = 0.0;
};

struct SnapshotPairDataset {
    Eigen::VectorXd nu_t;      // nu2(t)
    Eigen::VectorXd nu_th;     // nu2(t+h)
    Eigen::VectorXd sigma;
    double h = 0.0;

    Eigen::Index size() const { return nu_t.size(); }
    void validate() const;
};

// Consecutive-snapshot pairs; never pairs across trajectory boundaries.
SnapshotPairDataset build_pairs(const std::vector<LatentTrajectory>& trajs, double h);

struct EulerNetHyper {
    int batch_size = 32;
    int epochs = 100;
    double lr = 1e-3;
    double train_frac = 0.8;
    double val_frac = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Network for the right-hand side f(nu2; sigma), trained so that one
// explicit Euler step of size h reproduces the next snapshot. State and
// parameter are centered and whitened with training-split statistics.
struct EulerNetModel {
    nn::Mlp net;
    double h = 0.0;
    nn::Scaler state_scaler = nn::Scaler();  // whiten, 1 feature
    nn::Scaler param_scaler = nn::Scaler();  // whiten, 1 feature
    double train_nu2_min = 0.0;              // training-data range, for rollout guards
    double train_nu2_max = 0.0;
};

// Vector field in whitened coordinates.
double field_whitened(const EulerNetModel& m, double z, double sigma);

// One Euler step in raw nu2 units.
double euler_predict(const EulerNetModel& m, double nu2, double sigma);

struct EulerEpoch {
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct EulerSplits {
    std::vector<std::size_t> train, val, test;
};

struct EulerTrainResult {
    EulerNetModel model;
    std::vector<EulerEpoch> history;
    EulerSplits splits;
    bool diverged = false;
};

EulerTrainResult train_euler_net(const SnapshotPairDataset& data, const EulerNetHyper& h);

// One-step MSE in whitened units over a subset of pairs.
double one_step_mse(const EulerNetModel& m, const SnapshotPairDataset& data,
                    const std::vector<std::size_t>& idx);

struct Rollout {
    std::vector<double> nu2;  // raw units, length steps+1 unless truncated
    bool truncated = false;
};

// Iterate euler_predict from nu2_0. Truncates (and flags) once the state
// leaves 10x the training-data range.
Rollout rollout(const EulerNetModel& m, double nu2_0, double sigma, int steps);

}  // namespace abmphase::odenet
