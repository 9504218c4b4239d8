#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abmphase/pearson.hpp"
#include "abmphase/rng.hpp"

namespace abmphase::sim {

// Coefficients of the agent SDE
//   dx_i = [ -x_i^3 + (alpha + nu*sigma_m^2) x_i - theta (x_i - xbar) ] dt
//          + sqrt(sigma^2 + sigma_m^2 x_i^2) dW_i
// where xbar is the ensemble mean. sigma is the bifurcation parameter.
struct ModelParams {
    double sigma = 1.0;
    double theta = 4.0;
    double alpha = 1.0;
    double nu = 0.5;
    double sigma_m = 0.8;

    void validate() const;
};

struct SimConfig {
    int n_agents = 12000;
    double dt = 0.005;
    double t_final = 10.0;
    int snapshot_stride = 5;
    double explosion_bound = 1e3;
    std::uint64_t seed = 0;

    void validate() const;
    long n_steps() const;
    // Spacing between stored snapshots, the step size h used downstream.
    double snapshot_spacing() const { return dt * snapshot_stride; }
};

struct Snapshot {
    std::vector<double> agents;
    double time = 0.0;
    double sigma = 0.0;
    int trajectory_id = 0;
};

struct TrajectoryDataset {
    std::vector<Snapshot> snapshots;
    std::vector<double> sigma_grid;
    long discarded_count = 0;
};

// Drift term of the SDE at agent value x with ensemble mean xbar.
double drift(double x, double xbar, const ModelParams& p);

// Noise amplitude sqrt(sigma^2 + sigma_m^2 x^2).
double diffusion_amplitude(double x, const ModelParams& p);

// One Euler-Maruyama step of the whole ensemble; the shared mean is taken
// before any agent moves.
void step_in_place(std::vector<double>& agents, const ModelParams& p, double dt,
                   RngStream& rng);
Snapshot step(const Snapshot& ensemble, const ModelParams& p, double dt, RngStream& rng);

// Discretized Pearson-target grids the initial conditions are drawn from.
struct IcGrid {
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<double> skews;
    std::vector<double> kurts;

    // mean in [-2,2] step 0.2; std in [0,2] step 0.1 with 0 clamped to 0.1;
    // skew in [-2,2] step 0.2; kurtosis in [0,15) step 0.72 clamped to the
    // Pearson feasibility boundary at draw time.
    static IcGrid default_grid();
    PearsonTarget draw(RngStream& rng) const;
};

// A trajectory either yields its retained snapshots or is discarded
// because an agent blew up.
struct TrajectoryResult {
    bool discarded = false;
    std::vector<Snapshot> snapshots;
};

TrajectoryResult simulate_trajectory(std::span<const double> ic, const ModelParams& p,
                                     const SimConfig& cfg, RngStream& rng,
                                     int trajectory_id = 0);

// Full sweep: trajectories_per_sigma trajectories at every sigma in the
// grid, initial conditions redrawn from the IC grid per trajectory.
// Deterministic for a fixed seed regardless of thread count.
TrajectoryDataset generate_dataset(std::span<const double> sigma_grid,
                                   int trajectories_per_sigma, const IcGrid& ic_grid,
                                   const ModelParams& base_params, const SimConfig& cfg);

std::vector<double> equidistant_grid(double lo, double hi, int n);

}  // namespace abmphase::sim
