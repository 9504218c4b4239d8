#include "abmphase/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace abmphase::sim {

void ModelParams::validate() const {
    if (!(sigma >= 0.0)) throw std::invalid_argument("ModelParams: sigma must be >= 0");
    if (!(sigma_m >= 0.0)) throw std::invalid_argument("ModelParams: sigma_m must be >= 0");
}

void SimConfig::validate() const {
    if (n_agents < 1) throw std::invalid_argument("SimConfig: n_agents must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
    if (!(t_final > 0.0)) throw std::invalid_argument("SimConfig: t_final must be positive");
    if (snapshot_stride < 1)
        throw std::invalid_argument("SimConfig: snapshot_stride must be positive");
    if (!(explosion_bound > 0.0))
        throw std::invalid_argument("SimConfig: explosion_bound must be positive");
    const double steps = t_final / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
        throw std::invalid_argument("SimConfig: t_final / dt must be an integer step count");
}

long SimConfig::n_steps() const { return std::lround(t_final / dt); }

double drift(double x, double xbar, const ModelParams& p) {
    return -x * x * x + (p.alpha + p.nu * p.sigma_m * p.sigma_m) * x - p.theta * (x - xbar);
}

double diffusion_amplitude(double x, const ModelParams& p) {
    return std::sqrt(p.sigma * p.sigma + p.sigma_m * p.sigma_m * x * x);
}

void step_in_place(std::vector<double>& agents, const ModelParams& p, double dt,
                   RngStream& rng) {
    double xbar = 0.0;
    for (double x : agents) xbar += x;
    xbar /= static_cast<double>(agents.size());
    const double sqrt_dt = std::sqrt(dt);
    for (double& x : agents)
        x += drift(x, xbar, p) * dt + diffusion_amplitude(x, p) * sqrt_dt * rng.normal();
}

Snapshot step(const Snapshot& ensemble, const ModelParams& p, double dt, RngStream& rng) {
    Snapshot out = ensemble;
    step_in_place(out.agents, p, dt, rng);
    out.time = ensemble.time + dt;
    return out;
}

IcGrid IcGrid::default_grid() {
    IcGrid g;
    for (int i = 0; i <= 20; ++i) g.means.push_back(-2.0 + 0.2 * i);
    for (int i = 0; i <= 20; ++i) g.stds.push_back(i == 0 ? 0.1 : 0.1 * i);
    for (int i = 0; i <= 20; ++i) g.skews.push_back(-2.0 + 0.2 * i);
    for (int i = 0; i <= 20; ++i) g.kurts.push_back(0.72 * i);
    return g;
}

PearsonTarget IcGrid::draw(RngStream& rng) const {
    PearsonTarget t;
    t.mean = means[rng.uniform_index(means.size())];
    t.std = stds[rng.uniform_index(stds.size())];
    t.skewness = skews[rng.uniform_index(skews.size())];
    t.kurtosis = kurts[rng.uniform_index(kurts.size())];
    return clamp_to_feasible(t);
}

namespace {

bool exploded(const std::vector<double>& agents, double bound) {
    for (double x : agents)
        if (!std::isfinite(x) || std::abs(x) > bound) return true;
    return false;
}

}  // namespace

TrajectoryResult simulate_trajectory(std::span<const double> ic, const ModelParams& p,
                                     const SimConfig& cfg, RngStream& rng,
                                     int trajectory_id) {
    if (static_cast<int>(ic.size()) != cfg.n_agents)
        throw std::invalid_argument("simulate_trajectory: ic length must equal n_agents");
    p.validate();
    cfg.validate();

    TrajectoryResult result;
    std::vector<double> agents(ic.begin(), ic.end());
    if (exploded(agents, cfg.explosion_bound)) {
        result.discarded = true;
        return result;
    }

    const long steps = cfg.n_steps();
    result.snapshots.reserve(static_cast<std::size_t>(steps / cfg.snapshot_stride + 1));
    for (long k = 0; k < steps; ++k) {
        if (k % cfg.snapshot_stride == 0) {
            Snapshot s;
            s.agents = agents;
            s.time = static_cast<double>(k) * cfg.dt;
            s.sigma = p.sigma;
            s.trajectory_id = trajectory_id;
            result.snapshots.push_back(std::move(s));
        }
        step_in_place(agents, p, cfg.dt, rng);
        if (exploded(agents, cfg.explosion_bound)) {
            result.discarded = true;
            result.snapshots.clear();
            return result;
        }
    }
    return result;
}

TrajectoryDataset generate_dataset(std::span<const double> sigma_grid,
                                   int trajectories_per_sigma, const IcGrid& ic_grid,
                                   const ModelParams& base_params, const SimConfig& cfg) {
    if (sigma_grid.empty())
        throw std::invalid_argument("generate_dataset: sigma_grid must be nonempty");
    cfg.validate();

    const int n_sigma = static_cast<int>(sigma_grid.size());
    const int total = n_sigma * trajectories_per_sigma;
    std::vector<TrajectoryResult> results(static_cast<std::size_t>(total));

    // Each (sigma, trajectory) pair owns an independent keyed stream, so the
    // assembled dataset does not depend on scheduling.
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < total; ++idx) {
        const int si = idx / trajectories_per_sigma;
        const int tj = idx % trajectories_per_sigma;
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(tj));
        ModelParams p = base_params;
        p.sigma = sigma_grid[si];
        const PearsonTarget target = ic_grid.draw(rng);
        const auto ic = sample_pearson(target, static_cast<std::size_t>(cfg.n_agents), rng);
        results[static_cast<std::size_t>(idx)] = simulate_trajectory(ic, p, cfg, rng, tj);
    }

    TrajectoryDataset ds;
    ds.sigma_grid.assign(sigma_grid.begin(), sigma_grid.end());
    for (auto& r : results) {
        if (r.discarded) {
            ++ds.discarded_count;
            continue;
        }
        for (auto& s : r.snapshots) ds.snapshots.push_back(std::move(s));
    }
    if (ds.snapshots.empty())
        throw std::runtime_error(
            "generate_dataset: every trajectory exploded; nothing retained "
            "(discarded=" + std::to_string(ds.discarded_count) + ")");
    return ds;
}

std::vector<double> equidistant_grid(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("equidistant_grid: n must be positive");
    std::vector<double> g(static_cast<std::size_t>(n));
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

}  // namespace abmphase::sim
