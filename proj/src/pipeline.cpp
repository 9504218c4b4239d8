#include "abmphase/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <stdexcept>

#include "abmphase/io.hpp"
#include "abmphase/sha256.hpp"
#include "abmphase/stats.hpp"
#include "abmphase/svg.hpp"

namespace fs = std::filesystem;

namespace abmphase::pipeline {

namespace {

std::string join(const std::string& dir, const std::string& rel) {
    return (fs::path(dir) / rel).string();
}

std::string sigma_file(int i, bool holdout, const std::string& format) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "trajectories/%s_%03d.%s", holdout ? "holdout" : "sigma",
                  i, format == "csv" ? "csv" : "bin");
    return buf;
}

json stage_config_json(const std::string& stage, const PipelineConfig& cfg) {
    const json j = cfg.to_json();
    if (stage == "simulate") return {{"seed", cfg.seed}, {"sim", j.at("sim")}};
    if (stage == "featurize") return {{"featurize", j.at("featurize")}};
    if (stage == "embed") return {{"embed", j.at("embed")}};
    if (stage == "lift") return {{"embed", j.at("embed")}};
    if (stage == "train-ynet") return {{"seed", cfg.seed}, {"ynet", j.at("ynet")}};
    if (stage == "build-pairs") return json::object();
    if (stage == "train-ode") return {{"seed", cfg.seed}, {"ode", j.at("ode")}};
    if (stage == "bifurcate") return {{"bifurcation", j.at("bifurcation")}};
    if (stage == "plots") return json::object();
    throw std::invalid_argument("unknown stage: " + stage);
}

// time + id key that survives a csv round trip
std::string row_key(double sigma, int traj, double time) {
    return io::format_double(sigma) + "|" + std::to_string(traj) + "|" +
           io::format_double(time);
}

}  // namespace

void PipelineConfig::validate() const {
    sim::SimConfig sc{sim.n_agents, sim.dt, sim.t_final, sim.snapshot_stride,
                      sim.explosion_bound, seed};
    sc.validate();
    if (sim.n_sigma < 1 || !(sim.sigma_max >= sim.sigma_min))
        throw std::invalid_argument("config: bad sigma grid");
    if (sim.trajectories_per_sigma < 1)
        throw std::invalid_argument("config: trajectories_per_sigma must be positive");
    if (featurize.bins < 1 || !(featurize.range_hi > featurize.range_lo))
        throw std::invalid_argument("config: bad histogram bins/range");
    if (!(embed.t_cut >= 0.0) || embed.t_cut >= sim.t_final)
        throw std::invalid_argument("config: t_cut must lie in [0, t_final)");
    if (embed.n_pairs < 2) throw std::invalid_argument("config: n_pairs must be >= 2");
    if (bifurcation.sigma_min < sim.sigma_min - 1e-12 ||
        bifurcation.sigma_max > sim.sigma_max + 1e-12)
        throw std::invalid_argument(
            "config: bifurcation sigma range must lie inside the training sigma range");
    const double h = sim.dt * sim.snapshot_stride;
    if (!(h > 0.0)) throw std::invalid_argument("config: dt * snapshot_stride must be positive");
}

std::vector<double> PipelineConfig::sigma_grid() const {
    return sim::equidistant_grid(sim.sigma_min, sim.sigma_max, sim.n_sigma);
}

std::string PipelineConfig::resolved_out_dir() const {
    const char* root = std::getenv("ABMPHASE_OUT_ROOT");
    if (!root || !*root) return out_dir;
    return (fs::path(root) / fs::path(out_dir).relative_path()).string();
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        c.sim.n_agents = s.value("n_agents", c.sim.n_agents);
        c.sim.dt = s.value("dt", c.sim.dt);
        c.sim.t_final = s.value("t_final", c.sim.t_final);
        c.sim.snapshot_stride = s.value("snapshot_stride", c.sim.snapshot_stride);
        c.sim.explosion_bound = s.value("explosion_bound", c.sim.explosion_bound);
        c.sim.sigma_min = s.value("sigma_min", c.sim.sigma_min);
        c.sim.sigma_max = s.value("sigma_max", c.sim.sigma_max);
        c.sim.n_sigma = s.value("n_sigma", c.sim.n_sigma);
        c.sim.trajectories_per_sigma =
            s.value("trajectories_per_sigma", c.sim.trajectories_per_sigma);
        if (s.contains("holdout_sigmas"))
            c.sim.holdout_sigmas = s.at("holdout_sigmas").get<std::vector<double>>();
        c.sim.holdout_trajectories = s.value("holdout_trajectories", c.sim.holdout_trajectories);
        c.sim.format = s.value("format", c.sim.format);
    }
    if (j.contains("featurize")) {
        const auto& s = j.at("featurize");
        c.featurize.bins = s.value("bins", c.featurize.bins);
        c.featurize.range_lo = s.value("range_lo", c.featurize.range_lo);
        c.featurize.range_hi = s.value("range_hi", c.featurize.range_hi);
    }
    if (j.contains("embed")) {
        const auto& s = j.at("embed");
        c.embed.t_cut = s.value("t_cut", c.embed.t_cut);
        c.embed.c_hist = s.value("c_hist", c.embed.c_hist);
        c.embed.c_moments = s.value("c_moments", c.embed.c_moments);
        c.embed.n_pairs = s.value("n_pairs", c.embed.n_pairs);
        c.embed.subsample_hist = s.value("subsample_hist", c.embed.subsample_hist);
        c.embed.subsample_moments = s.value("subsample_moments", c.embed.subsample_moments);
        c.embed.bandwidth_factor = s.value("bandwidth_factor", c.embed.bandwidth_factor);
        c.embed.subsample_seed = s.value("subsample_seed", c.embed.subsample_seed);
        c.embed.lambda_scale = s.value("lambda_scale", c.embed.lambda_scale);
    }
    if (j.contains("ynet")) {
        const auto& s = j.at("ynet");
        c.ynet.epochs = s.value("epochs", c.ynet.epochs);
        c.ynet.batch_size = s.value("batch_size", c.ynet.batch_size);
        c.ynet.lr = s.value("lr", c.ynet.lr);
        c.ynet.alpha = s.value("alpha", c.ynet.alpha);
    }
    if (j.contains("ode")) {
        const auto& s = j.at("ode");
        c.ode.epochs = s.value("epochs", c.ode.epochs);
        c.ode.batch_size = s.value("batch_size", c.ode.batch_size);
        c.ode.lr = s.value("lr", c.ode.lr);
    }
    if (j.contains("bifurcation")) {
        const auto& s = j.at("bifurcation");
        c.bifurcation.sigma_min = s.value("sigma_min", c.bifurcation.sigma_min);
        c.bifurcation.sigma_max = s.value("sigma_max", c.bifurcation.sigma_max);
        c.bifurcation.n_sigma = s.value("n_sigma", c.bifurcation.n_sigma);
        c.bifurcation.root_grid = s.value("root_grid", c.bifurcation.root_grid);
        c.bifurcation.pad = s.value("pad", c.bifurcation.pad);
        c.bifurcation.center = s.value("center", c.bifurcation.center);
    }
    c.validate();
    return c;
}

json PipelineConfig::to_json() const {
    return json{
        {"seed", seed},
        {"out_dir", out_dir},
        {"sim",
         {{"n_agents", sim.n_agents},
          {"dt", sim.dt},
          {"t_final", sim.t_final},
          {"snapshot_stride", sim.snapshot_stride},
          {"explosion_bound", sim.explosion_bound},
          {"sigma_min", sim.sigma_min},
          {"sigma_max", sim.sigma_max},
          {"n_sigma", sim.n_sigma},
          {"trajectories_per_sigma", sim.trajectories_per_sigma},
          {"holdout_sigmas", sim.holdout_sigmas},
          {"holdout_trajectories", sim.holdout_trajectories},
          {"format", sim.format}}},
        {"featurize",
         {{"bins", featurize.bins},
          {"range_lo", featurize.range_lo},
          {"range_hi", featurize.range_hi}}},
        {"embed",
         {{"t_cut", embed.t_cut},
          {"c_hist", embed.c_hist},
          {"c_moments", embed.c_moments},
          {"n_pairs", embed.n_pairs},
          {"subsample_hist", embed.subsample_hist},
          {"subsample_moments", embed.subsample_moments},
          {"bandwidth_factor", embed.bandwidth_factor},
          {"subsample_seed", embed.subsample_seed},
          {"lambda_scale", embed.lambda_scale}}},
        {"ynet",
         {{"epochs", ynet.epochs},
          {"batch_size", ynet.batch_size},
          {"lr", ynet.lr},
          {"alpha", ynet.alpha}}},
        {"ode",
         {{"epochs", ode.epochs}, {"batch_size", ode.batch_size}, {"lr", ode.lr}}},
        {"bifurcation",
         {{"sigma_min", bifurcation.sigma_min},
          {"sigma_max", bifurcation.sigma_max},
          {"n_sigma", bifurcation.n_sigma},
          {"root_grid", bifurcation.root_grid},
          {"pad", bifurcation.pad},
          {"center", bifurcation.center}}}};
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    return from_json(io::read_json_file(path));
}

std::string PipelineConfig::schema_text() {
    return R"(Configuration file schema (json). All fields optional; defaults shown.
{
  "seed": 7,                  // global seed; every stage derives its streams from it
  "out_dir": "run",           // output directory; ABMPHASE_OUT_ROOT env var prefixes it
  "sim": {
    "n_agents": 2000,         // ensemble size N
    "dt": 0.005,              // integration step; t_final/dt must be an integer
    "t_final": 10.0,
    "snapshot_stride": 5,     // steps between stored snapshots (h = dt*stride)
    "explosion_bound": 1000.0,// |x| beyond this discards the trajectory
    "sigma_min": 0.5, "sigma_max": 2.2, "n_sigma": 9,
    "trajectories_per_sigma": 30,
    "holdout_sigmas": [1.11, 1.75, 2.25],  // test parameter values, excluded from training
    "holdout_trajectories": 24,
    "format": "bin"           // trajectory files: "bin" or "csv"
  },
  "featurize": { "bins": 40, "range_lo": -4.0, "range_hi": 4.0 },
  "embed": {
    "t_cut": 1.0,             // transient discarded before embedding
    "c_hist": 20.0,           // kernel scale multiplier, histogram mode
    "c_moments": 10.0,        // kernel scale multiplier, moment mode
    "n_pairs": 10,            // eigenpairs kept (plus the trivial one)
    "subsample_hist": 0,      // training rows kept; 0 = proportional default
    "subsample_moments": 0,
    "bandwidth_factor": 0.3333333333333333,  // local-linear-regression bandwidth
    "subsample_seed": 17,
    "lambda_scale": false     // emit lambda_k * psi_k instead of psi_k
  },
  "ynet": { "epochs": 500, "batch_size": 32, "lr": 0.001, "alpha": 10.0 },
  "ode":  { "epochs": 100, "batch_size": 32, "lr": 0.001 },
  "bifurcation": {
    "sigma_min": 0.5, "sigma_max": 2.2, "n_sigma": 86,  // diagram parameter grid
    "root_grid": 2001,        // root-scan resolution over the state range
    "pad": 0.1,               // state-range padding fraction
    "center": 0.0             // symmetrization center, whitened units
  }
}
)";
}

json RunManifest::to_json() const {
    json stages_j = json::array();
    for (const auto& [name, rec] : stages) {
        stages_j.push_back({{"name", name},
                            {"inputs", rec.inputs},
                            {"outputs", rec.outputs},
                            {"config_hash", rec.config_hash},
                            {"seconds", rec.seconds},
                            {"skipped", rec.skipped}});
    }
    return json{{"version", version}, {"config", config}, {"stages", stages_j}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.version = j.value("version", "");
    m.config = j.value("config", json::object());
    for (const auto& sj : j.at("stages")) {
        StageRecord rec;
        rec.inputs = sj.at("inputs").get<std::map<std::string, std::string>>();
        rec.outputs = sj.at("outputs").get<std::map<std::string, std::string>>();
        rec.config_hash = sj.at("config_hash").get<std::string>();
        rec.seconds = sj.value("seconds", 0.0);
        rec.skipped = sj.value("skipped", false);
        m.stages.emplace_back(sj.at("name").get<std::string>(), rec);
    }
    return m;
}

std::map<std::string, std::string> RunManifest::artifact_digests() const {
    std::map<std::string, std::string> all;
    for (const auto& [name, rec] : stages)
        for (const auto& [path, digest] : rec.outputs) all[path] = digest;
    return all;
}

const std::vector<std::string>& stage_order() {
    static const std::vector<std::string> order{"simulate",   "featurize", "embed",
                                                "lift",       "train-ynet", "build-pairs",
                                                "train-ode",  "bifurcate",  "plots"};
    return order;
}

std::vector<std::string> stage_outputs(const std::string& stage, const PipelineConfig& cfg) {
    std::vector<std::string> out;
    if (stage == "simulate") {
        for (int i = 0; i < cfg.sim.n_sigma; ++i)
            out.push_back(sigma_file(i, false, cfg.sim.format));
        for (std::size_t i = 0; i < cfg.sim.holdout_sigmas.size(); ++i)
            out.push_back(sigma_file(static_cast<int>(i), true, cfg.sim.format));
        out.push_back("sim_summary.json");
    } else if (stage == "featurize") {
        out = {"features_hist.csv", "features_moments.csv", "holdout_features_hist.csv",
               "featurize_summary.json"};
    } else if (stage == "embed") {
        out = {"embedding_hist.csv",    "embedding_hist_sidecar.json",
               "residuals_hist.csv",    "embedding_moments.csv",
               "embedding_moments_sidecar.json", "residuals_moments.csv"};
    } else if (stage == "lift") {
        out = {"lifted.csv", "lifted_holdout.csv"};
    } else if (stage == "train-ynet") {
        out = {"ynet_model.json", "ynet_history.csv", "ynet_eval.csv"};
    } else if (stage == "build-pairs") {
        out = {"pairs.csv", "latents_holdout.csv"};
    } else if (stage == "train-ode") {
        out = {"euler_model.json", "euler_history.csv"};
    } else if (stage == "bifurcate") {
        out = {"diagram.csv", "sigma_star.json", "diagram_raw.svg", "diagram_sym.svg"};
    } else if (stage == "plots") {
        out = {"plots/embedding_sigma.svg", "plots/embedding_m1.svg",
               "plots/moments_embedding_sigma.svg", "plots/residuals_hist.svg",
               "plots/residuals_moments.svg", "plots/latents_sigma.svg",
               "plots/latents_m1.svg", "plots/sigma_vs_nu1.svg",
               "plots/rollout_overlay.svg", "plots/diagram_raw.svg",
               "plots/diagram_sym.svg"};
    } else {
        throw std::invalid_argument("unknown stage: " + stage);
    }
    return out;
}

std::vector<std::string> stage_inputs(const std::string& stage, const PipelineConfig& cfg) {
    if (stage == "simulate") return {};
    if (stage == "featurize") {
        std::vector<std::string> in;
        for (int i = 0; i < cfg.sim.n_sigma; ++i)
            in.push_back(sigma_file(i, false, cfg.sim.format));
        for (std::size_t i = 0; i < cfg.sim.holdout_sigmas.size(); ++i)
            in.push_back(sigma_file(static_cast<int>(i), true, cfg.sim.format));
        return in;
    }
    if (stage == "embed") return {"features_hist.csv", "features_moments.csv"};
    if (stage == "lift")
        return {"embedding_hist_sidecar.json", "features_hist.csv",
                "holdout_features_hist.csv"};
    if (stage == "train-ynet") return {"embedding_hist.csv"};
    if (stage == "build-pairs") return {"lifted.csv", "lifted_holdout.csv", "ynet_model.json"};
    if (stage == "train-ode") return {"pairs.csv"};
    if (stage == "bifurcate") return {"euler_model.json"};
    if (stage == "plots")
        return {"embedding_hist.csv", "residuals_hist.csv",  "embedding_moments.csv",
                "residuals_moments.csv", "features_moments.csv", "ynet_eval.csv",
                "latents_holdout.csv",   "euler_model.json",     "diagram.csv"};
    throw std::invalid_argument("unknown stage: " + stage);
}

// ---------------------------------------------------------------- stages

void stage_simulate(const PipelineConfig& cfg) {
    const std::string out = cfg.resolved_out_dir();
    fs::create_directories(join(out, "trajectories"));
    const auto grid = cfg.sigma_grid();
    sim::SimConfig sc{cfg.sim.n_agents, cfg.sim.dt, cfg.sim.t_final, cfg.sim.snapshot_stride,
                      cfg.sim.explosion_bound, cfg.seed};
    const auto ic_grid = sim::IcGrid::default_grid();
    sim::ModelParams base;

    json summary{{"sigma_grid", grid},
                 {"holdout_sigmas", cfg.sim.holdout_sigmas},
                 {"discarded", json::object()},
                 {"h", sc.snapshot_spacing()}};

    auto write_set = [&](const std::vector<double>& sigmas, int n_traj, bool holdout,
                         std::uint64_t seed) {
        sim::SimConfig sc_set = sc;
        sc_set.seed = seed;
        const auto ds = sim::generate_dataset(sigmas, n_traj, ic_grid, base, sc_set);
        for (std::size_t i = 0; i < sigmas.size(); ++i) {
            std::vector<sim::Snapshot> snaps;
            for (const auto& s : ds.snapshots)
                if (s.sigma == sigmas[i]) snaps.push_back(s);
            io::TrajectoryFileHeader hdr;
            hdr.params = base;
            hdr.params.sigma = sigmas[i];
            hdr.cfg = sc_set;
            hdr.sigma = sigmas[i];
            // per-sigma discard count
            std::vector<bool> seen(static_cast<std::size_t>(n_traj), false);
            for (const auto& s : snaps) seen[static_cast<std::size_t>(s.trajectory_id)] = true;
            hdr.discarded = n_traj - static_cast<long>(std::count(seen.begin(), seen.end(), true));
            const std::string rel = sigma_file(static_cast<int>(i), holdout, cfg.sim.format);
            if (cfg.sim.format == "csv")
                io::write_trajectories_csv(join(out, rel), snaps, hdr);
            else
                io::write_trajectories_bin(join(out, rel), snaps, hdr);
            summary["discarded"][rel] = hdr.discarded;
        }
    };

    write_set(grid, cfg.sim.trajectories_per_sigma, false, cfg.seed);
    if (!cfg.sim.holdout_sigmas.empty())
        write_set(cfg.sim.holdout_sigmas, cfg.sim.holdout_trajectories, true,
                  cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    io::write_json_file(join(out, "sim_summary.json"), summary);
}

void stage_featurize(const PipelineConfig& cfg) {
    const std::string out = cfg.resolved_out_dir();
    long clipped_total = 0;

    auto featurize_files = [&](bool holdout, int count, const std::string& hist_path,
                               const std::string& moments_path) {
        features::FeatureMatrix hist, mom;
        bool first = true;
        for (int i = 0; i < count; ++i) {
            const auto tf = io::read_trajectories(join(out, sigma_file(i, holdout, cfg.sim.format)));
            for (const auto& s : tf.snapshots) {
                const auto h = features::histogram(s, cfg.featurize.bins, cfg.featurize.range_lo,
                                                   cfg.featurize.range_hi);
                clipped_total += h.clipped;
            }
            auto fh = features::build_feature_matrix(tf.snapshots, features::FeatureMode::histograms,
                                                     cfg.featurize.bins, cfg.featurize.range_lo,
                                                     cfg.featurize.range_hi);
            auto fm = features::build_feature_matrix(tf.snapshots, features::FeatureMode::moments);
            if (first) {
                hist = std::move(fh);
                mom = std::move(fm);
                first = false;
            } else {
                const auto old_n = hist.rows.rows();
                hist.rows.conservativeResize(old_n + fh.rows.rows(), Eigen::NoChange);
                hist.rows.bottomRows(fh.rows.rows()) = fh.rows;
                hist.meta.insert(hist.meta.end(), fh.meta.begin(), fh.meta.end());
                mom.rows.conservativeResize(old_n + fm.rows.rows(), Eigen::NoChange);
                mom.rows.bottomRows(fm.rows.rows()) = fm.rows;
                mom.meta.insert(mom.meta.end(), fm.meta.begin(), fm.meta.end());
            }
        }
        io::write_feature_csv(join(out, hist_path), hist);
        if (!moments_path.empty()) io::write_feature_csv(join(out, moments_path), mom);
    };

    featurize_files(false, cfg.sim.n_sigma, "features_hist.csv", "features_moments.csv");
    featurize_files(true, static_cast<int>(cfg.sim.holdout_sigmas.size()),
                    "holdout_features_hist.csv", "");
    io::write_json_file(join(out, "featurize_summary.json"),
                        json{{"clipped_agents_total", clipped_total}});
}

namespace {

features::FeatureMatrix filter_tcut(const features::FeatureMatrix& fm, double t_cut) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < fm.size(); ++i)
        if (fm.meta[i].time >= t_cut) keep.push_back(i);
    if (keep.empty()) throw std::runtime_error("t_cut removed every feature row");
    return features::take_rows(fm, keep);
}

int auto_target(int configured, std::size_t rows, double full_scale_target) {
    if (configured > 0) return configured;
    const double frac = full_scale_target / 648000.0;
    const int t = static_cast<int>(std::lround(frac * static_cast<double>(rows)));
    return std::min<int>(static_cast<int>(full_scale_target),
                         std::max(200, t));
}

void embed_one(const PipelineConfig& cfg, const features::FeatureMatrix& full, double c,
               int target, const std::string& csv, const std::string& sidecar,
               const std::string& residuals) {
    const std::string out = cfg.resolved_out_dir();
    const auto cut = filter_tcut(full, cfg.embed.t_cut);
    const auto idx = features::subsample(cut, static_cast<std::size_t>(target),
                                         cfg.embed.subsample_seed);
    const auto train = features::take_rows(cut, idx);
    dmaps::KernelConfig kc;
    kc.c = c;
    auto emb = dmaps::fit_embedding(train, kc, cfg.embed.n_pairs);
    io::save_embedding_sidecar(join(out, sidecar), emb);
    if (cfg.embed.lambda_scale)
        for (int k = 1; k <= emb.n_coords(); ++k)
            emb.eigenvectors.col(k) *= emb.eigenvalues(k);
    io::write_embedding_csv(join(out, csv), emb);
    const auto rep = dmaps::local_linear_residuals(emb, cfg.embed.bandwidth_factor);
    io::Table rt;
    rt.columns = {"k", "r"};
    rt.data.resize(static_cast<Eigen::Index>(rep.r.size()), 2);
    for (std::size_t k = 0; k < rep.r.size(); ++k) {
        rt.data(static_cast<Eigen::Index>(k), 0) = static_cast<double>(k + 1);
        rt.data(static_cast<Eigen::Index>(k), 1) = rep.r[k];
    }
    io::write_table(join(out, residuals), rt);
}

}  // namespace

void stage_embed_mode(const PipelineConfig& cfg, const std::string& mode) {
    const std::string out = cfg.resolved_out_dir();
    if (mode == "hist" || mode == "both") {
        const auto hist = io::read_feature_csv(join(out, "features_hist.csv"));
        const auto cut_rows = filter_tcut(hist, cfg.embed.t_cut).size();
        embed_one(cfg, hist, cfg.embed.c_hist,
                  auto_target(cfg.embed.subsample_hist, cut_rows, 19000.0),
                  "embedding_hist.csv", "embedding_hist_sidecar.json", "residuals_hist.csv");
    }
    if (mode == "moments" || mode == "both") {
        const auto mom = io::read_feature_csv(join(out, "features_moments.csv"));
        const auto cut_rows = filter_tcut(mom, cfg.embed.t_cut).size();
        embed_one(cfg, mom, cfg.embed.c_moments,
                  auto_target(cfg.embed.subsample_moments, cut_rows, 11000.0),
                  "embedding_moments.csv", "embedding_moments_sidecar.json",
                  "residuals_moments.csv");
    }
}

void stage_embed(const PipelineConfig& cfg) { stage_embed_mode(cfg, "both"); }

namespace {

void lift_file(const dmaps::DiffusionEmbedding& emb, const std::string& in_csv,
               const std::string& out_csv, double t_cut, bool lambda_scale) {
    // the extension is only trustworthy near the training cloud, so the
    // same transient cut is applied before lifting
    const auto fm = filter_tcut(io::read_feature_csv(in_csv), t_cut);
    Eigen::MatrixXd coords = dmaps::nystrom_extend(emb, fm.rows, 2);
    if (lambda_scale)
        for (int k = 1; k <= 2; ++k) coords.col(k - 1) *= emb.eigenvalues(k);
    io::Table t;
    t.columns = {"sigma", "trajectory_id", "time", "psi1", "psi2"};
    t.data.resize(coords.rows(), 5);
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        const auto& m = fm.meta[static_cast<std::size_t>(i)];
        t.data(i, 0) = m.sigma;
        t.data(i, 1) = m.trajectory_id;
        t.data(i, 2) = m.time;
        t.data(i, 3) = coords(i, 0);
        t.data(i, 4) = coords(i, 1);
    }
    io::write_table(out_csv, t);
}

}  // namespace

void stage_lift(const PipelineConfig& cfg) {
    const std::string out = cfg.resolved_out_dir();
    const auto emb = io::load_embedding_sidecar(join(out, "embedding_hist_sidecar.json"));
    lift_file(emb, join(out, "features_hist.csv"), join(out, "lifted.csv"), cfg.embed.t_cut,
              cfg.embed.lambda_scale);
    lift_file(emb, join(out, "holdout_features_hist.csv"), join(out, "lifted_holdout.csv"),
              cfg.embed.t_cut, cfg.embed.lambda_scale);
}

void stage_train_ynet(const PipelineConfig& cfg) {
    const std::string out = cfg.resolved_out_dir();
    const io::Table t = io::read_table(join(out, "embedding_hist.csv"));
    const Eigen::Index n = t.data.rows();
    Eigen::MatrixXd psi(n, 2);
    psi.col(0) = t.data.col(t.col("psi1"));
    psi.col(1) = t.data.col(t.col("psi2"));
    const Eigen::VectorXd sigma = t.data.col(t.col("sigma"));

    cae::YNetHyper hy;
    hy.epochs = cfg.ynet.epochs;
    hy.batch_size = cfg.ynet.batch_size;
    hy.lr = cfg.ynet.lr;
    hy.alpha = cfg.ynet.alpha;
    hy.seed = cfg.seed;
    const auto res = cae::train_ynet(psi, sigma, hy);
    if (res.diverged) throw std::runtime_error("train-ynet: training diverged (NaN loss)");

    json meta{{"epochs", cfg.ynet.epochs},
              {"alpha", cfg.ynet.alpha},
              {"final_val_recon", res.history.back().val_recon},
              {"final_val_conf", res.history.back().val_conf},
              {"final_val_est", res.history.back().val_est},
              {"n_train", res.splits.train.size()},
              {"n_val", res.splits.val.size()},
              {"n_test", res.splits.test.size()}};
    io::save_ynet(join(out, "ynet_model.json"), res.model, meta);

    io::Table hist;
    hist.columns = {"epoch",    "train_recon", "train_conf", "train_est",
                    "val_recon", "val_conf",    "val_est"};
    hist.data.resize(static_cast<Eigen::Index>(res.history.size()), 7);
    for (std::size_t e = 0; e < res.history.size(); ++e) {
        const auto& h = res.history[e];
        hist.data.row(static_cast<Eigen::Index>(e)) << static_cast<double>(e), h.train_recon,
            h.train_conf, h.train_est, h.val_recon, h.val_conf, h.val_est;
    }
    io::write_table(join(out, "ynet_history.csv"), hist);

    // per-row evaluation with split labels
    const auto ev = cae::ynet_forward(res.model, psi.transpose());
    std::vector<int> split(static_cast<std::size_t>(n), 0);
    for (const auto i : res.splits.val) split[i] = 1;
    for (const auto i : res.splits.test) split[i] = 2;
    io::Table evt;
    evt.columns = {"sigma", "trajectory_id", "time",  "psi1",     "psi2", "nu1",
                   "nu2",   "psi1_hat",      "psi2_hat", "sigma_hat", "split"};
    evt.data.resize(n, 11);
    for (Eigen::Index i = 0; i < n; ++i) {
        evt.data(i, 0) = t.data(i, t.col("sigma"));
        evt.data(i, 1) = t.data(i, t.col("trajectory_id"));
        evt.data(i, 2) = t.data(i, t.col("time"));
        evt.data(i, 3) = psi(i, 0);
        evt.data(i, 4) = psi(i, 1);
        evt.data(i, 5) = ev.latent(0, i);
        evt.data(i, 6) = ev.latent(1, i);
        evt.data(i, 7) = ev.recon(0, i);
        evt.data(i, 8) = ev.recon(1, i);
        evt.data(i, 9) = ev.sigma_hat(i);
        evt.data(i, 10) = split[static_cast<std::size_t>(i)];
    }
    io::write_table(join(out, "ynet_eval.csv"), evt);
}

namespace {

std::vector<odenet::LatentTrajectory> group_latents(const io::Table& t,
                                                    const Eigen::VectorXd& nu2) {
    // rows arrive trajectory-contiguous and time-ordered; group on
    // (sigma, trajectory_id) changes
    std::vector<odenet::LatentTrajectory> trajs;
    const Eigen::Index n = t.data.rows();
    const auto sig_c = t.col("sigma");
    const auto id_c = t.col("trajectory_id");
    const auto time_c = t.col("time");
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = t.data(i, sig_c);
        const int id = static_cast<int>(t.data(i, id_c));
        if (trajs.empty() || trajs.back().sigma != s || trajs.back().trajectory_id != id) {
            odenet::LatentTrajectory lt;
            lt.sigma = s;
            lt.trajectory_id = id;
            lt.t0 = t.data(i, time_c);
            trajs.push_back(std::move(lt));
        }
        trajs.back().nu2.push_back(nu2(i));
    }
    return trajs;
}

Eigen::VectorXd encode_nu2(const cae::YNetModel& model, const io::Table& t) {
    const Eigen::Index n = t.data.rows();
    Eigen::MatrixXd psi(2, n);
    psi.row(0) = t.data.col(t.col("psi1")).transpose();
    psi.row(1) = t.data.col(t.col("psi2")).transpose();
    const Eigen::MatrixXd latent =
        nn::forward(model.encoder, model.input_scaler.apply(psi));
    return latent.row(1).transpose();
}

}  // namespace

void stage_build_pairs(const PipelineConfig& cfg) {
    const std::string out = cfg.resolved_out_dir();
    const auto model = io::load_ynet(join(out, "ynet_model.json"));
    const double h = cfg.sim.dt * cfg.sim.snapshot_stride;

    {
        const io::Table t = io::read_table(join(out, "lifted.csv"));
        const Eigen::VectorXd nu2 = encode_nu2(model, t);
        const auto trajs = group_latents(t, nu2);
        const auto pairs = odenet::build_pairs(trajs, h);
        io::Table pt;
        pt.comments.push_back("h=" + io::format_double(h));
        pt.columns = {"nu2_t", "nu2_th", "sigma"};
        pt.data.resize(pairs.size(), 3);
        pt.data.col(0) = pairs.nu_t;
        pt.data.col(1) = pairs.nu_th;
        pt.data.col(2) = pairs.sigma;
        io::write_table(join(out, "pairs.csv"), pt);
    }
    {
        const io::Table t = io::read_table(join(out, "lifted_holdout.csv"));
        const Eigen::VectorXd nu2 = encode_nu2(model, t);
        io::Table lt;
        lt.columns = {"sigma", "trajectory_id", "time", "nu2"};
        lt.data.resize(t.data.rows(), 4);
        lt.data.col(0) = t.data.col(t.col("sigma"));
        lt.data.col(1) = t.data.col(t.col("trajectory_id"));
        lt.data.col(2) = t.data.col(t.col("time"));
        lt.data.col(3) = nu2;
        io::write_table(join(out, "latents_holdout.csv"), lt);
    }
}

void stage_train_ode(const PipelineConfig& cfg) {
    const std::string out = cfg.resolved_out_dir();
    const io::Table t = io::read_table(join(out, "pairs.csv"));
    odenet::SnapshotPairDataset ds;
    ds.nu_t = t.data.col(t.col("nu2_t"));
    ds.nu_th = t.data.col(t.col("nu2_th"));
    ds.sigma = t.data.col(t.col("sigma"));
    ds.h = cfg.sim.dt * cfg.sim.snapshot_stride;
    for (const auto& c : t.comments)
        if (c.rfind("h=", 0) == 0) ds.h = std::strtod(c.c_str() + 2, nullptr);

    odenet::EulerNetHyper hy;
    hy.epochs = cfg.ode.epochs;
    hy.batch_size = cfg.ode.batch_size;
    hy.lr = cfg.ode.lr;
    hy.seed = cfg.seed;
    const auto res = odenet::train_euler_net(ds, hy);
    if (res.diverged) throw std::runtime_error("train-ode: training diverged (NaN loss)");

    const double test_mse = odenet::one_step_mse(res.model, ds, res.splits.test);
    json meta{{"epochs", cfg.ode.epochs},
              {"test_one_step_mse_whitened", test_mse},
              {"n_train", res.splits.train.size()},
              {"n_val", res.splits.val.size()},
              {"n_test", res.splits.test.size()}};
    io::save_euler_net(join(out, "euler_model.json"), res.model, meta);

    io::Table hist;
    hist.columns = {"epoch", "train_mse", "val_mse"};
    hist.data.resize(static_cast<Eigen::Index>(res.history.size()), 3);
    for (std::size_t e = 0; e < res.history.size(); ++e)
        hist.data.row(static_cast<Eigen::Index>(e)) << static_cast<double>(e),
            res.history[e].train_mse, res.history[e].val_mse;
    io::write_table(join(out, "euler_history.csv"), hist);
}

void stage_bifurcate(const PipelineConfig& cfg) {
    const std::string out = cfg.resolved_out_dir();
    const auto model = io::load_euler_net(join(out, "euler_model.json"));

    const double z_lo = model.state_scaler.apply1(model.train_nu2_min);
    const double z_hi = model.state_scaler.apply1(model.train_nu2_max);
    const double pad = cfg.bifurcation.pad * (z_hi - z_lo);
    const double lo = z_lo - pad, hi = z_hi + pad;
    const auto grid = sim::equidistant_grid(cfg.bifurcation.sigma_min,
                                            cfg.bifurcation.sigma_max, cfg.bifurcation.n_sigma);

    const auto raw = bifurcation::raw_field(model);
    const auto sym = bifurcation::symmetrize(model, cfg.bifurcation.center);
    const auto d_raw = bifurcation::build_diagram(raw, grid, lo, hi, cfg.bifurcation.root_grid,
                                                  bifurcation::DiagramVariant::raw);
    const auto d_sym = bifurcation::build_diagram(
        [&sym](double x, double s) { return sym(x, s); }, grid, lo, hi,
        cfg.bifurcation.root_grid, bifurcation::DiagramVariant::symmetrized);

    io::Table t;
    t.columns = {"sigma", "nu2_whitened", "nu2", "stable", "variant"};
    std::vector<std::array<double, 5>> rows;
    auto collect = [&](const bifurcation::BifurcationDiagram& d, double variant) {
        for (const auto& slice : d.slices)
            for (const auto& r : slice.roots)
                rows.push_back({slice.sigma, r.nu2, model.state_scaler.invert1(r.nu2),
                                r.stable ? 1.0 : 0.0, variant});
    };
    collect(d_raw, 0.0);
    collect(d_sym, 1.0);
    t.data.resize(static_cast<Eigen::Index>(rows.size()), 5);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < 5; ++j)
            t.data(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    io::write_table(join(out, "diagram.csv"), t);

    const double mid_sigma = 0.5 * (cfg.bifurcation.sigma_min + cfg.bifurcation.sigma_max);
    json sj{{"sigma_star",
             d_sym.sigma_star ? json(*d_sym.sigma_star) : json(nullptr)},
            {"sigma_star_raw", d_raw.sigma_star ? json(*d_raw.sigma_star) : json(nullptr)},
            {"variant", "symmetrized"},
            {"asymmetry_before_symmetrization",
             bifurcation::asymmetry_diagnostic(raw, mid_sigma, lo, hi)},
            {"center", cfg.bifurcation.center}};
    io::write_json_file(join(out, "sigma_star.json"), sj);

    auto diagram_figure = [&](const bifurcation::BifurcationDiagram& d, const std::string& name,
                              const std::string& path) {
        svg::Figure fig;
        fig.title = name;
        fig.x_label = "sigma";
        fig.y_label = "nu2 (whitened)";
        svg::Series stable, unstable;
        stable.fixed_color = "#1f77b4";
        unstable.fixed_color = "#d62728";
        stable.label = "stable";
        unstable.label = "unstable";
        for (const auto& slice : d.slices)
            for (const auto& r : slice.roots) {
                auto& s = r.stable ? stable : unstable;
                s.x.push_back(slice.sigma);
                s.y.push_back(r.nu2);
            }
        fig.series = {stable, unstable};
        svg::write_figure(path, fig);
    };
    diagram_figure(d_raw, "steady states of the identified field", join(out, "diagram_raw.svg"));
    diagram_figure(d_sym, "steady states after odd symmetrization", join(out, "diagram_sym.svg"));
}

std::vector<std::string> emit_plots(const std::string& out_dir) {
    std::vector<std::string> written;
    fs::create_directories(join(out_dir, "plots"));
    auto exists = [&](const std::string& rel) { return fs::exists(join(out_dir, rel)); };
    auto warn_skip = [&](const std::string& what, const std::string& missing) {
        std::cerr << "[plots] skipping " << what << ": missing " << missing << "\n";
    };

    // m1 lookup from the moment features
    std::map<std::string, double> m1;
    if (exists("features_moments.csv")) {
        const auto t = io::read_table(join(out_dir, "features_moments.csv"));
        const auto sc = t.col("sigma"), ic = t.col("trajectory_id"), tc = t.col("time"),
                   f0 = t.col("f0");
        for (Eigen::Index i = 0; i < t.data.rows(); ++i)
            m1[row_key(t.data(i, sc), static_cast<int>(t.data(i, ic)), t.data(i, tc))] =
                t.data(i, f0);
    }

    auto scatter = [&](const io::Table& t, const std::string& xc, const std::string& yc,
                       const std::vector<double>& color, const std::string& clabel,
                       const std::string& title, const std::string& rel) {
        svg::Figure fig;
        fig.title = title;
        fig.x_label = xc;
        fig.y_label = yc;
        svg::Series s;
        const auto xi = t.col(xc), yi = t.col(yc);
        for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
            s.x.push_back(t.data(i, xi));
            s.y.push_back(t.data(i, yi));
        }
        s.color = color;
        fig.colorbar_label = clabel;
        fig.series = {s};
        svg::write_figure(join(out_dir, rel), fig);
        written.push_back(rel);
    };

    auto color_from = [&](const io::Table& t, const std::string& col) {
        std::vector<double> c;
        const auto ci = t.col(col);
        for (Eigen::Index i = 0; i < t.data.rows(); ++i) c.push_back(t.data(i, ci));
        return c;
    };

    auto m1_color = [&](const io::Table& t) {
        std::vector<double> c;
        const auto sc = t.col("sigma"), ic = t.col("trajectory_id"), tc = t.col("time");
        for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
            const auto it =
                m1.find(row_key(t.data(i, sc), static_cast<int>(t.data(i, ic)), t.data(i, tc)));
            c.push_back(it == m1.end() ? 0.0 : it->second);
        }
        return c;
    };

    if (exists("embedding_hist.csv")) {
        const auto t = io::read_table(join(out_dir, "embedding_hist.csv"));
        scatter(t, "psi1", "psi2", color_from(t, "sigma"), "sigma",
                "histogram embedding colored by sigma", "plots/embedding_sigma.svg");
        scatter(t, "psi1", "psi2", m1_color(t), "M1", "histogram embedding colored by M1",
                "plots/embedding_m1.svg");
    } else {
        warn_skip("embedding plots", "embedding_hist.csv");
    }

    if (exists("embedding_moments.csv")) {
        const auto t = io::read_table(join(out_dir, "embedding_moments.csv"));
        scatter(t, "psi1", "psi2", color_from(t, "sigma"), "sigma",
                "moment embedding colored by sigma", "plots/moments_embedding_sigma.svg");
    } else {
        warn_skip("moment embedding plot", "embedding_moments.csv");
    }

    for (const auto& [in, rel, title] :
         {std::tuple{std::string("residuals_hist.csv"), std::string("plots/residuals_hist.svg"),
                     std::string("eigenvector residuals, histogram mode")},
          std::tuple{std::string("residuals_moments.csv"),
                     std::string("plots/residuals_moments.svg"),
                     std::string("eigenvector residuals, moment mode")}}) {
        if (!exists(in)) {
            warn_skip(rel, in);
            continue;
        }
        const auto t = io::read_table(join(out_dir, in));
        std::vector<std::string> labels;
        std::vector<double> values;
        for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
            labels.push_back("r" + std::to_string(static_cast<int>(t.data(i, 0))));
            values.push_back(t.data(i, 1));
        }
        svg::write_bars(join(out_dir, rel), title, labels, values);
        written.push_back(rel);
    }

    if (exists("ynet_eval.csv")) {
        const auto t = io::read_table(join(out_dir, "ynet_eval.csv"));
        scatter(t, "nu1", "nu2", color_from(t, "sigma"), "sigma", "latents colored by sigma",
                "plots/latents_sigma.svg");
        scatter(t, "nu1", "nu2", m1_color(t), "M1", "latents colored by M1",
                "plots/latents_m1.svg");
        scatter(t, "nu1", "sigma", {}, "", "parameter against first latent",
                "plots/sigma_vs_nu1.svg");
    } else {
        warn_skip("latent plots", "ynet_eval.csv");
    }

    if (exists("latents_holdout.csv") && exists("euler_model.json")) {
        const auto t = io::read_table(join(out_dir, "latents_holdout.csv"));
        const auto model = io::load_euler_net(join(out_dir, "euler_model.json"));
        const Eigen::VectorXd nu2 = t.data.col(t.col("nu2"));
        const auto trajs = group_latents(t, nu2);
        svg::Figure fig;
        fig.title = "held-out paths: embedded (grey) vs rolled out (red)";
        fig.x_label = "step";
        fig.y_label = "nu2";
        int plotted = 0;
        const double target_sigma = trajs.empty() ? 0.0 : trajs.front().sigma;
        for (const auto& tr : trajs) {
            if (tr.sigma != target_sigma || plotted >= 10) continue;
            svg::Series abm;
            abm.line = true;
            abm.fixed_color = "#999999";
            for (std::size_t k = 0; k < tr.nu2.size(); ++k) {
                abm.x.push_back(static_cast<double>(k));
                abm.y.push_back(tr.nu2[k]);
            }
            const auto ro = odenet::rollout(model, tr.nu2.front(), tr.sigma,
                                            static_cast<int>(tr.nu2.size()) - 1);
            svg::Series sim_s;
            sim_s.line = true;
            sim_s.fixed_color = "#d62728";
            for (std::size_t k = 0; k < ro.nu2.size(); ++k) {
                sim_s.x.push_back(static_cast<double>(k));
                sim_s.y.push_back(ro.nu2[k]);
            }
            fig.series.push_back(std::move(abm));
            fig.series.push_back(std::move(sim_s));
            ++plotted;
        }
        svg::write_figure(join(out_dir, "plots/rollout_overlay.svg"), fig);
        written.push_back("plots/rollout_overlay.svg");
    } else {
        warn_skip("rollout overlay", "latents_holdout.csv / euler_model.json");
    }

    if (exists("diagram.csv")) {
        const auto t = io::read_table(join(out_dir, "diagram.csv"));
        for (const double variant : {0.0, 1.0}) {
            svg::Figure fig;
            fig.title = variant == 0.0 ? "steady states of the identified field"
                                       : "steady states after odd symmetrization";
            fig.x_label = "sigma";
            fig.y_label = "nu2 (whitened)";
            svg::Series stable, unstable;
            stable.fixed_color = "#1f77b4";
            unstable.fixed_color = "#d62728";
            const auto sc = t.col("sigma"), nc = t.col("nu2_whitened"), st = t.col("stable"),
                       vc = t.col("variant");
            for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
                if (t.data(i, vc) != variant) continue;
                auto& s = t.data(i, st) > 0.5 ? stable : unstable;
                s.x.push_back(t.data(i, sc));
                s.y.push_back(t.data(i, nc));
            }
            fig.series = {stable, unstable};
            const std::string rel =
                variant == 0.0 ? "plots/diagram_raw.svg" : "plots/diagram_sym.svg";
            svg::write_figure(join(out_dir, rel), fig);
            written.push_back(rel);
        }
    } else {
        warn_skip("diagram plots", "diagram.csv");
    }
    return written;
}

namespace {

void run_stage_by_name(const std::string& name, const PipelineConfig& cfg) {
    if (name == "simulate") return stage_simulate(cfg);
    if (name == "featurize") return stage_featurize(cfg);
    if (name == "embed") return stage_embed(cfg);
    if (name == "lift") return stage_lift(cfg);
    if (name == "train-ynet") return stage_train_ynet(cfg);
    if (name == "build-pairs") return stage_build_pairs(cfg);
    if (name == "train-ode") return stage_train_ode(cfg);
    if (name == "bifurcate") return stage_bifurcate(cfg);
    if (name == "plots") {
        emit_plots(cfg.resolved_out_dir());
        return;
    }
    throw std::invalid_argument("unknown stage: " + name);
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    const std::string out = cfg.resolved_out_dir();
    fs::create_directories(out);

    RunManifest prev;
    bool have_prev = false;
    const std::string manifest_path = join(out, "manifest.json");
    if (fs::exists(manifest_path)) {
        try {
            prev = RunManifest::from_json(io::read_json_file(manifest_path));
            have_prev = true;
        } catch (const std::exception& e) {
            std::cerr << "[pipeline] ignoring unreadable manifest: " << e.what() << "\n";
        }
    }

    RunManifest cur;
    cur.version = kVersion;
    cur.config = cfg.to_json();
    std::map<std::string, std::string> produced;

    for (const auto& stage : stage_order()) {
        const auto inputs = stage_inputs(stage, cfg);
        const auto outputs = stage_outputs(stage, cfg);
        const std::string chash = Sha256::of_string(stage + std::string(kVersion) +
                                                    stage_config_json(stage, cfg).dump());

        const StageRecord* old = nullptr;
        if (have_prev)
            for (const auto& [n, r] : prev.stages)
                if (n == stage) old = &r;

        bool can_skip = old != nullptr && old->config_hash == chash;
        if (can_skip) {
            for (const auto& in : inputs) {
                const auto it = old->inputs.find(in);
                const auto cur_it = produced.find(in);
                if (it == old->inputs.end() || cur_it == produced.end() ||
                    it->second != cur_it->second) {
                    can_skip = false;
                    break;
                }
            }
        }
        if (can_skip) {
            for (const auto& o : outputs) {
                const auto it = old->outputs.find(o);
                if (it == old->outputs.end() || !fs::exists(join(out, o)) ||
                    Sha256::of_file(join(out, o)) != it->second) {
                    can_skip = false;
                    break;
                }
            }
        }

        StageRecord rec;
        rec.config_hash = chash;
        if (can_skip) {
            rec = *old;
            rec.skipped = true;
            std::cerr << "[pipeline] " << stage << ": up to date, skipped\n";
        } else {
            std::cerr << "[pipeline] " << stage << ": running\n";
            const auto t0 = std::chrono::steady_clock::now();
            run_stage_by_name(stage, cfg);
            rec.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            for (const auto& in : inputs) {
                const auto it = produced.find(in);
                rec.inputs[in] = it != produced.end() ? it->second
                                                      : Sha256::of_file(join(out, in));
            }
            for (const auto& o : outputs) {
                if (!fs::exists(join(out, o)))
                    throw std::runtime_error("stage " + stage + " did not produce " + o);
                rec.outputs[o] = Sha256::of_file(join(out, o));
            }
        }
        for (const auto& [path, digest] : rec.outputs) produced[path] = digest;
        cur.stages.emplace_back(stage, rec);
        io::write_json_file(manifest_path, cur.to_json());  // partial manifest on failure
    }
    return cur;
}

}  // namespace abmphase::pipeline
