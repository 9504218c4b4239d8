#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abmphase/bifurcation.hpp"
#include "abmphase/cae.hpp"
#include "abmphase/dmaps.hpp"
#include "abmphase/odenet.hpp"
#include "abmphase/sim.hpp"

namespace abmphase::pipeline {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

struct SimSection {
    int n_agents = 2000;
    double dt = 0.005;
    double t_final = 10.0;
    int snapshot_stride = 5;
    double explosion_bound = 1e3;
    double sigma_min = 0.5;
    double sigma_max = 2.2;
    int n_sigma = 9;
    int trajectories_per_sigma = 30;
    std::vector<double> holdout_sigmas{1.11, 1.75, 2.25};
    int holdout_trajectories = 24;
    std::string format = "bin";  // or "csv"
};

struct FeaturizeSection {
    int bins = 40;
    double range_lo = -4.0;
    double range_hi = 4.0;
};

struct EmbedSection {
    double t_cut = 1.0;
    double c_hist = 20.0;
    double c_moments = 10.0;
    int n_pairs = 10;
    // 0 means proportional to the row count (19000/648000 and 11000/648000
    // at full scale).
    int subsample_hist = 0;
    int subsample_moments = 0;
    double bandwidth_factor = 1.0 / 3.0;
    std::uint64_t subsample_seed = 17;
    // emit eigenvalue-scaled coordinates (lambda_k * psi_k) instead of raw
    // eigenvector entries
    bool lambda_scale = false;
};

struct YnetSection {
    int epochs = 500;
    int batch_size = 32;
    double lr = 1e-3;
    double alpha = 10.0;
};

struct OdeSection {
    int epochs = 100;
    int batch_size = 32;
    double lr = 1e-3;
};

struct BifurcationSection {
    double sigma_min = 0.5;
    double sigma_max = 2.2;
    int n_sigma = 86;
    int root_grid = 2001;
    double pad = 0.1;
    double center = 0.0;  // in whitened nu2 coordinates
};

struct PipelineConfig {
    std::uint64_t seed = 7;
    std::string out_dir = "run";
    SimSection sim;
    FeaturizeSection featurize;
    EmbedSection embed;
    YnetSection ynet;
    OdeSection ode;
    BifurcationSection bifurcation;

    void validate() const;
    std::vector<double> sigma_grid() const;
    // Applies the ABMPHASE_OUT_ROOT environment override.
    std::string resolved_out_dir() const;

    static PipelineConfig from_json(const json& j);
    json to_json() const;
    static PipelineConfig load(const std::string& path);
    static std::string schema_text();
};

struct StageRecord {
    std::map<std::string, std::string> inputs;   // path -> digest
    std::map<std::string, std::string> outputs;  // path -> digest
    std::string config_hash;
    double seconds = 0.0;
    bool skipped = false;
};

struct RunManifest {
    std::string version;
    json config;
    // stage name -> record, in execution order
    std::vector<std::pair<std::string, StageRecord>> stages;

    json to_json() const;
    static RunManifest from_json(const json& j);
    std::map<std::string, std::string> artifact_digests() const;
};

// Individual stages; paths are relative to the config's resolved out_dir.
// Every stage reads its inputs from disk so resumed and fresh runs take
// the same path.
void stage_simulate(const PipelineConfig& cfg);
void stage_featurize(const PipelineConfig& cfg);
void stage_embed(const PipelineConfig& cfg);
// mode: "hist", "moments" or "both"
void stage_embed_mode(const PipelineConfig& cfg, const std::string& mode);
void stage_lift(const PipelineConfig& cfg);
void stage_train_ynet(const PipelineConfig& cfg);
void stage_build_pairs(const PipelineConfig& cfg);
void stage_train_ode(const PipelineConfig& cfg);
void stage_bifurcate(const PipelineConfig& cfg);

// Plot emission from whatever artifacts exist; missing ones are skipped
// with a warning. Returns the files written.
std::vector<std::string> emit_plots(const std::string& out_dir);

// Runs all stages in order with digest-based resume; writes manifest.json.
RunManifest run_pipeline(const PipelineConfig& cfg);

// Names/paths of the artifacts each stage produces (relative to out_dir).
std::vector<std::string> stage_outputs(const std::string& stage, const PipelineConfig& cfg);
std::vector<std::string> stage_inputs(const std::string& stage, const PipelineConfig& cfg);
const std::vector<std::string>& stage_order();

}  // namespace abmphase::pipeline
