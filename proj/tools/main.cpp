// Command-line front end for the phase-transition discovery pipeline.
//
// Subcommands mirror the pipeline stages (simulate, featurize, embed, lift,
// train-ynet, build-pairs, train-ode, bifurcate, plots) plus `pipeline` to
// run everything with digest-based resume and `rollout` to integrate the
// identified ODE.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "abmphase/io.hpp"
#include "abmphase/pipeline.hpp"

using namespace abmphase;

namespace {

pipeline::PipelineConfig load_config(const std::string& path, const std::string& out_override) {
    auto cfg = path.empty() ? pipeline::PipelineConfig{} : pipeline::PipelineConfig::load(path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"data-driven phase-transition discovery for interacting-agent ensembles"};
    app.set_version_flag("--version", pipeline::kVersion);

    bool print_schema = false;
    app.add_flag("--print-schema", print_schema, "print the config file schema and exit");

    std::string config_path, out_override;

    auto add_stage = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "pipeline config file (json)");
        sub->add_option("--out", out_override, "output directory override");
        return sub;
    };

    auto* c_sim = add_stage("simulate", "integrate the agent SDE across the parameter grid");
    auto* c_feat = add_stage("featurize", "histograms and moments for every stored snapshot");

    auto* c_embed = add_stage("embed", "diffusion-maps embedding of the feature matrices");
    std::string embed_mode = "both";
    double embed_c = 0.0;
    int embed_pairs = 0;
    c_embed->add_option("--mode", embed_mode, "hist | moments | both")
        ->check(CLI::IsMember({"hist", "moments", "both"}));
    c_embed->add_option("--c", embed_c, "kernel scale multiplier override");
    c_embed->add_option("--pairs", embed_pairs, "eigenpair count override");

    auto* c_lift = add_stage("lift", "out-of-sample extension of all snapshots");

    auto* c_ynet = add_stage("train-ynet", "train the conformal autoencoder");
    std::string ynet_embedding;
    int ynet_epochs = 0;
    double ynet_alpha = -1.0;
    std::uint64_t ynet_seed = 0;
    bool ynet_seed_set = false;
    c_ynet->add_option("--embedding", ynet_embedding, "embedding csv override");
    c_ynet->add_option("--epochs", ynet_epochs, "epoch count override");
    c_ynet->add_option("--alpha", ynet_alpha, "conformality weight override");
    c_ynet->add_option("--seed", ynet_seed, "seed override")
        ->each([&](const std::string&) { ynet_seed_set = true; });

    auto* c_pairs = add_stage("build-pairs", "snapshot pairs of the encoded latent");

    auto* c_ode = add_stage("train-ode", "train the Euler residual network");
    std::string ode_pairs;
    int ode_epochs = 0;
    std::uint64_t ode_seed = 0;
    bool ode_seed_set = false;
    c_ode->add_option("--pairs", ode_pairs, "pairs csv override");
    c_ode->add_option("--epochs", ode_epochs, "epoch count override");
    c_ode->add_option("--seed", ode_seed, "seed override")
        ->each([&](const std::string&) { ode_seed_set = true; });

    auto* c_roll = app.add_subcommand("rollout", "integrate the identified ODE");
    std::string roll_model, roll_out;
    double roll_sigma = 1.0, roll_ic = 0.0;
    int roll_steps = 400;
    c_roll->add_option("--model", roll_model, "euler-net model file")->required();
    c_roll->add_option("--sigma", roll_sigma, "parameter value")->required();
    c_roll->add_option("--ic", roll_ic, "initial nu2 (raw units)")->required();
    c_roll->add_option("--steps", roll_steps, "number of Euler steps");
    c_roll->add_option("--out", roll_out, "output csv")->required();

    auto* c_bif = add_stage("bifurcate", "steady states and critical point of the ODE");
    std::string bif_model;
    double bif_smin = 0.0, bif_smax = 0.0;
    int bif_grid = 0;
    c_bif->add_option("--model", bif_model, "euler-net model file override");
    c_bif->add_option("--sigma-min", bif_smin, "diagram sigma lower bound");
    c_bif->add_option("--sigma-max", bif_smax, "diagram sigma upper bound");
    c_bif->add_option("--grid", bif_grid, "diagram sigma grid size");

    auto* c_plots = add_stage("plots", "emit svg figures from existing artifacts");
    auto* c_pipe = add_stage("pipeline", "run all stages in order with resume");

    CLI11_PARSE(app, argc, argv);

    if (print_schema) {
        std::cout << pipeline::PipelineConfig::schema_text();
        return 0;
    }

    try {
        if (c_roll->parsed()) {
            const auto model = io::load_euler_net(roll_model);
            const auto path = odenet::rollout(model, roll_ic, roll_sigma, roll_steps);
            io::Table t;
            t.comments.push_back("sigma=" + io::format_double(roll_sigma));
            t.comments.push_back(std::string("truncated=") + (path.truncated ? "1" : "0"));
            t.columns = {"step", "time", "nu2"};
            t.data.resize(static_cast<Eigen::Index>(path.nu2.size()), 3);
            for (std::size_t k = 0; k < path.nu2.size(); ++k) {
                t.data(static_cast<Eigen::Index>(k), 0) = static_cast<double>(k);
                t.data(static_cast<Eigen::Index>(k), 1) = static_cast<double>(k) * model.h;
                t.data(static_cast<Eigen::Index>(k), 2) = path.nu2[k];
            }
            io::write_table(roll_out, t);
            if (path.truncated)
                std::cerr << "rollout left 10x the training range and was truncated\n";
            return 0;
        }

        auto cfg = load_config(config_path, out_override);

        if (c_embed->parsed() && embed_c > 0.0) {
            cfg.embed.c_hist = embed_c;
            cfg.embed.c_moments = embed_c;
        }
        if (c_embed->parsed() && embed_pairs > 0) cfg.embed.n_pairs = embed_pairs;
        if (c_ynet->parsed()) {
            if (ynet_epochs > 0) cfg.ynet.epochs = ynet_epochs;
            if (ynet_alpha >= 0.0) cfg.ynet.alpha = ynet_alpha;
            if (ynet_seed_set) cfg.seed = ynet_seed;
        }
        if (c_ode->parsed()) {
            if (ode_epochs > 0) cfg.ode.epochs = ode_epochs;
            if (ode_seed_set) cfg.seed = ode_seed;
        }
        if (c_bif->parsed()) {
            if (bif_smin > 0.0) cfg.bifurcation.sigma_min = bif_smin;
            if (bif_smax > 0.0) cfg.bifurcation.sigma_max = bif_smax;
            if (bif_grid > 1) cfg.bifurcation.n_sigma = bif_grid;
        }

        // targeted file overrides copy into the expected stage layout
        namespace fs = std::filesystem;
        const std::string out = cfg.resolved_out_dir();
        if (c_ynet->parsed() && !ynet_embedding.empty()) {
            fs::create_directories(out);
            fs::copy_file(ynet_embedding, fs::path(out) / "embedding_hist.csv",
                          fs::copy_options::overwrite_existing);
        }
        if (c_ode->parsed() && !ode_pairs.empty()) {
            fs::create_directories(out);
            fs::copy_file(ode_pairs, fs::path(out) / "pairs.csv",
                          fs::copy_options::overwrite_existing);
        }
        if (c_bif->parsed() && !bif_model.empty()) {
            fs::create_directories(out);
            fs::copy_file(bif_model, fs::path(out) / "euler_model.json",
                          fs::copy_options::overwrite_existing);
        }

        if (c_sim->parsed()) pipeline::stage_simulate(cfg);
        else if (c_feat->parsed()) pipeline::stage_featurize(cfg);
        else if (c_embed->parsed()) pipeline::stage_embed_mode(cfg, embed_mode);
        else if (c_lift->parsed()) pipeline::stage_lift(cfg);
        else if (c_ynet->parsed()) pipeline::stage_train_ynet(cfg);
        else if (c_pairs->parsed()) pipeline::stage_build_pairs(cfg);
        else if (c_ode->parsed()) pipeline::stage_train_ode(cfg);
        else if (c_bif->parsed()) pipeline::stage_bifurcate(cfg);
        else if (c_plots->parsed()) pipeline::emit_plots(cfg.resolved_out_dir());
        else if (c_pipe->parsed()) {
            const auto manifest = pipeline::run_pipeline(cfg);
            std::cout << "pipeline complete; " << manifest.stages.size()
                      << " stages, artifacts in " << out << "\n";
        } else {
            std::cout << app.help();
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
