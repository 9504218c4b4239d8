// Python bindings for the core operations: SDE simulation, featurization,
// diffusion maps, the conformal autoencoder, the Euler residual network,
// bifurcation analysis and the staged pipeline.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "abmphase/bifurcation.hpp"
#include "abmphase/cae.hpp"
#include "abmphase/dmaps.hpp"
#include "abmphase/features.hpp"
#include "abmphase/io.hpp"
#include "abmphase/pearson.hpp"
#include "abmphase/pipeline.hpp"
#include "abmphase/sim.hpp"

namespace py = pybind11;
using namespace abmphase;

namespace {

sim::Snapshot make_snapshot(const Eigen::VectorXd& agents, double time, double sigma, int id) {
    sim::Snapshot s;
    s.agents.assign(agents.data(), agents.data() + agents.size());
    s.time = time;
    s.sigma = sigma;
    s.trajectory_id = id;
    return s;
}

}  // namespace

PYBIND11_MODULE(_abmphase, m) {
    m.doc() = "agent-based-model phase-transition discovery (C++ core)";
    m.attr("__version__") = pipeline::kVersion;

    // ---- simulation ----
    py::class_<sim::ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("sigma", &sim::ModelParams::sigma)
        .def_readwrite("theta", &sim::ModelParams::theta)
        .def_readwrite("alpha", &sim::ModelParams::alpha)
        .def_readwrite("nu", &sim::ModelParams::nu)
        .def_readwrite("sigma_m", &sim::ModelParams::sigma_m);

    py::class_<sim::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("n_agents", &sim::SimConfig::n_agents)
        .def_readwrite("dt", &sim::SimConfig::dt)
        .def_readwrite("t_final", &sim::SimConfig::t_final)
        .def_readwrite("snapshot_stride", &sim::SimConfig::snapshot_stride)
        .def_readwrite("explosion_bound", &sim::SimConfig::explosion_bound)
        .def_readwrite("seed", &sim::SimConfig::seed);

    m.def("drift", &sim::drift, py::arg("x"), py::arg("xbar"), py::arg("params"));
    m.def("diffusion_amplitude", &sim::diffusion_amplitude, py::arg("x"), py::arg("params"));

    m.def(
        "sample_pearson",
        [](double mean, double std, double skewness, double kurtosis, std::size_t n,
           std::uint64_t seed) {
            RngStream rng(seed);
            const auto v = sample_pearson({mean, std, skewness, kurtosis}, n, rng);
            return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                     static_cast<Eigen::Index>(v.size()))
                .eval();
        },
        py::arg("mean"), py::arg("std"), py::arg("skewness"), py::arg("kurtosis"),
        py::arg("n"), py::arg("seed") = 0);

    m.def(
        "simulate_trajectory",
        [](const Eigen::VectorXd& ic, const sim::ModelParams& p, const sim::SimConfig& cfg,
           int trajectory_id) {
            RngStream rng(cfg.seed, 0, static_cast<std::uint64_t>(trajectory_id));
            const auto res = sim::simulate_trajectory(
                std::span<const double>(ic.data(), static_cast<std::size_t>(ic.size())), p,
                cfg, rng, trajectory_id);
            Eigen::MatrixXd snaps(res.discarded ? 0 : res.snapshots.size(),
                                  res.discarded ? 0 : cfg.n_agents + 1);
            for (std::size_t i = 0; i < res.snapshots.size() && !res.discarded; ++i) {
                snaps(static_cast<Eigen::Index>(i), 0) = res.snapshots[i].time;
                for (int j = 0; j < cfg.n_agents; ++j)
                    snaps(static_cast<Eigen::Index>(i), j + 1) =
                        res.snapshots[i].agents[static_cast<std::size_t>(j)];
            }
            return py::make_tuple(!res.discarded, snaps);
        },
        "Returns (retained, matrix with time in column 0 and agents after).",
        py::arg("ic"), py::arg("params"), py::arg("config"), py::arg("trajectory_id") = 0);

    // ---- features ----
    m.def(
        "histogram",
        [](const Eigen::VectorXd& agents, int bins, double lo, double hi) {
            const auto h = features::histogram(make_snapshot(agents, 0, 0, 0), bins, lo, hi);
            return py::make_tuple(
                Eigen::Map<const Eigen::VectorXd>(h.density.data(),
                                                  static_cast<Eigen::Index>(h.density.size()))
                    .eval(),
                Eigen::Map<const Eigen::VectorXd>(h.edges.data(),
                                                  static_cast<Eigen::Index>(h.edges.size()))
                    .eval(),
                h.clipped);
        },
        py::arg("agents"), py::arg("bins") = 40, py::arg("lo") = -4.0, py::arg("hi") = 4.0);

    m.def("moments", [](const Eigen::VectorXd& agents) {
        const auto mv = features::moments(make_snapshot(agents, 0, 0, 0));
        return py::make_tuple(mv.m1, mv.m2, mv.m3, mv.m4);
    });

    // ---- diffusion maps ----
    py::class_<dmaps::DiffusionEmbedding>(m, "DiffusionEmbedding")
        .def_property_readonly("eigenvalues",
                               [](const dmaps::DiffusionEmbedding& e) { return e.eigenvalues; })
        .def_property_readonly("eigenvectors",
                               [](const dmaps::DiffusionEmbedding& e) { return e.eigenvectors; })
        .def_property_readonly("epsilon",
                               [](const dmaps::DiffusionEmbedding& e) { return e.epsilon; })
        .def("coordinate", &dmaps::DiffusionEmbedding::coordinate, py::arg("k"));

    m.def(
        "fit_embedding",
        [](const Eigen::MatrixXd& rows, double c, double epsilon, int n_pairs) {
            features::FeatureMatrix fm;
            fm.rows = rows;
            fm.meta.resize(static_cast<std::size_t>(rows.rows()));
            dmaps::KernelConfig kc;
            kc.c = c;
            kc.epsilon = epsilon;
            return dmaps::fit_embedding(fm, kc, n_pairs);
        },
        py::arg("rows"), py::arg("c") = 1.0, py::arg("epsilon") = 0.0, py::arg("n_pairs") = 10);

    m.def(
        "local_linear_residuals",
        [](const dmaps::DiffusionEmbedding& emb, double bandwidth_factor) {
            return dmaps::local_linear_residuals(emb, bandwidth_factor).r;
        },
        py::arg("embedding"), py::arg("bandwidth_factor") = 1.0 / 3.0);

    m.def("nystrom_extend", &dmaps::nystrom_extend, py::arg("embedding"), py::arg("new_rows"),
          py::arg("n_coords") = 2);

    // ---- conformal autoencoder ----
    py::class_<cae::YNetModel>(m, "YNetModel")
        .def("forward",
             [](const cae::YNetModel& model, const Eigen::MatrixXd& psi_rows) {
                 const auto ev = cae::ynet_forward(model, psi_rows.transpose());
                 return py::make_tuple(ev.latent.transpose().eval(),
                                       ev.recon.transpose().eval(), ev.sigma_hat);
             },
             "psi rows (n x 2) -> (latents n x 2, reconstruction n x 2, sigma_hat n)")
        .def("mean_abs_cos_theta", [](const cae::YNetModel& model,
                                      const Eigen::MatrixXd& psi_rows) {
            return cae::mean_abs_cos_theta(model, psi_rows.transpose());
        });

    m.def(
        "train_ynet",
        [](const Eigen::MatrixXd& psi_rows, const Eigen::VectorXd& sigma, int epochs,
           int batch_size, double lr, double alpha, std::uint64_t seed) {
            cae::YNetHyper h;
            h.epochs = epochs;
            h.batch_size = batch_size;
            h.lr = lr;
            h.alpha = alpha;
            h.seed = seed;
            auto res = cae::train_ynet(psi_rows, sigma, h);
            if (res.diverged) throw std::runtime_error("train_ynet diverged");
            return res.model;
        },
        py::arg("psi_rows"), py::arg("sigma"), py::arg("epochs") = 500,
        py::arg("batch_size") = 32, py::arg("lr") = 1e-3, py::arg("alpha") = 10.0,
        py::arg("seed") = 0);

    // ---- Euler residual network ----
    py::class_<odenet::EulerNetModel>(m, "EulerNetModel")
        .def_property_readonly("h", [](const odenet::EulerNetModel& e) { return e.h; })
        .def("predict", &odenet::euler_predict, py::arg("nu2"), py::arg("sigma"))
        .def(
            "rollout",
            [](const odenet::EulerNetModel& model, double nu2_0, double sigma, int steps) {
                const auto r = odenet::rollout(model, nu2_0, sigma, steps);
                return py::make_tuple(
                    Eigen::Map<const Eigen::VectorXd>(r.nu2.data(),
                                                      static_cast<Eigen::Index>(r.nu2.size()))
                        .eval(),
                    r.truncated);
            },
            py::arg("nu2_0"), py::arg("sigma"), py::arg("steps"));

    m.def(
        "train_euler_net",
        [](const Eigen::VectorXd& nu_t, const Eigen::VectorXd& nu_th,
           const Eigen::VectorXd& sigma, double h, int epochs, int batch_size, double lr,
           std::uint64_t seed) {
            odenet::SnapshotPairDataset ds;
            ds.nu_t = nu_t;
            ds.nu_th = nu_th;
            ds.sigma = sigma;
            ds.h = h;
            odenet::EulerNetHyper hy;
            hy.epochs = epochs;
            hy.batch_size = batch_size;
            hy.lr = lr;
            hy.seed = seed;
            auto res = odenet::train_euler_net(ds, hy);
            if (res.diverged) throw std::runtime_error("train_euler_net diverged");
            const double test_mse = odenet::one_step_mse(res.model, ds, res.splits.test);
            return py::make_tuple(res.model, test_mse);
        },
        py::arg("nu_t"), py::arg("nu_th"), py::arg("sigma"), py::arg("h"),
        py::arg("epochs") = 100, py::arg("batch_size") = 32, py::arg("lr") = 1e-3,
        py::arg("seed") = 0);

    // ---- bifurcation ----
    m.def(
        "bifurcation_diagram",
        [](const odenet::EulerNetModel& model, double sigma_min, double sigma_max, int n_sigma,
           int root_grid, double pad, double center, bool symmetrized) {
            const double z_lo = model.state_scaler.apply1(model.train_nu2_min);
            const double z_hi = model.state_scaler.apply1(model.train_nu2_max);
            const double p = pad * (z_hi - z_lo);
            const auto grid = sim::equidistant_grid(sigma_min, sigma_max, n_sigma);
            bifurcation::Field f = symmetrized
                                       ? bifurcation::Field(bifurcation::symmetrize(model, center))
                                       : bifurcation::raw_field(model);
            const auto d = bifurcation::build_diagram(
                f, grid, z_lo - p, z_hi + p, root_grid,
                symmetrized ? bifurcation::DiagramVariant::symmetrized
                            : bifurcation::DiagramVariant::raw);
            std::vector<std::tuple<double, double, bool>> rows;
            for (const auto& slice : d.slices)
                for (const auto& r : slice.roots) rows.emplace_back(slice.sigma, r.nu2, r.stable);
            return py::make_tuple(rows, d.sigma_star ? py::object(py::float_(*d.sigma_star))
                                                     : py::object(py::none()));
        },
        py::arg("model"), py::arg("sigma_min"), py::arg("sigma_max"), py::arg("n_sigma") = 86,
        py::arg("root_grid") = 2001, py::arg("pad") = 0.1, py::arg("center") = 0.0,
        py::arg("symmetrized") = true);

    // ---- model io and pipeline ----
    m.def("load_ynet", [](const std::string& path) { return io::load_ynet(path); });
    m.def("save_ynet",
          [](const std::string& path, const cae::YNetModel& model) { io::save_ynet(path, model); });
    m.def("load_euler_net",
          [](const std::string& path) { return io::load_euler_net(path); });
    m.def("save_euler_net", [](const std::string& path, const odenet::EulerNetModel& model) {
        io::save_euler_net(path, model);
    });

    m.def(
        "run_pipeline",
        [](const std::string& config_path) {
            const auto cfg = pipeline::PipelineConfig::load(config_path);
            const auto manifest = pipeline::run_pipeline(cfg);
            return manifest.artifact_digests();
        },
        "Run the staged pipeline from a json config; returns artifact digests.",
        py::arg("config_path"));

    m.def("config_schema", [] { return pipeline::PipelineConfig::schema_text(); });
}
