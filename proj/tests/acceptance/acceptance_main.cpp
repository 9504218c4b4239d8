#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "abmphase/bifurcation.hpp"
#include "abmphase/cae.hpp"
#include "abmphase/odenet.hpp"
#include "abmphase/rng.hpp"
#include "abmphase/stats.hpp"
#include "acceptance_fixture.hpp"

using namespace acceptance;
using namespace abmphase;
namespace fs = std::filesystem;

namespace {

struct Slice {
    std::vector<double> roots;
    std::vector<bool> stable;
};

// variant: 0 = raw, 1 = symmetrized
std::map<double, Slice> diagram_slices(const io::Table& t, double variant) {
    std::map<double, Slice> slices;
    const auto sc = t.col("sigma"), nc = t.col("nu2_whitened"), st = t.col("stable"),
               vc = t.col("variant");
    for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
        if (t.data(i, vc) != variant) continue;
        auto& s = slices[t.data(i, sc)];
        s.roots.push_back(t.data(i, nc));
        s.stable.push_back(t.data(i, st) > 0.5);
    }
    for (auto& [sig, s] : slices) {
        std::vector<std::size_t> order(s.roots.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return s.roots[a] < s.roots[b]; });
        Slice sorted;
        for (const auto k : order) {
            sorted.roots.push_back(s.roots[k]);
            sorted.stable.push_back(s.stable[k]);
        }
        s = sorted;
    }
    return slices;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

TEST_CASE("criterion 1: critical point of the symmetrized diagram") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sj = desk_json("sigma_star.json");
    REQUIRE_FALSE(sj.at("sigma_star").is_null());
    const double sigma_star = sj.at("sigma_star").get<double>();
    const bool pass = sigma_star >= 1.65 && sigma_star <= 2.05;
    report(1, pass, "sigma* = " + fmt(sigma_star) + " (required within [1.65, 2.05])");
    CHECK(pass);
    // diagram-stage cost is recorded in the manifest; must stay under 2 min
    for (const auto& [name, rec] : desk().manifest.stages)
        if (name == "bifurcate" && !rec.skipped) CHECK(rec.seconds < 120.0);
    (void)t0;
}

TEST_CASE("criterion 2: symmetrized diagram topology") {
    const auto sj = desk_json("sigma_star.json");
    const double sigma_star = sj.at("sigma_star").get<double>();
    const auto slices = diagram_slices(desk_table("diagram.csv"), 1.0);
    bool pass = true;
    std::string why;
    for (const auto& [sigma, s] : slices) {
        if (sigma <= sigma_star - 0.1) {
            const int stable = static_cast<int>(std::count(s.stable.begin(), s.stable.end(), true));
            if (s.roots.size() != 3 || stable != 2) {
                pass = false;
                why = "sigma=" + fmt(sigma) + " has " + fmt(double(s.roots.size())) +
                      " roots / " + fmt(double(stable)) + " stable";
                break;
            }
        } else if (sigma >= sigma_star + 0.1) {
            if (s.roots.size() != 1 || !s.stable[0]) {
                pass = false;
                why = "sigma=" + fmt(sigma) + " has " + fmt(double(s.roots.size())) + " roots";
                break;
            }
        }
    }
    report(2, pass, pass ? "3 roots (2 stable, 1 unstable) below sigma*-0.1, 1 stable above"
                         : why);
    CHECK(pass);
}

TEST_CASE("criterion 3: raw diagram is a perturbed pitchfork") {
    const auto slices = diagram_slices(desk_table("diagram.csv"), 0.0);
    REQUIRE_FALSE(slices.empty());
    std::vector<double> sigmas;
    for (const auto& [s, _] : slices) sigmas.push_back(s);
    std::sort(sigmas.begin(), sigmas.end());

    const auto& last = slices.at(sigmas.back());
    bool pass = last.roots.size() == 1 && last.stable[0];
    std::string why = pass ? "" : "no unique stable root at sigma_max";

    // continue the surviving root backwards through every slice
    double track = pass ? last.roots[0] : 0.0;
    const double tol = 0.25;  // generous continuation window in whitened units
    if (pass) {
        for (auto it = sigmas.rbegin(); it != sigmas.rend(); ++it) {
            const auto& s = slices.at(*it);
            double best = 1e300;
            double best_root = 0.0;
            bool best_stable = false;
            for (std::size_t k = 0; k < s.roots.size(); ++k) {
                if (std::abs(s.roots[k] - track) < best) {
                    best = std::abs(s.roots[k] - track);
                    best_root = s.roots[k];
                    best_stable = s.stable[k];
                }
            }
            if (best > tol || !best_stable) {
                pass = false;
                why = "surviving branch lost at sigma=" + fmt(*it);
                break;
            }
            track = best_root;
        }
    }

    // the opposite pair exists at sigma_min and terminates strictly inside
    if (pass) {
        const auto& first = slices.at(sigmas.front());
        if (first.roots.size() != 3) {
            pass = false;
            why = "expected 3 roots at sigma_min, got " + fmt(double(first.roots.size()));
        }
    }
    if (pass) {
        double sigma_turn = -1.0;
        for (std::size_t i = 0; i + 1 < sigmas.size(); ++i) {
            if (slices.at(sigmas[i]).roots.size() >= 3 &&
                slices.at(sigmas[i + 1]).roots.size() == 1)
                sigma_turn = 0.5 * (sigmas[i] + sigmas[i + 1]);
        }
        if (sigma_turn <= sigmas.front() || sigma_turn >= sigmas.back()) {
            pass = false;
            why = "no interior turning point";
        } else {
            why = "turning point near sigma = " + fmt(sigma_turn);
        }
    }
    report(3, pass, pass ? "one branch persists, the opposite branch ends at a turning point (" +
                               why + ")"
                         : why);
    CHECK(pass);
}

TEST_CASE("criterion 4: single-sigma order parameter and harmonics") {
    const auto& ss = single_sigma();
    const double rho = stats::spearman_correlation(ss.psi1, ss.m1);
    bool pass = std::abs(rho) >= 0.98;
    std::string detail = "|spearman(psi1, M1)| = " + fmt(std::abs(rho));
    double worst_r = 0.0;
    for (int k = 2; k <= 9; ++k)
        worst_r = std::max(worst_r, ss.residuals[static_cast<std::size_t>(k - 1)]);
    pass = pass && worst_r < 0.5;
    detail += ", max r_k for k=2..9 is " + fmt(worst_r) + " (required < 0.5)";
    report(4, pass, detail);
    CHECK(std::abs(rho) >= 0.98);
    CHECK(worst_r < 0.5);
}

TEST_CASE("criterion 5: both multi-sigma modes select eigenvectors 1 and 2") {
    bool pass = true;
    std::string detail;
    for (const std::string rel : {"residuals_hist.csv", "residuals_moments.csv"}) {
        const auto t = desk_table(rel);
        std::vector<std::pair<double, int>> r;
        for (Eigen::Index i = 0; i < t.data.rows(); ++i)
            r.emplace_back(t.data(i, 1), static_cast<int>(t.data(i, 0)));
        std::sort(r.rbegin(), r.rend());
        std::set<int> top{r[0].second, r[1].second};
        const bool ok = top == std::set<int>{1, 2};
        pass = pass && ok;
        detail += rel.substr(10, 4) + " top2 = {" + fmt(r[0].second) + "," + fmt(r[1].second) +
                  "} ";
    }
    report(5, pass, detail);
    CHECK(pass);
}

TEST_CASE("criterion 6: disentanglement of parameter and state") {
    const auto t = desk_table("ynet_eval.csv");
    const auto model = io::load_ynet((fs::path(desk().dir) / "ynet_model.json").string());
    const auto sc = t.col("sigma"), n1 = t.col("nu1"), sp = t.col("split"),
               p1 = t.col("psi1"), p2 = t.col("psi2");
    std::vector<double> nu1, sigma;
    std::vector<Eigen::Index> test_rows;
    for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
        if (t.data(i, sp) != 2.0) continue;
        nu1.push_back(t.data(i, n1));
        sigma.push_back(t.data(i, sc));
        test_rows.push_back(i);
    }
    REQUIRE(test_rows.size() > 50);
    const double corr = stats::pearson_correlation(nu1, sigma);

    Eigen::MatrixXd psi(2, static_cast<Eigen::Index>(test_rows.size()));
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        psi(0, static_cast<Eigen::Index>(i)) = t.data(test_rows[i], p1);
        psi(1, static_cast<Eigen::Index>(i)) = t.data(test_rows[i], p2);
    }
    const double mean_cos = cae::mean_abs_cos_theta(model, psi);

    const bool pass = std::abs(corr) >= 0.95 && mean_cos <= 1e-2;
    report(6, pass,
           "|corr(nu1, sigma)| = " + fmt(std::abs(corr)) +
               " (>= 0.95), test mean |cos theta| = " + fmt(mean_cos) + " (<= 0.01)");
    CHECK(std::abs(corr) >= 0.95);
    CHECK(mean_cos <= 1e-2);
}

TEST_CASE("criterion 7: one-step error and held-out rollouts") {
    io::json meta;
    const auto model =
        io::load_euler_net((fs::path(desk().dir) / "euler_model.json").string(), &meta);
    const double test_mse = meta.value("test_one_step_mse_whitened", 1.0);
    bool pass = test_mse <= 1e-3;
    std::string detail = "one-step test MSE (whitened) = " + fmt(test_mse) + " (<= 1e-3)";

    const auto t = desk_table("latents_holdout.csv");
    const auto sc = t.col("sigma"), ic_ = t.col("trajectory_id"), nc = t.col("nu2");
    for (const double target : {1.11, 1.75}) {
        std::map<int, std::vector<double>> per_traj;
        for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
            if (std::abs(t.data(i, sc) - target) > 1e-9) continue;
            per_traj[static_cast<int>(t.data(i, ic_))].push_back(t.data(i, nc));
        }
        REQUIRE(per_traj.size() >= 10);
        std::vector<double> abm_end, roll_end;
        int branch_agree = 0;
        for (const auto& [id, nu2] : per_traj) {
            abm_end.push_back(nu2.back());
            const auto r =
                odenet::rollout(model, nu2.front(), target, static_cast<int>(nu2.size()) - 1);
            roll_end.push_back(r.nu2.back());
            if ((nu2.back() < 0.0) == (r.nu2.back() < 0.0)) ++branch_agree;
        }
        const double med_abm = stats::median(abm_end);
        const double med_roll = stats::median(roll_end);
        const double iqr = stats::interquartile_range(abm_end);
        const bool ok = std::abs(med_abm - med_roll) <= 0.1 * iqr;
        pass = pass && ok;
        detail += "; sigma=" + fmt(target) + ": |median diff| = " +
                  fmt(std::abs(med_abm - med_roll)) + " vs 0.1*IQR = " + fmt(0.1 * iqr) +
                  " (per-trajectory branch agreement " + fmt(branch_agree) + "/" +
                  fmt(double(per_traj.size())) + ")";
    }
    report(7, pass, detail);
    CHECK(pass);
}

TEST_CASE("criterion 8: property suites runnable without any trained model") {
    bool pass = true;

    // moment identities and reflection equivariance
    {
        RngStream rng(1);
        sim::Snapshot s;
        s.agents.resize(500);
        for (auto& x : s.agents) x = rng.normal(0.3, 1.2);
        sim::Snapshot sm = s;
        for (auto& x : sm.agents) x = -x;
        const auto m = features::moments(s);
        const auto mm = features::moments(sm);
        pass = pass && mm.m1 == -m.m1 && mm.m2 == m.m2 && mm.m3 == -m.m3 && mm.m4 == m.m4;
        pass = pass && m.m2 >= m.m1 * m.m1 && m.m4 >= m.m2 * m.m2;
    }

    // Markov row-stochasticity and eigen-residuals
    {
        Eigen::MatrixXd rows = Eigen::MatrixXd::Random(80, 5);
        features::FeatureMatrix fm;
        fm.rows = rows;
        fm.meta.resize(80);
        const auto emb = dmaps::fit_embedding(fm, dmaps::KernelConfig{0.0, 1.0}, 6);
        const auto K = dmaps::build_kernel(dmaps::pairwise_sq_dists(rows), emb.epsilon);
        const auto M = dmaps::markov_normalize(dmaps::density_normalize(K));
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            pass = pass && std::abs(M.row(i).sum() - 1.0) < 1e-12;
        for (int k = 0; k <= 6; ++k) {
            const Eigen::VectorXd psi = emb.eigenvectors.col(k);
            pass = pass && (M * psi - emb.eigenvalues(k) * psi).norm() <= 1e-8 * psi.norm();
        }
        // Nystrom node consistency
        const auto coords = dmaps::nystrom_extend(emb, rows, 2);
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            for (int k = 1; k <= 2; ++k)
                pass = pass && std::abs(coords(i, k - 1) - emb.eigenvectors(i, k)) < 1e-6;
    }

    // gradients and jacobians against finite differences
    {
        RngStream rng(2);
        for (int trial = 0; trial < 5 && pass; ++trial) {
            const std::vector<int> w{2, 5, 2};
            const std::vector<nn::Activation> acts{nn::Activation::tanh_act,
                                                   nn::Activation::linear};
            nn::Mlp m = nn::Mlp::create(w, acts, rng);
            const Eigen::MatrixXd X = Eigen::MatrixXd::Random(2, 3);
            const Eigen::MatrixXd T = Eigen::MatrixXd::Random(2, 3);
            nn::Grads g(m);
            const nn::Trace tr = nn::forward_trace(m, X);
            Eigen::MatrixXd dY;
            nn::mse_loss(tr.a.back(), T, &dY);
            nn::backward(m, tr, dY, g);
            for (auto& layer : m.layers) {
                for (Eigen::Index i = 0; i < layer.W.size() && pass; ++i) {
                    double* p = layer.W.data() + i;
                    const double keep = *p;
                    *p = keep + 1e-5;
                    const double up = nn::mse_loss(nn::forward(m, X), T);
                    *p = keep - 1e-5;
                    const double dn = nn::mse_loss(nn::forward(m, X), T);
                    *p = keep;
                    const double fd = (up - dn) / 2e-5;
                    const std::size_t li = static_cast<std::size_t>(&layer - m.layers.data());
                    pass = pass && std::abs(g.dW[li].data()[i] - fd) <= 1e-4 * (1.0 + std::abs(fd));
                }
            }
            // jacobian vs finite differences
            const Eigen::VectorXd x0 = X.col(0);
            const Eigen::MatrixXd J = nn::input_jacobian(m, x0);
            for (int j = 0; j < 2 && pass; ++j) {
                Eigen::VectorXd xp = x0, xm = x0;
                xp(j) += 1e-6;
                xm(j) -= 1e-6;
                const Eigen::MatrixXd up = nn::forward(m, xp), dn = nn::forward(m, xm);
                for (int i = 0; i < 2; ++i) {
                    const double fd = (up(i, 0) - dn(i, 0)) / 2e-6;
                    pass = pass && std::abs(J(i, j) - fd) <= 1e-4 * (1.0 + std::abs(fd));
                }
            }
        }
    }

    // symmetrizer oddness
    {
        RngStream rng(3);
        nn::Mlp net = nn::Mlp::create(
            std::vector<int>{1, 6, 1},
            std::vector<nn::Activation>{nn::Activation::tanh_act, nn::Activation::linear},
            rng);
        bifurcation::SymmetrizedField g{[&net](double x, double) {
                                            Eigen::MatrixXd in(1, 1);
                                            in << x;
                                            return nn::forward(net, in)(0, 0);
                                        },
                                        0.0};
        for (int i = 0; i <= 100; ++i) {
            const double u = -2.0 + 4.0 * i / 100.0;
            pass = pass && std::abs(g(u, 0.0) + g(-u, 0.0)) < 1e-12;
        }
    }

    // root finder exactness on the analytic normal form
    {
        bifurcation::Field g = [](double nu, double sigma) { return sigma * nu - nu * nu * nu; };
        const auto scan = bifurcation::find_roots(g, 1.0, -2.0, 2.0, 2001);
        pass = pass && scan.roots.size() == 3;
        if (scan.roots.size() == 3) {
            pass = pass && std::abs(scan.roots[0].nu2 + 1.0) < 1e-6 &&
                   std::abs(scan.roots[1].nu2) < 1e-6 && std::abs(scan.roots[2].nu2 - 1.0) < 1e-6;
        }
    }

    report(8, pass,
           "moment identities, Markov stochasticity, eigen residuals, Nystrom nodes, "
           "gradient/jacobian FD checks, symmetrizer oddness, normal-form roots");
    CHECK(pass);
}

TEST_CASE("criterion 9: end-to-end determinism of artifact digests") {
    auto mini = [](const std::string& dir, std::uint64_t seed) {
        pipeline::PipelineConfig c;
        c.seed = seed;
        c.out_dir = dir;
        c.sim.n_agents = 60;
        c.sim.t_final = 1.0;
        c.sim.n_sigma = 3;
        c.sim.trajectories_per_sigma = 5;
        c.sim.holdout_sigmas = {1.11};
        c.sim.holdout_trajectories = 3;
        c.embed.t_cut = 0.1;
        c.embed.subsample_hist = 120;
        c.embed.subsample_moments = 120;
        c.embed.n_pairs = 5;
        c.ynet.epochs = 10;
        c.ode.epochs = 10;
        c.bifurcation.n_sigma = 12;
        c.bifurcation.root_grid = 201;
        return c;
    };
    fs::remove_all("acceptance_work/det_a");
    fs::remove_all("acceptance_work/det_b");
    const auto ma = pipeline::run_pipeline(mini("acceptance_work/det_a", 21));
    const auto mb = pipeline::run_pipeline(mini("acceptance_work/det_b", 21));
    const bool pass = ma.artifact_digests() == mb.artifact_digests() &&
                      !ma.artifact_digests().empty();
    report(9, pass, "two runs with identical config/seed produce identical digests (" +
                        fmt(double(ma.artifact_digests().size())) + " artifacts)");
    CHECK(pass);
    fs::remove_all("acceptance_work/det_a");
    fs::remove_all("acceptance_work/det_b");
}

// ---- supplementary trained-model invariants (not acceptance criteria) ----

TEST_CASE("supplementary: autoencoder reconstruction and state correlation") {
    const auto t = desk_table("ynet_eval.csv");
    const auto model = io::load_ynet((fs::path(desk().dir) / "ynet_model.json").string());
    const auto sp = t.col("split"), p1 = t.col("psi1"), p2 = t.col("psi2"),
               n2 = t.col("nu2");

    std::vector<Eigen::Index> test_rows;
    for (Eigen::Index i = 0; i < t.data.rows(); ++i)
        if (t.data(i, sp) == 2.0) test_rows.push_back(i);

    Eigen::MatrixXd psi(2, static_cast<Eigen::Index>(test_rows.size()));
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        psi(0, static_cast<Eigen::Index>(i)) = t.data(test_rows[i], p1);
        psi(1, static_cast<Eigen::Index>(i)) = t.data(test_rows[i], p2);
    }
    const Eigen::MatrixXd scaled = model.input_scaler.apply(psi);
    const Eigen::MatrixXd recon =
        model.input_scaler.apply(cae::ynet_forward(model, psi).recon);
    const double mse = (scaled - recon).array().square().mean();
    CHECK(mse <= 1e-4);  // scaled units

    // nu2 tracks the order parameter on held-out rows
    const auto mom = desk_table("features_moments.csv");
    std::map<std::string, double> m1;
    const auto msc = mom.col("sigma"), mic = mom.col("trajectory_id"), mtc = mom.col("time"),
               mf = mom.col("f0");
    for (Eigen::Index i = 0; i < mom.data.rows(); ++i) {
        std::ostringstream key;
        key << io::format_double(mom.data(i, msc)) << "|"
            << static_cast<int>(mom.data(i, mic)) << "|"
            << io::format_double(mom.data(i, mtc));
        m1[key.str()] = mom.data(i, mf);
    }
    std::vector<double> nu2v, m1v;
    const auto sc = t.col("sigma"), ic_ = t.col("trajectory_id"), tc = t.col("time");
    for (const auto i : test_rows) {
        std::ostringstream key;
        key << io::format_double(t.data(i, sc)) << "|" << static_cast<int>(t.data(i, ic_))
            << "|" << io::format_double(t.data(i, tc));
        const auto it = m1.find(key.str());
        if (it == m1.end()) continue;
        nu2v.push_back(t.data(i, n2));
        m1v.push_back(it->second);
    }
    REQUIRE(nu2v.size() > 100);
    CHECK(std::abs(stats::spearman_correlation(nu2v, m1v)) >= 0.9);
}

TEST_CASE("supplementary: level sets of nu1 trace one-dimensional curves") {
    const auto t = desk_table("ynet_eval.csv");
    const auto sp = t.col("split"), p1c = t.col("psi1"), p2c = t.col("psi2"),
               n1c = t.col("nu1"), n2c = t.col("nu2");
    std::vector<double> nu1, nu2, psi1, psi2;
    for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
        if (t.data(i, sp) != 2.0) continue;
        nu1.push_back(t.data(i, n1c));
        nu2.push_back(t.data(i, n2c));
        psi1.push_back(t.data(i, p1c));
        psi2.push_back(t.data(i, p2c));
    }
    const int n_bins = 6;
    const double lo = *std::min_element(nu1.begin(), nu1.end());
    const double hi = *std::max_element(nu1.begin(), nu1.end());

    // within each nu1 bin, fit psi components linearly on nu2 windows and
    // accumulate residuals; compare against the spread across bins
    double within = 0.0;
    int within_n = 0;
    std::vector<double> bin_mean_psi1, bin_mean_psi2;
    for (int b = 0; b < n_bins; ++b) {
        const double b_lo = lo + (hi - lo) * b / n_bins;
        const double b_hi = lo + (hi - lo) * (b + 1) / n_bins;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < nu1.size(); ++i)
            if (nu1[i] >= b_lo && nu1[i] < b_hi) idx.push_back(i);
        if (idx.size() < 20) continue;
        for (const double* comp : {psi1.data(), psi2.data()}) {
            // quadratic fit of psi on nu2 inside the bin
            Eigen::MatrixXd X(static_cast<Eigen::Index>(idx.size()), 3);
            Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i) {
                X(static_cast<Eigen::Index>(i), 0) = 1.0;
                X(static_cast<Eigen::Index>(i), 1) = nu2[idx[i]];
                X(static_cast<Eigen::Index>(i), 2) = nu2[idx[i]] * nu2[idx[i]];
                y(static_cast<Eigen::Index>(i)) = comp[idx[i]];
            }
            const Eigen::VectorXd theta =
                (X.transpose() * X + 1e-12 * Eigen::MatrixXd::Identity(3, 3))
                    .ldlt()
                    .solve(X.transpose() * y);
            within += (y - X * theta).squaredNorm();
            within_n += static_cast<int>(idx.size());
        }
        double mp1 = 0.0, mp2 = 0.0;
        for (const auto i : idx) {
            mp1 += psi1[i];
            mp2 += psi2[i];
        }
        bin_mean_psi1.push_back(mp1 / static_cast<double>(idx.size()));
        bin_mean_psi2.push_back(mp2 / static_cast<double>(idx.size()));
    }
    REQUIRE(within_n > 0);
    REQUIRE(bin_mean_psi1.size() >= 3);
    const double within_rms = std::sqrt(within / within_n);
    const double spread = std::sqrt(stats::variance(bin_mean_psi1) +
                                    stats::variance(bin_mean_psi2));
    CHECK(within_rms < spread);
}

TEST_CASE("supplementary: histogram bin count does not change the story") {
    for (const int bins : {20, 80}) {
        const auto& ss = single_sigma(bins);
        CHECK(std::abs(stats::spearman_correlation(ss.psi1, ss.m1)) >= 0.95);
    }
}

TEST_CASE("supplementary: psi1 is monotone with M3 in the single-sigma run") {
    const auto& ss = single_sigma();
    CHECK(std::abs(stats::spearman_correlation(ss.psi1, ss.m3)) >= 0.95);
}
