#include "abmphase/odenet.hpp"

#include <cmath>
#include <stdexcept>

#include "abmphase/rng.hpp"

namespace abmphase::odenet {

void SnapshotPairDataset::validate() const {
    if (nu_t.size() != nu_th.size() || nu_t.size() != sigma.size())
        throw std::invalid_argument("SnapshotPairDataset: length mismatch");
    if (!(h > 0.0)) throw std::invalid_argument("SnapshotPairDataset: h must be positive");
    if (!nu_t.allFinite() || !nu_th.allFinite() || !sigma.allFinite())
        throw std::invalid_argument("SnapshotPairDataset: non-finite values");
}

void EulerNetHyper::validate() const {
    if (batch_size < 1 || epochs < 1) throw std::invalid_argument("EulerNetHyper: bad sizes");
    if (!(lr > 0.0)) throw std::invalid_argument("EulerNetHyper: bad learning rate");
    if (!(train_frac > 0.0) || !(val_frac >= 0.0) || !(train_frac + val_frac < 1.0))
        throw std::invalid_argument("EulerNetHyper: split fractions must leave a test share");
}

SnapshotPairDataset build_pairs(const std::vector<LatentTrajectory>& trajs, double h) {
    std::size_t count = 0;
    for (const auto& t : trajs)
        if (t.nu2.size() >= 2) count += t.nu2.size() - 1;
    SnapshotPairDataset ds;
    ds.h = h;
    ds.nu_t.resize(static_cast<Eigen::Index>(count));
    ds.nu_th.resize(static_cast<Eigen::Index>(count));
    ds.sigma.resize(static_cast<Eigen::Index>(count));
    Eigen::Index k = 0;
    for (const auto& t : trajs) {
        for (std::size_t i = 0; i + 1 < t.nu2.size(); ++i) {
            ds.nu_t(k) = t.nu2[i];
            ds.nu_th(k) = t.nu2[i + 1];
            ds.sigma(k) = t.sigma;
            ++k;
        }
    }
    ds.validate();
    return ds;
}

double field_whitened(const EulerNetModel& m, double z, double sigma_w) {
    Eigen::MatrixXd x(2, 1);
    x(0, 0) = z;
    x(1, 0) = sigma_w;
    return nn::forward(m.net, x)(0, 0);
}

double euler_predict(const EulerNetModel& m, double nu2, double sigma) {
    const double z = m.state_scaler.apply1(nu2);
    const double sw = m.param_scaler.apply1(sigma);
    const double z_next = z + m.h * field_whitened(m, z, sw);
    return m.state_scaler.invert1(z_next);
}

EulerTrainResult train_euler_net(const SnapshotPairDataset& data, const EulerNetHyper& h) {
    data.validate();
    h.validate();
    const Eigen::Index n = data.size();
    if (n < 10) throw std::invalid_argument("train_euler_net: too few pairs");

    EulerTrainResult res;
    RngStream rng(h.seed, 0x0de0);

    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);
    const auto n_train = static_cast<std::size_t>(h.train_frac * static_cast<double>(n));
    const auto n_val = static_cast<std::size_t>(h.val_frac * static_cast<double>(n));
    res.splits.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
    res.splits.val.assign(order.begin() + static_cast<long>(n_train),
                          order.begin() + static_cast<long>(n_train + n_val));
    res.splits.test.assign(order.begin() + static_cast<long>(n_train + n_val), order.end());

    auto& model = res.model;
    model.h = data.h;

    // scalers fit on the training split only; the state scaler sees nu2(t)
    Eigen::MatrixXd train_state(1, static_cast<Eigen::Index>(n_train));
    Eigen::MatrixXd train_param(1, static_cast<Eigen::Index>(n_train));
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < n_train; ++i) {
        const double v = data.nu_t(static_cast<Eigen::Index>(res.splits.train[i]));
        train_state(0, static_cast<Eigen::Index>(i)) = v;
        train_param(0, static_cast<Eigen::Index>(i)) =
            data.sigma(static_cast<Eigen::Index>(res.splits.train[i]));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    model.state_scaler = nn::Scaler::fit(train_state, nn::Scaler::Mode::whiten);
    if (train_param.maxCoeff() > train_param.minCoeff()) {
        model.param_scaler = nn::Scaler::fit(train_param, nn::Scaler::Mode::whiten);
    } else {
        // single-parameter training: center only
        model.param_scaler = nn::Scaler::from_state(
            nn::Scaler::Mode::whiten, Eigen::VectorXd::Constant(1, train_param(0, 0)),
            Eigen::VectorXd::Ones(1));
    }
    model.train_nu2_min = lo;
    model.train_nu2_max = hi;

    // (nu2, sigma) -> f; 10 tanh units, then 10 linear units, linear head
    const std::vector<int> widths{2, 10, 10, 1};
    const std::vector<nn::Activation> acts{nn::Activation::tanh_act, nn::Activation::linear,
                                           nn::Activation::linear};
    model.net = nn::Mlp::create(widths, acts, rng);
    nn::AdamState st(model.net, h.lr);
    nn::Grads g(model.net);

    // whitened columns for the whole dataset
    Eigen::MatrixXd X(2, n), Zt(1, n), Zth(1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(0, i) = model.state_scaler.apply1(data.nu_t(i));
        X(1, i) = model.param_scaler.apply1(data.sigma(i));
        Zt(0, i) = X(0, i);
        Zth(0, i) = model.state_scaler.apply1(data.nu_th(i));
    }

    auto split_mse = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        double acc = 0.0;
        Eigen::MatrixXd xs(2, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            xs.col(static_cast<Eigen::Index>(i)) = X.col(static_cast<Eigen::Index>(idx[i]));
        const Eigen::MatrixXd f = nn::forward(model.net, xs);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto j = static_cast<Eigen::Index>(idx[i]);
            const double pred = Zt(0, j) + model.h * f(0, static_cast<Eigen::Index>(i));
            const double e = pred - Zth(0, j);
            acc += e * e;
        }
        return acc / static_cast<double>(idx.size());
    };

    std::vector<std::size_t> batch_order = res.splits.train;
    const auto B = static_cast<std::size_t>(h.batch_size);

    for (int epoch = 0; epoch < h.epochs; ++epoch) {
        shuffle(batch_order, rng);
        double ep_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < batch_order.size(); start += B) {
            const std::size_t len = std::min(B, batch_order.size() - start);
            Eigen::MatrixXd xb(2, static_cast<Eigen::Index>(len));
            Eigen::MatrixXd target(1, static_cast<Eigen::Index>(len));
            Eigen::MatrixXd zt(1, static_cast<Eigen::Index>(len));
            for (std::size_t i = 0; i < len; ++i) {
                const auto j = static_cast<Eigen::Index>(batch_order[start + i]);
                xb.col(static_cast<Eigen::Index>(i)) = X.col(j);
                zt(0, static_cast<Eigen::Index>(i)) = Zt(0, j);
                target(0, static_cast<Eigen::Index>(i)) = Zth(0, j);
            }
            const nn::Trace t = nn::forward_trace(model.net, xb);
            const Eigen::MatrixXd pred = zt + model.h * t.a.back();
            Eigen::MatrixXd d_pred;
            const double loss = nn::mse_loss(pred, target, &d_pred);
            g.zero();
            nn::backward(model.net, t, model.h * d_pred, g);
            nn::adam_step(model.net, g, st);
            ep_loss += loss;
            ++n_batches;
        }
        EulerEpoch rec;
        rec.train_mse = ep_loss / static_cast<double>(n_batches);
        rec.val_mse = split_mse(res.splits.val);
        res.history.push_back(rec);
        if (!std::isfinite(rec.train_mse)) {
            res.diverged = true;
            break;
        }
    }
    return res;
}

double one_step_mse(const EulerNetModel& m, const SnapshotPairDataset& data,
                    const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw std::invalid_argument("one_step_mse: empty index set");
    double acc = 0.0;
    for (const std::size_t i : idx) {
        const auto j = static_cast<Eigen::Index>(i);
        const double z = m.state_scaler.apply1(data.nu_t(j));
        const double sw = m.param_scaler.apply1(data.sigma(j));
        const double pred = z + m.h * field_whitened(m, z, sw);
        const double truth = m.state_scaler.apply1(data.nu_th(j));
        acc += (pred - truth) * (pred - truth);
    }
    return acc / static_cast<double>(idx.size());
}

Rollout rollout(const EulerNetModel& m, double nu2_0, double sigma, int steps) {
    if (steps < 1) throw std::invalid_argument("rollout: steps must be >= 1");
    Rollout r;
    r.nu2.reserve(static_cast<std::size_t>(steps) + 1);
    r.nu2.push_back(nu2_0);
    const double mid = 0.5 * (m.train_nu2_min + m.train_nu2_max);
    const double half = 0.5 * (m.train_nu2_max - m.train_nu2_min);
    const double bound = 10.0 * half;
    double v = nu2_0;
    for (int k = 0; k < steps; ++k) {
        v = euler_predict(m, v, sigma);
        if (!std::isfinite(v) || std::abs(v - mid) > bound) {
            r.truncated = true;
            break;
        }
        r.nu2.push_back(v);
    }
    return r;
}

}  // namespace abmphase::odenet
