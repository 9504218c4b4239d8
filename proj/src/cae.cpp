#include "abmphase/cae.hpp"

#include <cmath>
#include <stdexcept>

#include "abmphase/rng.hpp"

namespace abmphase::cae {

void YNetHyper::validate() const {
    if (batch_size < 1 || epochs < 1) throw std::invalid_argument("YNetHyper: bad sizes");
    if (!(lr > 0.0) || !(alpha >= 0.0)) throw std::invalid_argument("YNetHyper: bad rates");
    if (!(train_frac > 0.0) || !(val_frac >= 0.0) || !(train_frac + val_frac < 1.0))
        throw std::invalid_argument("YNetHyper: split fractions must leave a test share");
}

namespace {

// Per-sample conformality term. Returns cos^2 and, when grads is given,
// accumulates weight * d(cos^2)/dparams through the Jacobian chain.
double conformality_sample(const nn::Mlp& encoder, const nn::Trace& trace,
                           Eigen::Index sample, double weight, nn::Grads* grads,
                           int* warnings) {
    const nn::JacobianTrace jt = nn::jacobian_trace(encoder, trace, sample);
    const Eigen::RowVectorXd j1 = jt.J.row(0);
    const Eigen::RowVectorXd j2 = jt.J.row(1);
    const double n1 = j1.norm();
    const double n2 = j2.norm();
    if (n1 < 1e-150 || n2 < 1e-150) {
        if (warnings) ++*warnings;
        return 0.0;
    }
    const double inv = 1.0 / (n1 * n2);
    const double c = j1.dot(j2) * inv;
    if (grads) {
        Eigen::MatrixXd dJ(2, jt.J.cols());
        // d(cos)/dj1 = j2/(n1 n2) - c j1/n1^2, symmetric for j2
        dJ.row(0) = j2 * inv - (c / (n1 * n1)) * j1;
        dJ.row(1) = j1 * inv - (c / (n2 * n2)) * j2;
        dJ *= weight * 2.0 * c;  // chain through cos^2
        nn::jacobian_backward(encoder, trace, sample, jt, dJ, *grads);
    }
    return c * c;
}

double conformality_batch(const nn::Mlp& encoder, const nn::Trace& trace, double weight,
                          nn::Grads* grads, int* warnings) {
    const Eigen::Index B = trace.a.front().cols();
    double loss = 0.0;
    for (Eigen::Index s = 0; s < B; ++s)
        loss += conformality_sample(encoder, trace, s,
                                    weight / static_cast<double>(B), grads, warnings);
    return loss / static_cast<double>(B);
}

Eigen::MatrixXd select_cols(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

}  // namespace

YNetEval ynet_forward(const YNetModel& m, const Eigen::MatrixXd& psi_raw) {
    if (psi_raw.rows() != 2) throw std::invalid_argument("ynet_forward: expected 2 x n inputs");
    YNetEval ev;
    const Eigen::MatrixXd x = m.input_scaler.apply(psi_raw);
    ev.latent = nn::forward(m.encoder, x);
    ev.recon = m.input_scaler.invert(nn::forward(m.decoder, ev.latent));
    const Eigen::MatrixXd shat = nn::forward(m.estimator, ev.latent.row(0));
    ev.sigma_hat = m.sigma_scaler.invert(shat).transpose();
    return ev;
}

double conformality_loss(const YNetModel& m, const Eigen::MatrixXd& psi_raw, int* warnings) {
    const Eigen::MatrixXd x = m.input_scaler.apply(psi_raw);
    const nn::Trace t = nn::forward_trace(m.encoder, x);
    return conformality_batch(m.encoder, t, 0.0, nullptr, warnings);
}

double mean_abs_cos_theta(const YNetModel& m, const Eigen::MatrixXd& psi_raw, int* warnings) {
    const Eigen::MatrixXd x = m.input_scaler.apply(psi_raw);
    const nn::Trace t = nn::forward_trace(m.encoder, x);
    const Eigen::Index n = x.cols();
    double acc = 0.0;
    for (Eigen::Index s = 0; s < n; ++s)
        acc += std::sqrt(conformality_sample(m.encoder, t, s, 0.0, nullptr, warnings));
    return acc / static_cast<double>(n);
}

YNetTrainResult train_ynet(const Eigen::MatrixXd& psi_rows, const Eigen::VectorXd& sigma,
                           const YNetHyper& h) {
    h.validate();
    if (psi_rows.cols() != 2)
        throw std::invalid_argument("train_ynet: expected n x 2 coordinates");
    const Eigen::Index n = psi_rows.rows();
    if (n != sigma.size()) throw std::invalid_argument("train_ynet: sigma length mismatch");
    if (n < 10) throw std::invalid_argument("train_ynet: too few rows");

    YNetTrainResult res;
    RngStream rng(h.seed, 0xcae0);

    // split
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);
    const auto n_train = static_cast<std::size_t>(h.train_frac * static_cast<double>(n));
    const auto n_val = static_cast<std::size_t>(h.val_frac * static_cast<double>(n));
    res.splits.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
    res.splits.val.assign(order.begin() + static_cast<long>(n_train),
                          order.begin() + static_cast<long>(n_train + n_val));
    res.splits.test.assign(order.begin() + static_cast<long>(n_train + n_val), order.end());

    const Eigen::MatrixXd all_psi = psi_rows.transpose();  // 2 x n
    const Eigen::MatrixXd train_psi = select_cols(all_psi, res.splits.train);
    Eigen::MatrixXd sigma_row = sigma.transpose();  // 1 x n

    auto& model = res.model;
    model.input_scaler = nn::Scaler::fit(train_psi, nn::Scaler::Mode::minmax);
    model.sigma_scaler =
        nn::Scaler::fit(select_cols(sigma_row, res.splits.train), nn::Scaler::Mode::minmax);

    // subnetworks: hidden_layers x hidden_width tanh, then a linear head
    std::vector<int> enc_w{2}, dec_w{2}, est_w{1};
    std::vector<nn::Activation> acts;
    for (int i = 0; i < h.hidden_layers; ++i) {
        enc_w.push_back(h.hidden_width);
        dec_w.push_back(h.hidden_width);
        est_w.push_back(h.hidden_width);
        acts.push_back(nn::Activation::tanh_act);
    }
    enc_w.push_back(2);
    dec_w.push_back(2);
    est_w.push_back(1);
    acts.push_back(nn::Activation::linear);
    model.encoder = nn::Mlp::create(enc_w, acts, rng);
    model.decoder = nn::Mlp::create(dec_w, acts, rng);
    model.estimator = nn::Mlp::create(est_w, acts, rng);

    nn::AdamState st_enc(model.encoder, h.lr);
    nn::AdamState st_dec(model.decoder, h.lr);
    nn::AdamState st_est(model.estimator, h.lr);
    nn::Grads g_enc(model.encoder), g_dec(model.decoder), g_est(model.estimator);

    const Eigen::MatrixXd x_all = model.input_scaler.apply(all_psi);
    const Eigen::MatrixXd s_all = model.sigma_scaler.apply(sigma_row);

    auto eval_losses = [&](const std::vector<std::size_t>& idx, double& recon, double& conf,
                           double& est) {
        const Eigen::MatrixXd x = select_cols(x_all, idx);
        const Eigen::MatrixXd s = select_cols(s_all, idx);
        const nn::Trace te = nn::forward_trace(model.encoder, x);
        const Eigen::MatrixXd nu = te.a.back();
        recon = nn::mse_loss(nn::forward(model.decoder, nu), x);
        conf = conformality_batch(model.encoder, te, 0.0, nullptr, nullptr);
        est = nn::mse_loss(nn::forward(model.estimator, nu.row(0)), s);
    };

    std::vector<std::size_t> batch_order = res.splits.train;
    const auto B = static_cast<std::size_t>(h.batch_size);

    for (int epoch = 0; epoch < h.epochs; ++epoch) {
        shuffle(batch_order, rng);
        double ep_recon = 0.0, ep_conf = 0.0, ep_est = 0.0;
        std::size_t n_batches = 0;

        for (std::size_t start = 0; start < batch_order.size(); start += B) {
            const std::size_t len = std::min(B, batch_order.size() - start);
            const std::vector<std::size_t> idx(batch_order.begin() + static_cast<long>(start),
                                               batch_order.begin() +
                                                   static_cast<long>(start + len));
            const Eigen::MatrixXd xb = select_cols(x_all, idx);
            const Eigen::MatrixXd sb = select_cols(s_all, idx);

            // phase 1: autoencoder + conformality, updates encoder & decoder
            {
                const nn::Trace te = nn::forward_trace(model.encoder, xb);
                const nn::Trace td = nn::forward_trace(model.decoder, te.a.back());
                Eigen::MatrixXd d_recon;
                const double l_recon = nn::mse_loss(td.a.back(), xb, &d_recon);
                g_dec.zero();
                g_enc.zero();
                Eigen::MatrixXd d_nu;
                nn::backward(model.decoder, td, d_recon, g_dec, &d_nu);
                nn::backward(model.encoder, te, d_nu, g_enc);
                const double l_conf =
                    conformality_batch(model.encoder, te, h.alpha, &g_enc, nullptr);
                nn::adam_step(model.encoder, g_enc, st_enc);
                nn::adam_step(model.decoder, g_dec, st_dec);
                ep_recon += l_recon;
                ep_conf += l_conf;
            }

            // phase 2: estimator on nu1, updates estimator & encoder
            {
                const nn::Trace te = nn::forward_trace(model.encoder, xb);
                const nn::Trace ts = nn::forward_trace(model.estimator, te.a.back().row(0));
                Eigen::MatrixXd d_shat;
                const double l_est = nn::mse_loss(ts.a.back(), sb, &d_shat);
                g_est.zero();
                g_enc.zero();
                Eigen::MatrixXd d_nu1;
                nn::backward(model.estimator, ts, d_shat, g_est, &d_nu1);
                Eigen::MatrixXd d_nu = Eigen::MatrixXd::Zero(2, d_nu1.cols());
                d_nu.row(0) = d_nu1;
                nn::backward(model.encoder, te, d_nu, g_enc);
                nn::adam_step(model.estimator, g_est, st_est);
                nn::adam_step(model.encoder, g_enc, st_enc);
                ep_est += l_est;
            }
            ++n_batches;
        }

        YNetEpoch rec;
        rec.train_recon = ep_recon / static_cast<double>(n_batches);
        rec.train_conf = ep_conf / static_cast<double>(n_batches);
        rec.train_est = ep_est / static_cast<double>(n_batches);
        if (!res.splits.val.empty())
            eval_losses(res.splits.val, rec.val_recon, rec.val_conf, rec.val_est);
        res.history.push_back(rec);

        if (!std::isfinite(rec.train_recon + rec.train_conf + rec.train_est)) {
            res.diverged = true;
            break;
        }
    }
    return res;
}

}  // namespace abmphase::cae
