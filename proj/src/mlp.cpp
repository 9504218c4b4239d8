#include "abmphase/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace abmphase::nn {

namespace {

inline Eigen::ArrayXXd act_apply(Activation a, const Eigen::MatrixXd& z) {
    if (a == Activation::tanh_act) return z.array().tanh();
    return z.array();
}

// First derivative expressed through the activation value.
inline Eigen::ArrayXXd act_d(Activation act, const Eigen::MatrixXd& a) {
    if (act == Activation::tanh_act) return 1.0 - a.array().square();
    return Eigen::ArrayXXd::Ones(a.rows(), a.cols());
}

// Second derivative through the activation value: tanh'' = -2 a (1 - a^2).
inline Eigen::ArrayXXd act_dd(Activation act, const Eigen::MatrixXd& a) {
    if (act == Activation::tanh_act) return -2.0 * a.array() * (1.0 - a.array().square());
    return Eigen::ArrayXXd::Zero(a.rows(), a.cols());
}

}  // namespace

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers)
        n += static_cast<std::size_t>(l.W.size()) + static_cast<std::size_t>(l.b.size());
    return n;
}

void Mlp::validate() const {
    if (layers.empty()) throw std::invalid_argument("Mlp: no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (layers[k].W.rows() != layers[k].b.size())
            throw std::invalid_argument("Mlp: bias shape mismatch");
        if (k > 0 && layers[k].W.cols() != layers[k - 1].W.rows())
            throw std::invalid_argument("Mlp: layer width mismatch");
        if (!layers[k].W.allFinite() || !layers[k].b.allFinite())
            throw std::invalid_argument("Mlp: non-finite parameters");
    }
}

Mlp Mlp::create(std::span<const int> widths, std::span<const Activation> acts,
                RngStream& rng) {
    if (widths.size() < 2 || acts.size() != widths.size() - 1)
        throw std::invalid_argument("Mlp::create: inconsistent widths/activations");
    Mlp m;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        Layer l;
        const int fan_in = widths[k];
        const int fan_out = widths[k + 1];
        const double s = std::sqrt(6.0 / (fan_in + fan_out));
        l.W.resize(fan_out, fan_in);
        for (Eigen::Index i = 0; i < l.W.size(); ++i) l.W.data()[i] = rng.uniform(-s, s);
        l.b = Eigen::VectorXd::Zero(fan_out);
        l.act = acts[k];
        m.layers.push_back(std::move(l));
    }
    return m;
}

Grads::Grads(const Mlp& m) {
    for (const auto& l : m.layers) {
        dW.emplace_back(Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()));
        db.emplace_back(Eigen::VectorXd::Zero(l.b.size()));
    }
}

void Grads::zero() {
    for (auto& g : dW) g.setZero();
    for (auto& g : db) g.setZero();
}

void Grads::scale(double s) {
    for (auto& g : dW) g *= s;
    for (auto& g : db) g *= s;
}

bool Grads::finite() const {
    for (const auto& g : dW)
        if (!g.allFinite()) return false;
    for (const auto& g : db)
        if (!g.allFinite()) return false;
    return true;
}

Eigen::MatrixXd forward(const Mlp& m, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd a = X;
    for (const auto& l : m.layers) {
        Eigen::MatrixXd z = (l.W * a).colwise() + l.b;
        a = act_apply(l.act, z);
    }
    return a;
}

Trace forward_trace(const Mlp& m, const Eigen::MatrixXd& X) {
    Trace t;
    t.a.reserve(m.layers.size() + 1);
    t.a.push_back(X);
    for (const auto& l : m.layers) {
        Eigen::MatrixXd z = (l.W * t.a.back()).colwise() + l.b;
        t.a.push_back(act_apply(l.act, z));
    }
    return t;
}

void backward(const Mlp& m, const Trace& t, const Eigen::MatrixXd& dY, Grads& g,
              Eigen::MatrixXd* dX) {
    const int L = static_cast<int>(m.layers.size());
    Eigen::MatrixXd G = dY;
    for (int k = L - 1; k >= 0; --k) {
        const auto& l = m.layers[static_cast<std::size_t>(k)];
        G = (G.array() * act_d(l.act, t.a[static_cast<std::size_t>(k) + 1])).matrix();
        g.dW[static_cast<std::size_t>(k)].noalias() +=
            G * t.a[static_cast<std::size_t>(k)].transpose();
        g.db[static_cast<std::size_t>(k)] += G.rowwise().sum();
        if (k > 0 || dX) G = l.W.transpose() * G;
    }
    if (dX) *dX = G;
}

Eigen::MatrixXd input_jacobian(const Mlp& m, const Eigen::VectorXd& x) {
    const Trace t = forward_trace(m, x);
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(x.size(), x.size());
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        const auto& l = m.layers[k];
        J = l.W * J;
        J.array().colwise() *= act_d(l.act, t.a[k + 1]).col(0);
    }
    return J;
}

JacobianTrace jacobian_trace(const Mlp& m, const Trace& t, Eigen::Index sample) {
    JacobianTrace jt;
    const Eigen::Index in = m.layers.front().W.cols();
    jt.F.push_back(Eigen::MatrixXd::Identity(in, in));
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        const auto& l = m.layers[k];
        Eigen::MatrixXd P = l.W * jt.F.back();
        Eigen::MatrixXd F = P;
        F.array().colwise() *= act_d(l.act, t.a[k + 1].col(sample)).col(0);
        jt.P.push_back(std::move(P));
        jt.F.push_back(std::move(F));
    }
    jt.J = jt.F.back();
    return jt;
}

void jacobian_backward(const Mlp& m, const Trace& t, Eigen::Index sample,
                       const JacobianTrace& jt, const Eigen::MatrixXd& dJ, Grads& g) {
    const int L = static_cast<int>(m.layers.size());
    std::vector<Eigen::VectorXd> gz_inject(static_cast<std::size_t>(L));

    // Walk the tangent chain F_k = diag(d_k) W_k F_{k-1} backwards.
    Eigen::MatrixXd R = dJ;  // dL/dF_k
    for (int k = L - 1; k >= 0; --k) {
        const auto& l = m.layers[static_cast<std::size_t>(k)];
        const Eigen::VectorXd ak = t.a[static_cast<std::size_t>(k) + 1].col(sample);
        const Eigen::ArrayXd d = act_d(l.act, ak).col(0);
        const Eigen::ArrayXd dd = act_dd(l.act, ak).col(0);

        // sensitivity to the activation derivative, routed into z through
        // the curvature
        const Eigen::ArrayXd rp =
            (R.array() * jt.P[static_cast<std::size_t>(k)].array()).rowwise().sum();
        gz_inject[static_cast<std::size_t>(k)] = (rp * dd).matrix();

        Eigen::MatrixXd Q = R;
        Q.array().colwise() *= d;  // dL/dP_k
        const Eigen::MatrixXd& Fprev = jt.F[static_cast<std::size_t>(k)];
        g.dW[static_cast<std::size_t>(k)].noalias() += Q * Fprev.transpose();
        if (k > 0) R = l.W.transpose() * Q;
    }

    // Ordinary backprop of the injected pre-activation gradients.
    Eigen::VectorXd ga = Eigen::VectorXd::Zero(m.output_dim());
    for (int k = L - 1; k >= 0; --k) {
        const auto& l = m.layers[static_cast<std::size_t>(k)];
        const Eigen::VectorXd ak = t.a[static_cast<std::size_t>(k) + 1].col(sample);
        const Eigen::VectorXd gz =
            (ga.array() * act_d(l.act, ak).col(0)).matrix() + gz_inject[static_cast<std::size_t>(k)];
        g.dW[static_cast<std::size_t>(k)].noalias() +=
            gz * t.a[static_cast<std::size_t>(k)].col(sample).transpose();
        g.db[static_cast<std::size_t>(k)] += gz;
        if (k > 0) ga = l.W.transpose() * gz;
    }
}

AdamState::AdamState(const Mlp& m, double learning_rate) : lr(learning_rate) {
    for (const auto& l : m.layers) {
        mW.emplace_back(Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()));
        vW.emplace_back(Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()));
        mb.emplace_back(Eigen::VectorXd::Zero(l.b.size()));
        vb.emplace_back(Eigen::VectorXd::Zero(l.b.size()));
    }
}

void adam_step(Mlp& m, const Grads& g, AdamState& s) {
    s.step += 1;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        auto upd = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
            mom = s.beta1 * mom + (1.0 - s.beta1) * grad;
            vel = (s.beta2 * vel.array() + (1.0 - s.beta2) * grad.array().square()).matrix();
            param.array() -=
                s.lr * (mom.array() / bc1) / ((vel.array() / bc2).sqrt() + s.eps);
        };
        upd(m.layers[k].W, s.mW[k], s.vW[k], g.dW[k]);
        upd(m.layers[k].b, s.mb[k], s.vb[k], g.db[k]);
    }
}

Scaler Scaler::fit(const Eigen::MatrixXd& data, Mode mode) {
    if (data.cols() < 2) throw std::invalid_argument("Scaler::fit: need at least 2 samples");
    Scaler sc;
    sc.mode_ = mode;
    if (mode == Mode::minmax) {
        sc.offset_ = data.rowwise().minCoeff();
        sc.scale_ = data.rowwise().maxCoeff() - sc.offset_;
    } else {
        sc.offset_ = data.rowwise().mean();
        const Eigen::MatrixXd centered = data.colwise() - sc.offset_;
        sc.scale_ = (centered.array().square().rowwise().mean()).sqrt().matrix();
    }
    if ((sc.scale_.array() <= 0.0).any())
        throw std::invalid_argument("Scaler::fit: constant feature");
    return sc;
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& data) const {
    return (data.colwise() - offset_).array().colwise() / scale_.array();
}

Eigen::MatrixXd Scaler::invert(const Eigen::MatrixXd& data) const {
    return (data.array().colwise() * scale_.array()).matrix().colwise() + offset_;
}

double Scaler::apply1(double v, int feature) const {
    return (v - offset_(feature)) / scale_(feature);
}

double Scaler::invert1(double v, int feature) const {
    return v * scale_(feature) + offset_(feature);
}

Scaler Scaler::from_state(Mode mode, Eigen::VectorXd offset, Eigen::VectorXd scale) {
    Scaler sc;
    sc.mode_ = mode;
    sc.offset_ = std::move(offset);
    sc.scale_ = std::move(scale);
    return sc;
}

double mse_loss(const Eigen::MatrixXd& y, const Eigen::MatrixXd& target,
                Eigen::MatrixXd* dY) {
    const double numel = static_cast<double>(y.size());
    const Eigen::MatrixXd diff = y - target;
    if (dY) *dY = (2.0 / numel) * diff;
    return diff.squaredNorm() / numel;
}

}  // namespace abmphase::nn
