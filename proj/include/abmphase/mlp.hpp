#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "abmphase/rng.hpp"

namespace abmphase::nn {

enum class Activation { tanh_act, linear };

struct Layer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;  // out
    Activation act = Activation::tanh_act;
};

// Plain fully connected network. Data flows as columns: X is (dim x batch).
struct Mlp {
    std::vector<Layer> layers;

    int input_dim() const { return static_cast<int>(layers.front().W.cols()); }
    int output_dim() const { return static_cast<int>(layers.back().W.rows()); }
    std::size_t parameter_count() const;
    void validate() const;

    // Glorot-uniform weights, zero biases. widths = {in, h1, ..., out},
    // acts has widths.size()-1 entries.
    static Mlp create(std::span<const int> widths, std::span<const Activation> acts,
                      RngStream& rng);
};

// Activations of every layer for one batch; a[0] is the input.
struct Trace {
    std::vector<Eigen::MatrixXd> a;
};

// Per-layer gradient accumulators shaped like the network.
struct Grads {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;

    explicit Grads(const Mlp& m);
    void zero();
    void scale(double s);
    bool finite() const;
};

Eigen::MatrixXd forward(const Mlp& m, const Eigen::MatrixXd& X);
Trace forward_trace(const Mlp& m, const Eigen::MatrixXd& X);

// Reverse pass from an output cotangent dY (same shape as the output batch).
// Accumulates into g; optionally returns the input cotangent.
void backward(const Mlp& m, const Trace& t, const Eigen::MatrixXd& dY, Grads& g,
              Eigen::MatrixXd* dX = nullptr);

// Exact Jacobian of outputs with respect to inputs at a single point.
Eigen::MatrixXd input_jacobian(const Mlp& m, const Eigen::VectorXd& x);

// Forward tangent stack for sample s of a traced batch, kept so a loss on
// the Jacobian can be backpropagated to the parameters.
struct JacobianTrace {
    std::vector<Eigen::MatrixXd> P;  // pre-activation tangents, per layer
    std::vector<Eigen::MatrixXd> F;  // activation tangents; F[0] = identity
    Eigen::MatrixXd J;               // = F.back()
};

JacobianTrace jacobian_trace(const Mlp& m, const Trace& t, Eigen::Index sample);

// Backpropagates dL/dJ for one sample into parameter gradients (the
// double-backward pass: both the explicit weight factors of the tangent
// chain and the activation-curvature path through the pre-activations).
void jacobian_backward(const Mlp& m, const Trace& t, Eigen::Index sample,
                       const JacobianTrace& jt, const Eigen::MatrixXd& dJ, Grads& g);

// ---- optimizer ----

struct AdamState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState(const Mlp& m, double learning_rate);
};

void adam_step(Mlp& m, const Grads& g, AdamState& s);

// ---- feature scaling ----

class Scaler {
public:
    enum class Mode { minmax, whiten };

    // Fit on training columns only. minmax maps each feature to [0,1];
    // whiten to zero mean and unit variance. Throws on constant features.
    static Scaler fit(const Eigen::MatrixXd& data, Mode mode);

    Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& data) const;
    double apply1(double v, int feature = 0) const;
    double invert1(double v, int feature = 0) const;

    Mode mode() const { return mode_; }
    const Eigen::VectorXd& offset() const { return offset_; }
    const Eigen::VectorXd& scale() const { return scale_; }
    static Scaler from_state(Mode mode, Eigen::VectorXd offset, Eigen::VectorXd scale);

private:
    Mode mode_ = Mode::minmax;
    Eigen::VectorXd offset_;  // min or mean
    Eigen::VectorXd scale_;   // max-min or std
};

// Mean squared error over all elements plus its cotangent.
double mse_loss(const Eigen::MatrixXd& y, const Eigen::MatrixXd& target,
                Eigen::MatrixXd* dY = nullptr);

}  // namespace abmphase::nn
