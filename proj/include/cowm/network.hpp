#pragma once

#include <cstdint>
#include <vector>

#include "cowm/layer.hpp"

namespace cowm {

enum class Activation { Identity, Tanh, Relu };

// Which update rule a benchmark network uses: projected COWM or plain BP.
enum class NetKind { Cowm, Bp };

Matrix apply_activation(Activation act, const Matrix& pre);
// Elementwise f'(pre). relu' is 0 at the kink.
Matrix activation_grad(Activation act, const Matrix& pre);

struct TrainConfig {
    double lr = 1.0;
    std::size_t batch_size = 32;
    std::size_t steps = 2000;
    std::uint64_t seed = 0;
};

// Cached forward-pass state consumed by one backward pass.
struct ForwardCache {
    std::vector<Matrix> inputs;  // x_{l-1} per layer
    std::vector<Matrix> pre;     // a_l per layer
    bool training = false;
    std::uint64_t revision = 0;
};

// Layered perceptron over CowmLayer (plain linear = projection disabled).
class Mlp {
public:
    Mlp(std::vector<CowmLayer> layers, std::vector<Activation> activations);

    // dims = {d_in, h1, ..., d_out}; one activation per layer.
    static Mlp make(const std::vector<std::size_t>& dims,
                    const std::vector<Activation>& activations, const CowmConfig& cfg,
                    bool with_bias, Rng& init_rng);

    Matrix forward(const Matrix& x, bool training, ForwardCache* cache = nullptr);

    // One SGD step: activation chain rule, per-layer (projected) weight delta,
    // bias update, gradient propagated through pre-update weights.
    void backward_and_step(const ForwardCache& cache, const Matrix& grad_output, double lr);

    // Raw unprojected dL/dW per layer; no mutation. Used by gradient checks.
    std::vector<Matrix> weight_gradients(const ForwardCache& cache,
                                         const Matrix& grad_output) const;

    std::size_t depth() const { return layers_.size(); }
    std::size_t input_dim() const { return layers_.front().d_in(); }
    std::size_t output_dim() const { return layers_.back().d_out(); }
    std::vector<CowmLayer>& layers() { return layers_; }
    const std::vector<CowmLayer>& layers() const { return layers_; }
    const std::vector<Activation>& activations() const { return acts_; }
    std::uint64_t revision() const { return revision_; }

private:
    std::vector<CowmLayer> layers_;
    std::vector<Activation> acts_;
    std::uint64_t revision_ = 0;
};

// loss = mean over entries of 0.5*(pred-target)^2; grad = (pred-target)/count.
struct LossResult {
    double loss = 0.0;
    Matrix grad;
};
LossResult mse_loss(const Matrix& pred, const Matrix& target);

// Diagonal Gaussian log density per column with analytic gradients.
// dlog_std holds the per-column contribution ((a-mean)^2/var - 1).
struct GaussianLogProb {
    std::vector<double> logprob;  // per column
    Matrix dmean;
    Matrix dlog_std;
};
GaussianLogProb gaussian_logprob_grad(const Matrix& mean, const Vector& log_std,
                                      const Matrix& action);

}  // namespace cowm
