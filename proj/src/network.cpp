#include "cowm/network.hpp"

#include <cmath>
#include <numbers>

namespace cowm {

Matrix apply_activation(Activation act, const Matrix& pre) {
    if (act == Activation::Identity) return pre;
    Matrix out(pre.rows(), pre.cols());
    for (std::size_t i = 0; i < pre.values().size(); ++i) {
        const double v = pre.values()[i];
        out.values()[i] = act == Activation::Tanh ? std::tanh(v) : (v > 0.0 ? v : 0.0);
    }
    return out;
}

Matrix activation_grad(Activation act, const Matrix& pre) {
    Matrix out(pre.rows(), pre.cols());
    for (std::size_t i = 0; i < pre.values().size(); ++i) {
        const double v = pre.values()[i];
        switch (act) {
            case Activation::Identity: out.values()[i] = 1.0; break;
            case Activation::Tanh: {
                const double t = std::tanh(v);
                out.values()[i] = 1.0 - t * t;
                break;
            }
            case Activation::Relu: out.values()[i] = v > 0.0 ? 1.0 : 0.0; break;
        }
    }
    return out;
}

Mlp::Mlp(std::vector<CowmLayer> layers, std::vector<Activation> activations)
    : layers_(std::move(layers)), acts_(std::move(activations)) {
    if (layers_.empty()) throw ConfigError("Mlp: need at least one layer");
    if (acts_.size() != layers_.size()) {
        throw ConfigError("Mlp: " + std::to_string(acts_.size()) + " activations for " +
                          std::to_string(layers_.size()) + " layers");
    }
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        if (layers_[l].d_out() != layers_[l + 1].d_in()) {
            throw ShapeError("Mlp: layer " + std::to_string(l) + " d_out " +
                             std::to_string(layers_[l].d_out()) + " vs layer " +
                             std::to_string(l + 1) + " d_in " +
                             std::to_string(layers_[l + 1].d_in()));
        }
    }
}

Mlp Mlp::make(const std::vector<std::size_t>& dims, const std::vector<Activation>& activations,
              const CowmConfig& cfg, bool with_bias, Rng& init_rng) {
    if (dims.size() < 2) throw ConfigError("Mlp::make: need at least {d_in, d_out}");
    std::vector<CowmLayer> layers;
    layers.reserve(dims.size() - 1);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        layers.emplace_back(dims[l], dims[l + 1], cfg, with_bias, init_rng);
    }
    return Mlp(std::move(layers), activations);
}

Matrix Mlp::forward(const Matrix& x, bool training, ForwardCache* cache) {
    if (x.rows() != input_dim()) {
        throw ShapeError("Mlp::forward: input " + shape_str(x.rows(), x.cols()) +
                         " vs d_in " + std::to_string(input_dim()));
    }
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
        cache->training = training;
        cache->revision = revision_;
    }
    Matrix h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (cache) cache->inputs.push_back(h);
        Matrix pre = layers_[l].forward(h, training);
        if (cache) cache->pre.push_back(pre);
        h = apply_activation(acts_[l], pre);
    }
    return h;
}

void Mlp::backward_and_step(const ForwardCache& cache, const Matrix& grad_output, double lr) {
    if (!cache.training || cache.inputs.size() != layers_.size()) {
        throw UsageError("backward_and_step: cache missing or not from a training forward");
    }
    if (cache.revision != revision_) {
        throw UsageError("backward_and_step: stale cache (network already stepped)");
    }
    Matrix g = grad_output;  // dL/dx_l
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const Matrix ga = hadamard(g, activation_grad(acts_[l], cache.pre[l]));
        if (l > 0) g = layers_[l].backward_input(ga);  // pre-update weights
        const Matrix delta = layers_[l].weight_delta(ga, cache.inputs[l], lr);
        layers_[l].apply_update(delta, ga, lr);
    }
    ++revision_;
}

std::vector<Matrix> Mlp::weight_gradients(const ForwardCache& cache,
                                          const Matrix& grad_output) const {
    if (cache.inputs.size() != layers_.size()) {
        throw UsageError("weight_gradients: cache missing");
    }
    std::vector<Matrix> grads;
    grads.reserve(layers_.size());
    Matrix g = grad_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const Matrix ga = hadamard(g, activation_grad(acts_[l], cache.pre[l]));
        grads.insert(grads.begin(), matmul(cache.inputs[l], transpose(ga)));
        if (l > 0) g = layers_[l].backward_input(ga);
    }
    return grads;
}

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ShapeError("mse_loss: " + shape_str(pred.rows(), pred.cols()) + " vs " +
                         shape_str(target.rows(), target.cols()));
    }
    const double count = static_cast<double>(pred.values().size());
    Matrix grad(pred.rows(), pred.cols());
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.values().size(); ++i) {
        const double r = pred.values()[i] - target.values()[i];
        loss += 0.5 * r * r;
        grad.values()[i] = r / count;
    }
    return {loss / count, std::move(grad)};
}

GaussianLogProb gaussian_logprob_grad(const Matrix& mean, const Vector& log_std,
                                      const Matrix& action) {
    if (mean.rows() != action.rows() || mean.cols() != action.cols()) {
        throw ShapeError("gaussian_logprob_grad: mean " + shape_str(mean.rows(), mean.cols()) +
                         " vs action " + shape_str(action.rows(), action.cols()));
    }
    if (log_std.size() != mean.rows()) {
        throw ShapeError("gaussian_logprob_grad: log_std length " +
                         std::to_string(log_std.size()) + " vs dim " +
                         std::to_string(mean.rows()));
    }
    for (double v : log_std) {
        if (!std::isfinite(v)) throw RunError("gaussian_logprob_grad: non-finite log_std");
    }

    GaussianLogProb out{std::vector<double>(mean.cols(), 0.0),
                        Matrix(mean.rows(), mean.cols()), Matrix(mean.rows(), mean.cols())};
    constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)
    for (std::size_t i = 0; i < mean.rows(); ++i) {
        const double ls = log_std[i];
        const double inv_var = std::exp(-2.0 * ls);
        for (std::size_t j = 0; j < mean.cols(); ++j) {
            const double diff = action(i, j) - mean(i, j);
            out.logprob[j] += -0.5 * diff * diff * inv_var - ls - 0.5 * kLog2Pi;
            out.dmean.at(i, j) = diff * inv_var;
            out.dlog_std.at(i, j) = diff * diff * inv_var - 1.0;
        }
    }
    return out;
}

}  // namespace cowm
