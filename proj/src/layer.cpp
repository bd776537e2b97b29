#include "cowm/layer.hpp"

#include <cmath>
#include <iostream>

namespace cowm {

DirectionBuffer::DirectionBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("DirectionBuffer: capacity must be positive");
}

void DirectionBuffer::push(Vector unit_direction) {
    if (std::abs(norm(unit_direction) - 1.0) > 1e-10) {
        throw PreconditionError("DirectionBuffer: entry is not unit norm");
    }
    entries_.push_back(std::move(unit_direction));
    if (entries_.size() > capacity_) entries_.pop_front();
}

namespace {

Matrix init_weights(std::size_t d_in, std::size_t d_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
    Matrix w(d_in, d_out);
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    return w;
}

void validate_config(const CowmConfig& cfg) {
    if (cfg.cluster_count < 1) throw ConfigError("CowmLayer: cluster_count must be >= 1");
    if (cfg.cluster_iters < 1) throw ConfigError("CowmLayer: cluster_iters must be >= 1");
    if (cfg.ridge < 0.0) throw ConfigError("CowmLayer: ridge must be non-negative");
}

}  // namespace

CowmLayer::CowmLayer(std::size_t d_in, std::size_t d_out, const CowmConfig& cfg,
                     bool with_bias, Rng& init_rng)
    : d_in_(d_in),
      d_out_(d_out),
      cfg_(cfg),
      weights_(init_weights(d_in, d_out, init_rng)),
      buffer_(cfg.buffer_capacity) {
    validate_config(cfg);
    if (with_bias) bias_ = Vector(d_out, 0.0);
}

CowmLayer::CowmLayer(Matrix weights, std::optional<Vector> bias, const CowmConfig& cfg)
    : d_in_(weights.rows()),
      d_out_(weights.cols()),
      cfg_(cfg),
      weights_(std::move(weights)),
      bias_(std::move(bias)),
      buffer_(cfg.buffer_capacity) {
    validate_config(cfg);
    if (bias_ && bias_->size() != d_out_) {
        throw ShapeError("CowmLayer: bias length " + std::to_string(bias_->size()) +
                         " vs d_out " + std::to_string(d_out_));
    }
}

Matrix CowmLayer::forward(const Matrix& x, bool training) {
    if (x.rows() != d_in_) {
        throw ShapeError("forward: input " + shape_str(x.rows(), x.cols()) +
                         " vs layer d_in " + std::to_string(d_in_));
    }
    Matrix pre = matmul(transpose(weights_), x);
    if (bias_) {
        for (std::size_t i = 0; i < pre.rows(); ++i) {
            for (std::size_t j = 0; j < pre.cols(); ++j) pre.at(i, j) += (*bias_)[i];
        }
    }
    if (training && cfg_.project) {
        if (auto dir = column_mean_direction(x)) {
            buffer_.push(*dir);
            refresh_projection(*dir);
        }
        // A degenerate (zero-sum) batch mean is skipped entirely.
    }
    return pre;
}

void CowmLayer::refresh_projection(const Vector& current_direction) {
    if (std::abs(norm(current_direction) - 1.0) > 1e-8) {
        throw PreconditionError("refresh_projection: direction is not unit norm");
    }
    if (buffer_.size() < cfg_.cluster_count || cfg_.cluster_count < 2) {
        preserved_.reset();
        projection_part_.reset();
        clusters_.reset();
        return;
    }

    std::vector<Vector> points(buffer_.entries().begin(), buffer_.entries().end());
    ClusterModel model =
        spherical_kmeans(points, cfg_.cluster_count, cfg_.cluster_iters, cfg_.seed);

    if (has_duplicate_centers(model)) {
        if (!warned_degenerate_) {
            std::cerr << "cowm: degenerate clustering (indistinct centers), "
                         "falling back to standard BP updates\n";
            warned_degenerate_ = true;
        }
        preserved_.reset();
        projection_part_.reset();
        clusters_ = std::move(model);
        return;
    }

    const std::size_t j = nearest_center(current_direction, model);
    std::vector<Vector> kept;
    kept.reserve(model.centers.size() - 1);
    for (std::size_t i = 0; i < model.centers.size(); ++i) {
        if (i != j) kept.push_back(model.centers[i]);
    }
    Matrix a = Matrix::from_columns(kept);
    try {
        Matrix s = gram_inverse(a, cfg_.ridge);
        projection_part_ = matmul(a, s);
        preserved_ = std::move(a);
        warned_degenerate_ = false;
    } catch (const SingularError&) {
        if (!warned_degenerate_) {
            std::cerr << "cowm: ill-conditioned preserved directions, "
                         "falling back to standard BP updates\n";
            warned_degenerate_ = true;
        }
        preserved_.reset();
        projection_part_.reset();
    }
    clusters_ = std::move(model);
}

Matrix CowmLayer::weight_delta(const Matrix& grad_pre, const Matrix& x, double lr) const {
    if (grad_pre.rows() != d_out_ || x.rows() != d_in_ || grad_pre.cols() != x.cols()) {
        throw ShapeError("weight_delta: grad " + shape_str(grad_pre.rows(), grad_pre.cols()) +
                         ", x " + shape_str(x.rows(), x.cols()) + " vs layer " +
                         shape_str(d_in_, d_out_));
    }
    if (preserved_) {
        // X_perp = x - P (A^T x)
        Matrix proj = matmul(*projection_part_, matmul(transpose(*preserved_), x));
        return scaled(matmul(sub(x, proj), transpose(grad_pre)), -lr);
    }
    return scaled(matmul(x, transpose(grad_pre)), -lr);
}

void CowmLayer::apply_update(const Matrix& delta) {
    if (delta.rows() != d_in_ || delta.cols() != d_out_) {
        throw ShapeError("apply_update: delta " + shape_str(delta.rows(), delta.cols()) +
                         " vs weights " + shape_str(d_in_, d_out_));
    }
    weights_ = add(weights_, delta);
}

void CowmLayer::apply_update(const Matrix& delta, const Matrix& grad_pre, double lr) {
    apply_update(delta);
    if (bias_) {
        const Vector sums = grad_pre.row_sums();
        for (std::size_t i = 0; i < d_out_; ++i) (*bias_)[i] -= lr * sums[i];
    }
}

Matrix CowmLayer::backward_input(const Matrix& grad_pre) const {
    if (grad_pre.rows() != d_out_) {
        throw ShapeError("backward_input: grad " + shape_str(grad_pre.rows(), grad_pre.cols()) +
                         " vs d_out " + std::to_string(d_out_));
    }
    return matmul(weights_, grad_pre);
}

void CowmLayer::set_weights(Matrix w) {
    if (w.rows() != d_in_ || w.cols() != d_out_) {
        throw ShapeError("set_weights: " + shape_str(w.rows(), w.cols()) + " vs " +
                         shape_str(d_in_, d_out_));
    }
    weights_ = std::move(w);
}

void CowmLayer::set_bias(std::optional<Vector> b) {
    if (b && b->size() != d_out_) {
        throw ShapeError("set_bias: length " + std::to_string(b->size()) + " vs d_out " +
                         std::to_string(d_out_));
    }
    bias_ = std::move(b);
}

void CowmLayer::set_projection_state(std::optional<Matrix> preserved,
                                     std::optional<Matrix> part) {
    if (preserved.has_value() != part.has_value()) {
        throw UsageError("set_projection_state: preserved and part must both be set or unset");
    }
    preserved_ = std::move(preserved);
    projection_part_ = std::move(part);
}

}  // namespace cowm
