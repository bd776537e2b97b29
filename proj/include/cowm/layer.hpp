#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "cowm/clustering.hpp"
#include "cowm/matrix.hpp"
#include "cowm/rng.hpp"

namespace cowm {

// Bounded ring of historical unit input directions (one per training batch).
class DirectionBuffer {
public:
    explicit DirectionBuffer(std::size_t capacity);

    void push(Vector unit_direction);  // evicts the oldest entry when full
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::deque<Vector>& entries() const { return entries_; }
    void clear() { entries_.clear(); }

private:
    std::size_t capacity_;
    std::deque<Vector> entries_;
};

struct CowmConfig {
    std::size_t cluster_count = 2;    // c
    std::size_t cluster_iters = 10;   // k
    std::size_t buffer_capacity = 64; // F
    double ridge = 1e-8;
    bool project = true;              // false = plain linear layer
    std::uint64_t seed = 0;
};

// Fully connected layer whose weight updates are projected into the null
// space of clustered historical input directions. Forward is a standard
// linear map; training-mode forwards additionally record the batch mean
// direction and refresh the preserved-direction projection.
class CowmLayer {
public:
    CowmLayer(std::size_t d_in, std::size_t d_out, const CowmConfig& cfg, bool with_bias,
              Rng& init_rng);
    CowmLayer(Matrix weights, std::optional<Vector> bias, const CowmConfig& cfg);

    std::size_t d_in() const { return d_in_; }
    std::size_t d_out() const { return d_out_; }
    const CowmConfig& config() const { return cfg_; }

    // Pre-activation W^T x (+ bias per column). training=true also pushes the
    // batch mean direction and refreshes the projection; training=false
    // leaves all state untouched.
    Matrix forward(const Matrix& x, bool training);

    // Recluster the buffer and rebuild preserved directions / projection part,
    // dropping the cluster nearest to current_direction. Falls back to
    // standard-BP mode (projection absent) when the buffer is under-filled or
    // clustering is degenerate.
    void refresh_projection(const Vector& current_direction);

    // -lr * (x - P A^T x) * grad_pre^T; plain BP delta when no projection.
    Matrix weight_delta(const Matrix& grad_pre, const Matrix& x, double lr) const;

    void apply_update(const Matrix& delta);
    // Same, plus the standard unprojected bias update -lr * rowsum(grad_pre).
    void apply_update(const Matrix& delta, const Matrix& grad_pre, double lr);

    // W * grad_pre: gradient w.r.t. the layer input, never projected.
    Matrix backward_input(const Matrix& grad_pre) const;

    const Matrix& weights() const { return weights_; }
    void set_weights(Matrix w);
    const std::optional<Vector>& bias() const { return bias_; }
    void set_bias(std::optional<Vector> b);
    DirectionBuffer& buffer() { return buffer_; }
    const DirectionBuffer& buffer() const { return buffer_; }
    const std::optional<Matrix>& preserved() const { return preserved_; }
    const std::optional<Matrix>& projection_part() const { return projection_part_; }
    const std::optional<ClusterModel>& last_clusters() const { return clusters_; }
    void set_projection_state(std::optional<Matrix> preserved, std::optional<Matrix> part);

private:
    std::size_t d_in_;
    std::size_t d_out_;
    CowmConfig cfg_;
    Matrix weights_;               // d_in x d_out
    std::optional<Vector> bias_;   // d_out
    DirectionBuffer buffer_;
    std::optional<Matrix> preserved_;        // A, d_in x (c-1)
    std::optional<Matrix> projection_part_;  // P = A (A^T A + ridge I)^-1
    std::optional<ClusterModel> clusters_;
    bool warned_degenerate_ = false;
};

}  // namespace cowm
