#pragma once

#include <cstdint>
#include <vector>

#include "cowm/matrix.hpp"

namespace cowm {

// Result of spherical k-means over unit vectors. Centers are unit norm;
// assignments maximize cosine similarity (ties to the lowest index); inertia
// is sum(1 - cos(point, assigned center)).
struct ClusterModel {
    std::vector<Vector> centers;
    std::vector<std::size_t> assignments;
    double inertia = 0.0;
    std::vector<double> inertia_history;  // one entry per k-means round
};

// Runs exactly k_iters rounds of assign/recenter with greedy farthest-point
// seeding from a seeded first draw. Empty clusters are reseeded to the
// globally worst-fit point. Deterministic for a fixed seed.
ClusterModel spherical_kmeans(const std::vector<Vector>& points, std::size_t c,
                              std::size_t k_iters, std::uint64_t seed);

// Index of the center with the largest cosine similarity to x.
std::size_t nearest_center(const Vector& x, const ClusterModel& model);

// True when the model failed to produce c pairwise-distinct directions
// (minimum pairwise cosine distance below 1e-8).
bool has_duplicate_centers(const ClusterModel& model);

}  // namespace cowm
