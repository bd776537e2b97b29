#include "cowm/clustering.hpp"

#include <algorithm>
#include <cmath>

#include "cowm/errors.hpp"
#include "cowm/kernels.hpp"
#include "cowm/rng.hpp"

namespace cowm {

namespace {

// Flatten points into an n x d row-major block for the assignment kernel.
std::vector<double> flatten(const std::vector<Vector>& vs, std::size_t d) {
    std::vector<double> flat(vs.size() * d);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        std::copy(vs[i].begin(), vs[i].end(), flat.begin() + i * d);
    }
    return flat;
}

// Greedy farthest-point seeding under cosine distance; the first center is a
// seeded uniform draw, each following center the point with the smallest
// best similarity to the chosen set (ties to the lowest index).
std::vector<Vector> seed_centers(const std::vector<Vector>& points, std::size_t c,
                                 std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = points.size();
    std::vector<Vector> centers;
    centers.reserve(c);
    std::vector<double> best_sim(n, -2.0);
    std::vector<bool> taken(n, false);

    std::size_t first = rng.index(n);
    centers.push_back(points[first]);
    taken[first] = true;

    while (centers.size() < c) {
        const Vector& latest = centers.back();
        for (std::size_t i = 0; i < n; ++i) {
            best_sim[i] = std::max(best_sim[i], dot(points[i], latest));
        }
        std::size_t pick = n;
        double worst = 2.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i] && best_sim[i] < worst) {
                worst = best_sim[i];
                pick = i;
            }
        }
        if (pick == n) {
            // All points already chosen (duplicates); reuse the first free index.
            for (std::size_t i = 0; i < n && pick == n; ++i) {
                if (!taken[i]) pick = i;
            }
            if (pick == n) pick = 0;
        }
        centers.push_back(points[pick]);
        taken[pick] = true;
    }
    return centers;
}

double model_inertia(const std::vector<double>& best_sim) {
    double s = 0.0;
    for (double v : best_sim) s += 1.0 - v;
    return s;
}

}  // namespace

ClusterModel spherical_kmeans(const std::vector<Vector>& points, std::size_t c,
                              std::size_t k_iters, std::uint64_t seed) {
    if (points.empty()) throw PreconditionError("spherical_kmeans: no points");
    if (c == 0 || k_iters == 0) {
        throw ConfigError("spherical_kmeans: c and k_iters must be positive");
    }
    if (c > points.size()) {
        throw ConfigError("spherical_kmeans: c=" + std::to_string(c) + " exceeds " +
                          std::to_string(points.size()) + " points");
    }
    const std::size_t d = points.front().size();
    for (const Vector& p : points) {
        if (p.size() != d) throw ShapeError("spherical_kmeans: mixed point dimensions");
        if (std::abs(norm(p) - 1.0) > 1e-8) {
            throw PreconditionError("spherical_kmeans: input point is not unit norm");
        }
    }

    const std::size_t n = points.size();
    const std::vector<double> flat_points = flatten(points, d);
    std::vector<Vector> centers = seed_centers(points, c, seed);

    std::vector<std::size_t> assign(n, 0);
    std::vector<double> best_sim(n, 0.0);
    ClusterModel model;
    model.inertia_history.reserve(k_iters);

    for (std::size_t round = 0; round < k_iters; ++round) {
        std::vector<double> flat_centers = flatten(centers, d);
        kernels::assign_parallel(flat_points.data(), n, flat_centers.data(), c, d,
                                 assign.data(), best_sim.data());

        // Reseed empty clusters to the globally worst-fit point, worst first.
        std::vector<std::size_t> counts(c, 0);
        for (std::size_t i = 0; i < n; ++i) counts[assign[i]]++;
        for (std::size_t cl = 0; cl < c; ++cl) {
            if (counts[cl] != 0) continue;
            std::size_t worst = n;
            double worst_sim = 2.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assign[i]] > 1 && best_sim[i] < worst_sim) {
                    worst_sim = best_sim[i];
                    worst = i;
                }
            }
            if (worst == n) continue;  // nothing movable (all clusters singleton)
            counts[assign[worst]]--;
            assign[worst] = cl;
            counts[cl] = 1;
            centers[cl] = points[worst];
            best_sim[worst] = 1.0;
        }

        // Recenter: normalized mean of the assigned points. A cancelled-out
        // (near-zero) mean keeps the previous center.
        for (std::size_t cl = 0; cl < c; ++cl) {
            if (counts[cl] == 0) continue;
            Vector mean(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (assign[i] != cl) continue;
                for (std::size_t j = 0; j < d; ++j) mean[j] += points[i][j];
            }
            if (norm(mean) >= 1e-12) centers[cl] = normalized(mean);
        }

        // Round inertia against the fresh centers.
        std::vector<double> flat_new = flatten(centers, d);
        kernels::assign_parallel(flat_points.data(), n, flat_new.data(), c, d,
                                 assign.data(), best_sim.data());
        model.inertia_history.push_back(model_inertia(best_sim));
    }

    model.centers = std::move(centers);
    model.assignments = std::move(assign);
    model.inertia = model.inertia_history.back();
    return model;
}

std::size_t nearest_center(const Vector& x, const ClusterModel& model) {
    if (model.centers.empty()) throw PreconditionError("nearest_center: empty model");
    if (std::abs(norm(x) - 1.0) > 1e-8) {
        throw PreconditionError("nearest_center: x is not unit norm");
    }
    std::size_t best = 0;
    double best_dot = dot(x, model.centers[0]);
    for (std::size_t c = 1; c < model.centers.size(); ++c) {
        const double d = dot(x, model.centers[c]);
        if (d > best_dot) {
            best_dot = d;
            best = c;
        }
    }
    return best;
}

bool has_duplicate_centers(const ClusterModel& model) {
    for (std::size_t i = 0; i + 1 < model.centers.size(); ++i) {
        for (std::size_t j = i + 1; j < model.centers.size(); ++j) {
            if (1.0 - dot(model.centers[i], model.centers[j]) < 1e-8) return true;
        }
    }
    return false;
}

}  // namespace cowm
