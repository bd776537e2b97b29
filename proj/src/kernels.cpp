#include "cowm/kernels.hpp"

namespace cowm::kernels {

namespace {

inline void matmul_row(const double* a, const double* b, double* c,
                       std::size_t i, std::size_t k, std::size_t n) {
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
        const double aip = arow[p];
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
}

inline void assign_point(const double* points, const double* centers,
                         std::size_t i, std::size_t c_count, std::size_t d,
                         std::size_t* out_idx, double* best_sim) {
    const double* pt = points + i * d;
    std::size_t best = 0;
    double best_dot = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) {
        const double* ct = centers + c * d;
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += pt[j] * ct[j];
        if (c == 0 || dot > best_dot) {
            best_dot = dot;
            best = c;
        }
    }
    out_idx[i] = best;
    if (best_sim) best_sim[i] = best_dot;
}

}  // namespace

void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_row(a, b, c, i, k, n);
}

void matmul_parallel(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
    const long long rows = static_cast<long long>(m);
    // Rows are independent; per-element accumulation order matches the serial
    // kernel, so the result is bit-identical for any thread count.
#pragma omp parallel for schedule(static) if (m * k * n >= 65536)
    for (long long i = 0; i < rows; ++i) {
        matmul_row(a, b, c, static_cast<std::size_t>(i), k, n);
    }
}

void assign_serial(const double* points, std::size_t n,
                   const double* centers, std::size_t c_count, std::size_t d,
                   std::size_t* out_idx, double* best_sim) {
    for (std::size_t i = 0; i < n; ++i) {
        assign_point(points, centers, i, c_count, d, out_idx, best_sim);
    }
}

void assign_parallel(const double* points, std::size_t n,
                     const double* centers, std::size_t c_count, std::size_t d,
                     std::size_t* out_idx, double* best_sim) {
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) if (n * c_count * d >= 65536)
    for (long long i = 0; i < count; ++i) {
        assign_point(points, centers, static_cast<std::size_t>(i), c_count, d,
                     out_idx, best_sim);
    }
}

}  // namespace cowm::kernels
