#pragma once

#include <cstddef>

// Low-level data-parallel kernels. Each has a serial reference and an OpenMP
// variant; both compute every output element with the same accumulation
// order, so results are bit-identical and the serial version doubles as the
// test oracle. See bench/ for the throughput comparison.
namespace cowm::kernels {

// c = a * b. a is m x k, b is k x n, c is m x n, all row-major.
// c must not alias a or b.
void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_parallel(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n);

// Cosine-similarity argmax: for each of n points (rows of length d) pick the
// center (c_count rows of length d) with the largest dot product, ties broken
// by lowest index. best_sim may be null.
void assign_serial(const double* points, std::size_t n,
                   const double* centers, std::size_t c_count, std::size_t d,
                   std::size_t* out_idx, double* best_sim);
void assign_parallel(const double* points, std::size_t n,
                     const double* centers, std::size_t c_count, std::size_t d,
                     std::size_t* out_idx, double* best_sim);

}  // namespace cowm::kernels
