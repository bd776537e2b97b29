// Wall-time comparison of the serial reference kernels against their OpenMP
// variants. Not part of the test suite; build target cowm_bench.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cowm/kernels.hpp"
#include "cowm/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(int reps, const auto& fn) {
    fn();  // warm-up
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<double> random_block(std::size_t n, cowm::Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

void bench_matmul(std::size_t n, cowm::Rng& rng) {
    const auto a = random_block(n * n, rng);
    const auto b = random_block(n * n, rng);
    std::vector<double> c(n * n);
    const int reps = n <= 128 ? 20 : 5;
    const double serial = time_ms(reps, [&] {
        cowm::kernels::matmul_serial(a.data(), b.data(), c.data(), n, n, n);
    });
    const double parallel = time_ms(reps, [&] {
        cowm::kernels::matmul_parallel(a.data(), b.data(), c.data(), n, n, n);
    });
    std::printf("matmul %4zux%-4zu  serial %9.3f ms  omp %9.3f ms  speedup %.2fx\n", n, n,
                serial, parallel, serial / parallel);
}

void bench_assign(std::size_t n, std::size_t c, std::size_t d, cowm::Rng& rng) {
    const auto points = random_block(n * d, rng);
    const auto centers = random_block(c * d, rng);
    std::vector<std::size_t> idx(n);
    std::vector<double> sim(n);
    const double serial = time_ms(10, [&] {
        cowm::kernels::assign_serial(points.data(), n, centers.data(), c, d, idx.data(),
                                     sim.data());
    });
    const double parallel = time_ms(10, [&] {
        cowm::kernels::assign_parallel(points.data(), n, centers.data(), c, d, idx.data(),
                                       sim.data());
    });
    std::printf("assign n=%-6zu c=%-3zu d=%-4zu serial %9.3f ms  omp %9.3f ms  speedup %.2fx\n",
                n, c, d, serial, parallel, serial / parallel);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled (serial build)\n");
#endif
    cowm::Rng rng(42);
    for (std::size_t n : {64, 128, 256, 384}) bench_matmul(n, rng);
    for (std::size_t n : {2000, 20000, 100000}) bench_assign(n, 16, 64, rng);
    return 0;
}
