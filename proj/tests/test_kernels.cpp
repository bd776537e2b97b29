#include <doctest.h>

#include "cowm/kernels.hpp"
#include "cowm/rng.hpp"

#include <vector>

using namespace cowm;

TEST_SUITE("kernels") {

TEST_CASE("parallel matmul is bit-identical to the serial reference") {
    Rng rng(1);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t m = 1 + rng.index(70);
        const std::size_t k = 1 + rng.index(70);
        const std::size_t n = 1 + rng.index(70);
        std::vector<double> a(m * k), b(k * n);
        for (double& v : a) v = rng.normal();
        for (double& v : b) v = rng.normal();
        std::vector<double> cs(m * n), cp(m * n, -1.0);
        kernels::matmul_serial(a.data(), b.data(), cs.data(), m, k, n);
        kernels::matmul_parallel(a.data(), b.data(), cp.data(), m, k, n);
        REQUIRE(cs == cp);
    }
}

TEST_CASE("parallel assignment matches serial, including tie-breaks") {
    Rng rng(2);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n = 1 + rng.index(500);
        const std::size_t c = 1 + rng.index(9);
        const std::size_t d = 2 + rng.index(24);
        std::vector<double> points(n * d), centers(c * d);
        for (double& v : points) v = rng.normal();
        for (double& v : centers) v = rng.normal();
        std::vector<std::size_t> is(n), ip(n);
        std::vector<double> ss(n), sp(n);
        kernels::assign_serial(points.data(), n, centers.data(), c, d, is.data(), ss.data());
        kernels::assign_parallel(points.data(), n, centers.data(), c, d, ip.data(), sp.data());
        REQUIRE(is == ip);
        REQUIRE(ss == sp);
    }
}

TEST_CASE("assignment tie goes to the lowest index") {
    // Two identical centers: every point must pick center 0.
    const std::vector<double> centers{1.0, 0.0, 1.0, 0.0};
    const std::vector<double> points{0.3, 0.7, -0.2, 0.5};
    std::vector<std::size_t> idx(2);
    kernels::assign_serial(points.data(), 2, centers.data(), 2, 2, idx.data(), nullptr);
    CHECK(idx[0] == 0);
    CHECK(idx[1] == 0);
}

}  // TEST_SUITE
