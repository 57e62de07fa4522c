#include <doctest.h>

#include "qmc/generator.hpp"
#include "qmc/normal.hpp"

#include <cmath>

TEST_CASE("pseudo generators with equal seeds emit identical streams") {
    auto a = qmc::PointGenerator::pseudo(1234, 2);
    auto b = qmc::PointGenerator::pseudo(1234, 2);
    CHECK(a.next_points(4) == b.next_points(4));

    auto c = qmc::PointGenerator::pseudo(1235, 2);
    CHECK_FALSE(a.next_points(4) == c.next_points(4));
}

TEST_CASE("pseudo uniforms stay inside the open unit interval") {
    auto g = qmc::PointGenerator::pseudo(7, 8);
    auto m = g.next_points(4096);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            CHECK((m(i, j) > 0.0 && m(i, j) < 1.0));
}

TEST_CASE("sobol sections compose from block size and index") {
    auto whole = qmc::PointGenerator::sobol(3, 0, 256);
    auto first = whole.next_points(512);
    auto section1 = qmc::PointGenerator::sobol(3, 1, 256);
    auto tail = section1.next_points(256);
    for (std::size_t k = 0; k < 256; ++k)
        for (std::size_t j = 0; j < 3; ++j) CHECK(first(256 + k, j) == tail(k, j));
}

TEST_CASE("gaussian block applies the inverse CDF columnwise") {
    auto g = qmc::PointGenerator::sobol(4, 0, 64);
    auto u = g.next_points(8);
    auto h = qmc::PointGenerator::sobol(4, 0, 64);
    auto z = h.gaussian_block(8);
    CHECK(z(0, 0) == 0.0); // first point is (0.5,...) in every coordinate
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(z(i, j) == qmc::inverse_normal_cdf(u(i, j)));
}

TEST_CASE("sobol column means vanish over a dyadic block") {
    auto g = qmc::PointGenerator::sobol(8, 0, 1 << 16);
    auto z = g.gaussian_block(1 << 16);
    for (std::size_t j = 0; j < 8; ++j) {
        double mean = 0.0;
        for (std::size_t k = 0; k < z.rows(); ++k) mean += z(k, j);
        mean /= static_cast<double>(z.rows());
        CHECK(std::fabs(mean) < 5e-3);
    }
}

TEST_CASE("pseudo column variance is close to one") {
    auto g = qmc::PointGenerator::pseudo(42, 4);
    auto z = g.gaussian_block(1 << 16);
    for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0.0, sq = 0.0;
        for (std::size_t k = 0; k < z.rows(); ++k) {
            mean += z(k, j);
            sq += z(k, j) * z(k, j);
        }
        mean /= static_cast<double>(z.rows());
        const double var = sq / static_cast<double>(z.rows()) - mean * mean;
        CHECK(std::fabs(var - 1.0) < 0.02);
    }
}
