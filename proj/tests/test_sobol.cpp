#include <doctest.h>

#include "qmc/errors.hpp"
#include "qmc/sobol.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

namespace {

// Bit-reversal oracle for dimension 1: coordinate of the point with 1-based
// stream index k is the base-2 radical inverse of gray(k).
double radical_inverse_gray(std::uint64_t k) {
    std::uint64_t g = k ^ (k >> 1);
    double v = 0.0, base = 0.5;
    while (g) {
        if (g & 1u) v += base;
        g >>= 1;
        base *= 0.5;
    }
    return v;
}

std::vector<std::vector<double>> first_points(std::size_t dim, std::size_t count) {
    qmc::SobolSequence seq(dim);
    std::vector<std::vector<double>> out(count, std::vector<double>(dim));
    for (auto& row : out) seq.next_point(row.data());
    return out;
}

} // namespace

TEST_CASE("dimension 1 matches the radical-inverse oracle") {
    auto pts = first_points(1, 3);
    CHECK(pts[0][0] == 0.5);
    CHECK(pts[1][0] == 0.75);
    CHECK(pts[2][0] == 0.25);
    qmc::SobolSequence seq(1);
    for (std::uint64_t k = 1; k <= 1000; ++k) {
        double x;
        seq.next_point(&x);
        CHECK(x == radical_inverse_gray(k));
    }
}

TEST_CASE("first 2^10 points fill the quadrants exactly") {
    auto pts = first_points(2, 1024);
    int counts[4] = {0, 0, 0, 0};
    for (const auto& p : pts) counts[(p[0] >= 0.5 ? 2 : 0) + (p[1] >= 0.5 ? 1 : 0)]++;
    for (int c : counts) CHECK(c == 256);
}

TEST_CASE("one-dimensional projections are stratified at full block size") {
    // The emitted stream skips the all-zeros point with raw index 0, so the
    // first N-1 points plus the implicit origin form the full dyadic block:
    // every interval [i/N,(i+1)/N) with i >= 1 holds exactly one point and
    // [0,1/N) holds none.
    for (std::size_t dim : {1u, 2u, 5u, 16u}) {
        for (std::size_t m : {4u, 8u, 12u}) {
            const std::size_t n = std::size_t(1) << m;
            auto pts = first_points(dim, n - 1);
            for (std::size_t j = 0; j < dim; ++j) {
                std::vector<int> cell(n, 0);
                for (const auto& p : pts) cell[static_cast<std::size_t>(p[j] * n)]++;
                CHECK(cell[0] == 0);
                for (std::size_t i = 1; i < n; ++i) CHECK(cell[i] == 1);
            }
        }
    }
}

TEST_CASE("coordinates stay inside the open unit interval") {
    auto pts = first_points(64, 4096);
    for (const auto& p : pts)
        for (double x : p) CHECK((x > 0.0 && x < 1.0));
}

TEST_CASE("consecutive sections are disjoint") {
    const std::size_t n = 512;
    qmc::SobolSequence a(8), b(8);
    a.seek(1);          // section 0
    b.seek(n + 1);      // section 1
    std::set<std::vector<double>> seen;
    std::vector<double> p(8);
    for (std::size_t k = 0; k < n; ++k) {
        a.next_point(p.data());
        seen.insert(p);
    }
    for (std::size_t k = 0; k < n; ++k) {
        b.next_point(p.data());
        CHECK(seen.count(p) == 0);
    }
}

TEST_CASE("seek reproduces the sequential stream") {
    qmc::SobolSequence seq(6);
    std::vector<double> p(6), q(6);
    for (int k = 1; k <= 300; ++k) seq.next_point(p.data());
    qmc::SobolSequence jumped(6);
    jumped.seek(301);
    seq.next_point(p.data());
    jumped.next_point(q.data());
    CHECK(p == q);
}

TEST_CASE("dimension beyond the table is a configuration error") {
    const auto& table = qmc::SobolTable::bundled();
    CHECK(table.max_dimension() >= 1111);
    CHECK_THROWS_AS(qmc::SobolSequence(table.max_dimension() + 1), qmc::ConfigError);
    try {
        qmc::SobolSequence seq(table.max_dimension() + 1);
    } catch (const qmc::ConfigError& e) {
        CHECK(std::string(e.what()).find(std::to_string(table.max_dimension())) !=
              std::string::npos);
    }
}
