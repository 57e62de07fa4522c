#include "qmc/generator.hpp"

#include "qmc/errors.hpp"
#include "qmc/normal.hpp"

namespace qmc {

std::string GeneratorSpec::label() const {
    if (kind == Kind::Pseudo) return "pseudo(seed=" + std::to_string(seed) + ")";
    return "sobol(section=" + std::to_string(section) + ")";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

PointGenerator PointGenerator::pseudo(std::uint64_t seed, std::size_t dimension) {
    QMC_REQUIRE(dimension >= 1, "generator: dimension must be positive");
    PointGenerator g;
    g.kind_ = GeneratorSpec::Kind::Pseudo;
    g.dimension_ = dimension;
    g.rng_.seed(seed);
    return g;
}

PointGenerator PointGenerator::sobol(std::size_t dimension, std::uint32_t section,
                                     std::uint64_t block_size) {
    return sobol_at(dimension, std::uint64_t(section) * block_size + 1);
}

PointGenerator PointGenerator::sobol_at(std::size_t dimension, std::uint64_t first_index) {
    PointGenerator g;
    g.kind_ = GeneratorSpec::Kind::Sobol;
    g.dimension_ = dimension;
    g.sobol_.emplace(dimension);
    g.sobol_->seek(first_index);
    return g;
}

void PointGenerator::fill_row(double* row) {
    if (kind_ == GeneratorSpec::Kind::Sobol) {
        sobol_->next_point(row);
        return;
    }
    for (std::size_t j = 0; j < dimension_; ++j) {
        // 53-bit mantissa centered on half-steps, so 0 and 1 are unreachable.
        const std::uint64_t bits = rng_() >> 11;
        row[j] = (static_cast<double>(bits) + 0.5) * 0x1p-53;
    }
}

void PointGenerator::next_points(std::size_t count, Matrix& out) {
    QMC_REQUIRE(count >= 1, "generator: count must be positive");
    out.resize(count, dimension_);
    for (std::size_t k = 0; k < count; ++k) fill_row(out.row(k));
}

Matrix PointGenerator::next_points(std::size_t count) {
    Matrix m;
    next_points(count, m);
    return m;
}

void PointGenerator::gaussian_block(std::size_t count, Matrix& out) {
    next_points(count, out);
    to_gaussian(out);
}

Matrix PointGenerator::gaussian_block(std::size_t count) {
    Matrix m;
    gaussian_block(count, m);
    return m;
}

void to_gaussian(Matrix& block) {
    double* p = block.data();
    const std::size_t n = block.rows() * block.cols();
    for (std::size_t i = 0; i < n; ++i) p[i] = inverse_normal_cdf(p[i]);
}

} // namespace qmc
