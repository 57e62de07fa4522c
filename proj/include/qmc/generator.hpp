#pragma once

#include "qmc/matrix.hpp"
#include "qmc/sobol.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace qmc {

/// Descriptor of a uniform point source, carried through run metadata.
struct GeneratorSpec {
    enum class Kind { Pseudo, Sobol };

    Kind kind = Kind::Sobol;
    std::uint64_t seed = 0;     // Pseudo
    std::uint32_t section = 0;  // Sobol: non-overlapping section index

    static GeneratorSpec pseudo(std::uint64_t seed) {
        return GeneratorSpec{Kind::Pseudo, seed, 0};
    }
    static GeneratorSpec sobol(std::uint32_t section) {
        return GeneratorSpec{Kind::Sobol, 0, section};
    }

    std::string label() const;
    bool is_sobol() const { return kind == Kind::Sobol; }
};

/// Deterministic sub-seed for parallel pseudo-random substreams (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Source of uniform points in (0,1)^D.
///
/// Sobol' generators emit the points of one non-overlapping section: with
/// section index l and block size N, points with global 1-based indices
/// l*N+1 ... (l+1)*N. Pseudo generators are seeded streams; equal seeds give
/// identical output. Single-owner mutable state, movable but not shareable.
class PointGenerator {
public:
    static PointGenerator pseudo(std::uint64_t seed, std::size_t dimension);
    static PointGenerator sobol(std::size_t dimension, std::uint32_t section,
                                std::uint64_t block_size);

    /// Sobol' stream starting at an arbitrary 1-based global point index.
    static PointGenerator sobol_at(std::size_t dimension, std::uint64_t first_index);

    std::size_t dimension() const { return dimension_; }

    void next_points(std::size_t count, Matrix& out);
    Matrix next_points(std::size_t count);

    /// Uniform block mapped through the inverse normal CDF, row k from point k.
    void gaussian_block(std::size_t count, Matrix& out);
    Matrix gaussian_block(std::size_t count);

private:
    PointGenerator() = default;

    GeneratorSpec::Kind kind_ = GeneratorSpec::Kind::Pseudo;
    std::size_t dimension_ = 0;
    std::mt19937_64 rng_;
    std::optional<SobolSequence> sobol_;

    void fill_row(double* row);
};

/// Map a uniform matrix through the inverse normal CDF in place.
void to_gaussian(Matrix& block);

} // namespace qmc
