#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace qmc {

/// Direction numbers for Sobol' sequences, loaded from the bundled text
/// table (one row per dimension: "d s a m_1 ... m_s"). Dimension 1 is the
/// built-in van der Corput column and has no row in the file.
class SobolTable {
public:
    static const SobolTable& bundled();
    static SobolTable load(const std::string& path);

    std::size_t max_dimension() const { return directions_.size(); }
    const std::uint32_t* directions(std::size_t dim_one_based) const {
        return directions_[dim_one_based - 1].data();
    }
    const std::string& id() const { return id_; }

    static constexpr int kBits = 32;

private:
    std::vector<std::vector<std::uint32_t>> directions_; // [dim][bit], shifted to bit 31
    std::string id_;
};

/// Sobol' point generator in Gray-code order. Point indices are 1-based;
/// index 0 (the all-zeros point) is never emitted, so every coordinate of
/// every emitted point lies in the open interval (0,1).
class SobolSequence {
public:
    explicit SobolSequence(std::size_t dimension, const SobolTable& table = SobolTable::bundled());

    std::size_t dimension() const { return dimension_; }

    /// Position the stream so the next emitted point has this 1-based index.
    void seek(std::uint64_t index);

    /// Emit the next point into out[0..dimension).
    void next_point(double* out);

    /// 1-based index of the next point to be emitted.
    std::uint64_t next_index() const { return next_; }

private:
    std::size_t dimension_;
    const SobolTable* table_;
    std::vector<std::uint32_t> state_;
    std::uint64_t next_ = 1;
};

} // namespace qmc
