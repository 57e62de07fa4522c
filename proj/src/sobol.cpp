#include "qmc/sobol.hpp"

#include "qmc/errors.hpp"

#include <bit>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

namespace qmc {

namespace {

constexpr double kNorm = 1.0 / 4294967296.0; // 2^-32

std::string default_table_path() {
    if (const char* env = std::getenv("QMC_DATA_DIR"))
        return std::string(env) + "/sobol/new-joe-kuo-6.1280.txt";
    return std::string(QMC_DATA_DIR) + "/sobol/new-joe-kuo-6.1280.txt";
}

} // namespace

SobolTable SobolTable::load(const std::string& path) {
    std::ifstream in(path);
    QMC_REQUIRE(in.good(), "sobol: cannot open direction-number table at " + path);

    SobolTable table;
    table.id_ = path.substr(path.find_last_of('/') + 1);

    // Dimension 1: van der Corput, v_j = 2^(31-j).
    std::vector<std::uint32_t> first(kBits);
    for (int j = 0; j < kBits; ++j) first[j] = 1u << (kBits - 1 - j);
    table.directions_.push_back(std::move(first));

    std::string line;
    std::size_t expected_dim = 2;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::uint64_t d = 0;
        if (!(row >> d)) continue; // header line ("d s a m_i")
        unsigned s = 0, a = 0;
        row >> s >> a;
        QMC_REQUIRE(d == expected_dim, "sobol: table rows out of order at dimension " +
                                           std::to_string(d));
        QMC_REQUIRE(s >= 1 && s < kBits, "sobol: bad polynomial degree in table");
        std::vector<std::uint32_t> m(s);
        for (unsigned j = 0; j < s; ++j) {
            QMC_REQUIRE(static_cast<bool>(row >> m[j]), "sobol: truncated table row");
            QMC_REQUIRE(m[j] % 2 == 1 && m[j] < (1u << (j + 1)),
                        "sobol: invalid initial direction number");
        }
        std::vector<std::uint32_t> v(kBits);
        for (unsigned j = 0; j < s; ++j) v[j] = m[j] << (kBits - 1 - j);
        for (unsigned j = s; j < kBits; ++j) {
            std::uint32_t n = v[j - s] ^ (v[j - s] >> s);
            for (unsigned k = 1; k < s; ++k)
                if ((a >> (s - 1 - k)) & 1u) n ^= v[j - k];
            v[j] = n;
        }
        table.directions_.push_back(std::move(v));
        ++expected_dim;
    }
    QMC_REQUIRE(table.directions_.size() >= 2, "sobol: table has no dimension rows");
    return table;
}

const SobolTable& SobolTable::bundled() {
    static const SobolTable table = load(default_table_path());
    return table;
}

SobolSequence::SobolSequence(std::size_t dimension, const SobolTable& table)
    : dimension_(dimension), table_(&table), state_(dimension, 0) {
    QMC_REQUIRE(dimension >= 1, "sobol: dimension must be positive");
    QMC_REQUIRE(dimension <= table.max_dimension(),
                "sobol: dimension " + std::to_string(dimension) +
                    " exceeds the direction-number table (maximum " +
                    std::to_string(table.max_dimension()) + ")");
    seek(1);
}

void SobolSequence::seek(std::uint64_t index) {
    QMC_REQUIRE(index >= 1, "sobol: point indices are 1-based");
    QMC_REQUIRE(index < (std::uint64_t(1) << 32), "sobol: index exceeds 32-bit period");
    const std::uint64_t n = index - 1; // state corresponds to the previous point
    const std::uint64_t gray = n ^ (n >> 1);
    for (std::size_t d = 0; d < dimension_; ++d) {
        const std::uint32_t* v = table_->directions(d + 1);
        std::uint32_t x = 0;
        for (int b = 0; b < SobolTable::kBits; ++b)
            if ((gray >> b) & 1u) x ^= v[b];
        state_[d] = x;
    }
    next_ = index;
}

void SobolSequence::next_point(double* out) {
    // Advancing from point n-1 to point n flips direction bit ctz(n).
    const int bit = std::countr_zero(next_);
    for (std::size_t d = 0; d < dimension_; ++d) {
        state_[d] ^= table_->directions(d + 1)[bit];
        out[d] = state_[d] * kNorm;
    }
    ++next_;
}

} // namespace qmc
