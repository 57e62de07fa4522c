#pragma once

#include "qmc/analysis.hpp"
#include "qmc/engine.hpp"
#include "qmc/gsa.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qmc {

inline constexpr const char* kEngineVersion = "0.1.0";

/// FNV-1a 64-bit hash, hex encoded. Used for config hashes and fixture keys.
std::string fnv1a_hex(const std::string& data);

/// Shortest round-trip decimal for a double; deterministic across runs.
std::string format_double(double v);

nlohmann::json to_json(const MarketModel& model);
nlohmann::json to_json(const TimeGrid& grid);
nlohmann::json to_json(const PayoffSpec& payoff);
nlohmann::json to_json(const GeneratorSpec& gen);
nlohmann::json to_json(const Estimate& estimate);
nlohmann::json to_json(const GreekReport& report);

/// Full run descriptor (model, grid, payoff, scheme, generator, paths, shift).
nlohmann::json run_descriptor(const SimulationRun& run);

/// Hash of a canonically serialized JSON document (nlohmann sorts keys).
std::string canonical_hash(const nlohmann::json& j);

/// CSV document with "# key=value" provenance comments before the header.
class CsvDocument {
public:
    void provenance(const std::string& key, const std::string& value);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

void write_file(const std::string& path, const std::string& content);

} // namespace qmc
