#include "qmc/reports.hpp"

#include "qmc/errors.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>

namespace qmc {

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xf];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::json to_json(const MarketModel& model) {
    nlohmann::json corr = nlohmann::json::array();
    for (std::size_t i = 0; i < model.n_assets(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < model.n_assets(); ++j) row.push_back(model.correlation(i, j));
        corr.push_back(row);
    }
    return {{"spots", model.spots},
            {"vols", model.vols},
            {"correlation", corr},
            {"rate", model.rate},
            {"maturity", model.maturity}};
}

nlohmann::json to_json(const TimeGrid& grid) { return {{"times", grid.times}}; }

nlohmann::json to_json(const PayoffSpec& payoff) {
    nlohmann::json j{{"type", payoff_label(payoff)}};
    if (const auto* p = std::get_if<AsianCall>(&payoff)) {
        j["strike"] = p->strike;
    } else if (const auto* p = std::get_if<DoubleKnockOutCall>(&payoff)) {
        j["strike"] = p->strike;
        j["lower_barrier"] = p->lower_barrier;
        j["upper_barrier"] = p->upper_barrier;
    } else if (const auto* p = std::get_if<CliquetOption>(&payoff)) {
        j["local_cap"] = p->local_cap;
        j["global_floor"] = p->global_floor;
    } else if (const auto* p = std::get_if<EuropeanBasketCall>(&payoff)) {
        j["strike"] = p->strike;
        j["weights"] = p->weights;
    } else if (const auto* p = std::get_if<AsianBasketCall>(&payoff)) {
        j["strike"] = p->strike;
        j["weights"] = p->weights;
    }
    return j;
}

nlohmann::json to_json(const GeneratorSpec& gen) {
    if (gen.kind == GeneratorSpec::Kind::Pseudo)
        return {{"kind", "pseudo"}, {"seed", gen.seed}};
    return {{"kind", "sobol"}, {"section", gen.section}};
}

nlohmann::json to_json(const Estimate& estimate) {
    return {{"value", estimate.value},
            {"std_error", estimate.std_error},
            {"std_error_probabilistic", estimate.probabilistic_error}};
}

nlohmann::json to_json(const GreekReport& report) {
    auto vec = [](const std::vector<Estimate>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : v) arr.push_back(to_json(e));
        return arr;
    };
    return {{"price", to_json(report.price)},
            {"delta", vec(report.delta)},
            {"gamma", vec(report.gamma)},
            {"vega", vec(report.vega)},
            {"method", report.method == GreekMethod::AAD ? "aad" : "fd"},
            {"vega_method", report.vega_method == GreekMethod::AAD ? "aad" : "fd"},
            {"fd_shift", report.fd_shift}};
}

nlohmann::json run_descriptor(const SimulationRun& run) {
    return {{"model", to_json(run.model)},
            {"grid", to_json(run.grid)},
            {"payoff", to_json(run.payoff)},
            {"scheme", run.scheme.normalized(run.model.n_assets()).label()},
            {"generator", to_json(run.generator)},
            {"paths", run.n_paths},
            {"fd_shift", run.fd_shift}};
}

std::string canonical_hash(const nlohmann::json& j) { return fnv1a_hex(j.dump()); }

void CsvDocument::provenance(const std::string& key, const std::string& value) {
    text_ += "# " + key + "=" + value + "\n";
}

void CsvDocument::header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i)
        text_ += (i ? "," : "") + columns[i];
    text_ += "\n";
}

void CsvDocument::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    QMC_REQUIRE(out.good(), "cannot open output file " + path);
    out << content;
    QMC_REQUIRE(out.good(), "failed writing " + path);
}

} // namespace qmc
