// End-to-end checks of the command-line runner: exit codes, schema
// diagnostics and byte-identical reruns.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    if (!ok) {
        ++failures;
        std::cerr << "FAIL: " << what << "\n";
    }
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

const char* kAsianConfig = R"({
  "model": {"spots": [100], "vols": [0.3]},
  "grid": {"steps": 8},
  "payoff": {"type": "asian", "strike": 100},
  "schemes": ["bbd_chol"],
  "generators": [{"kind": "sobol", "section": 0}],
  "paths": 2048
})";

} // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "qmc_cli_tests";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path config = work / "asian.json";
    write(config, kAsianConfig);

    // price runs succeed and rerun byte-identically
    check(run_cli("price --config " + config.string() + " --out " + (work / "a").string()) == 0,
          "price exits 0");
    check(run_cli("price --config " + config.string() + " --out " + (work / "b").string()) == 0,
          "price rerun exits 0");
    for (const char* name : {"price_sobol0_bbd_chol.csv", "price_sobol0_bbd_chol.json"}) {
        const std::string a = slurp(work / "a" / name);
        const std::string b = slurp(work / "b" / name);
        check(!a.empty(), std::string(name) + " written");
        check(a == b, std::string(name) + " byte-identical on rerun");
    }

    // greeks emit every block with methods
    check(run_cli("greeks --config " + config.string() + " --out " + (work / "g").string()) == 0,
          "greeks exits 0");
    const std::string greeks = slurp(work / "g" / "greeks_sobol0_bbd_chol.csv");
    check(greeks.find("delta") != std::string::npos, "greeks csv lists deltas");
    check(greeks.find("# config_hash=") != std::string::npos, "provenance embedded");

    // schema violations exit 2 with a diagnostic naming the field
    write(work / "broken.json", R"({"model": {"spots": [100], "vols": [0.3]},
                                    "grid": {"steps": 8}})");
    check(run_cli("price --config " + (work / "broken.json").string()) == 2,
          "missing payoff section exits 2");
    write(work / "unknown.json", std::string(kAsianConfig).insert(1, "\"extra\": 1,"));
    check(run_cli("price --config " + (work / "unknown.json").string()) == 2,
          "unknown key exits 2");

    // rejected gsa targets are configuration errors
    write(work / "cliquet.json", R"({
      "model": {"spots": [100], "vols": [0.3]},
      "grid": {"steps": 8},
      "payoff": {"type": "cliquet", "local_cap": 0.08, "global_floor": 0.16},
      "targets": ["delta_0"],
      "gsa": {"samples": 256}
    })");
    check(run_cli("gsa --config " + (work / "cliquet.json").string() + " --out " +
                  (work / "z").string()) == 2,
          "identically zero gsa target exits 2");

    // speedup without a fixture points at the fixtures subcommand
    write(work / "speed.json", std::string(kAsianConfig).insert(1, R"(
      "speedup": {"method_a": {"generator": {"kind": "pseudo", "seed": 1}, "scheme": "sd_chol"},
                   "method_b": {"generator": {"kind": "sobol", "section": 0}, "scheme": "bbd_chol"}},
      "convergence": {"n_min_log2": 8, "n_max_log2": 11, "runs": 4},)"));
    const fs::path empty_store = work / "no_fixtures";
    fs::create_directories(empty_store);
    check(run_cli("speedup --config " + (work / "speed.json").string() + " --fixtures-dir " +
                  empty_store.string() + " --out " + (work / "s").string()) == 2,
          "speedup without fixture exits 2");

    // stability produces the windowed table
    write(work / "stab.json", std::string(kAsianConfig).insert(1, R"(
      "stability": {"n_min": 100, "n_max": 1000, "points": 20, "windows": 5},)"));
    check(run_cli("stability --config " + (work / "stab.json").string() + " --out " +
                  (work / "st").string()) == 0,
          "stability exits 0");
    const std::string stab = slurp(work / "st" / "stability_sobol0_bbd_chol_price.csv");
    check(stab.find("window,mean,vol,log_return") != std::string::npos,
          "stability csv has the window table");

    if (failures == 0) std::cout << "cli_tests: all checks passed\n";
    return failures == 0 ? 0 : 1;
}
