#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sle::cli {

/// Everything needed to reproduce one CLI run; echoed into every JSON output.
struct RunManifest {
    std::string command;
    double kappa = 2.0;
    std::size_t n = 64;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds{1};
    std::string y0 = "auto";
    std::string scheme = "nv";
    std::string against = "euler-ref";
    std::optional<double> tol;
    int max_depth = 8;
    bool zero_noise = false;
    std::vector<std::size_t> ladder{64, 128, 256, 512, 1024, 2048, 4096};
    std::size_t ref_n = 32768;
    double p = 4.0;
    std::size_t samples = 200000;
    std::vector<std::size_t> bound_n{16, 64, 256, 1024, 4096};
    bool phi1 = false;
    bool phi2 = false;
    double beta1 = 0.5;
    double eps0 = 0.5;
    double alpha = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
    double c4 = 1.0;
    double eps_n = 0.0;
    int substeps = 64;
    double rel_move = 0.01;
    bool timing = true;
    std::string out = "-";
    std::string format = "csv";
    unsigned threads = 0;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

/// Raised for command-line misuse; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Executes a parsed manifest, writing to manifest.out (or `out` for "-").
void execute(const RunManifest& manifest, std::ostream& out, std::ostream& log);

/// Full command-line entry point. Returns 0, 1 (runtime failure) or 2 (usage).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "1..20" or "1,4,9" into a list of integers.
std::vector<std::uint64_t> parse_list(const std::string& text);

}  // namespace sle::cli
