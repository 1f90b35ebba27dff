#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace nonloc::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3, certification_failure = 4 };

// Text artifacts of one experiment before they are written.
struct Artifacts {
    std::string csv_name;
    std::string csv;
    nlohmann::json summary;
    int status = ExitCode::ok;  // nonzero when the run finished but a check did not hold
};

Artifacts compute_experiment(const RunConfig& cfg);

std::string sha256_hex(const std::string& bytes);
// %.17g, with inf / -inf / nan spelled out.
std::string fmt_number(double v);

// Writes <csv>, summary.json and manifest.json under out_dir. Returns the exit code;
// library exceptions are mapped to codes 2, 3 and 4 and logged to stderr.
int run_experiment(const RunConfig& cfg, const std::string& out_dir);

}  // namespace nonloc::cli
