#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "nonloc/kernel.hpp"
#include "nonloc/funcspace.hpp"
#include "nonloc/nonlocal_eval.hpp"
#include "nonloc/quadrature.hpp"

namespace nonloc::cli {

// Schema violations, one "path: message" entry each.
struct ConfigError : std::runtime_error {
    std::vector<std::string> errors;
    explicit ConfigError(std::vector<std::string> errs);
};

inline constexpr int kSchemaVersion = 1;

struct KernelBlock {
    int n = 1;
    double sigma = 1.5;
    double lambda_lo = 1.0, lambda_hi = 1.0;
    std::string profile = "isotropic";  // isotropic | two_valued | table
    std::vector<double> data{1.0};

    KernelSpec build() const;
};

struct FunctionBlock {
    std::string kind = "slab";  // slab | bump | power | constant | spike | csv
    int n = 1;
    double L = 4.0;
    double h = 1.0 / 64.0;
    double lo = 1.0, hi = 2.0, value = 1.0;  // slab; value also for constant and csv exteriors
    double c = 1.0;                          // bump height
    double p = 0.5, cap = 1.5;               // power: min(|x|, cap)^p
    std::string path;                        // csv

    BoundedFunction build() const;
};

struct EvalParams {
    std::string op = "linear";  // linear | pucci_plus | pucci_minus
    double t = 0.5;
    bool zero_grad = false;
    std::vector<Vec> points;
    int random_points = 0;
    double radius = 1.0;
};

struct BarrierCheckParams {
    int n = 1;
    double lambda_lo = 1.0, lambda_hi = 1.0;
    int p_max = 16;
    std::vector<double> sigmas{1.5, 1.8, 1.9, 1.95, 1.99};
    double delta = 0.125;
    bool defect = true;
};

struct AbpParams {
    double sigma = 1.5;
    double f_value = 1.0;
    int depth_cap = 12;
    int k_max = 80;
};

struct OperatorBlock {
    std::string type = "pucci";  // pucci | linear | infsup
    double lambda_lo = 1.0, lambda_hi = 1.0, sigma = 1.5;
    int sign = 1;
    double t = kInf;
    std::vector<std::vector<KernelBlock>> table;
    std::vector<double> t_set{0.5, 1.0, 2.0, kInf};
    int mode = 1;
};

struct SolveParams {
    int n = 1;
    double L = 1.25, h = 1.0 / 64.0;
    Vec center{0.0, 0.0};
    double radius = 1.0;
    OperatorBlock op;
    double g_value = 0.0, f_value = -1.0;
    double tol = 1e-6;
    int max_iter = 200000;
};

struct DecayParams {
    int n = 1;
    double p = 2.0, sigma = 1.5;
    double lambda_lo = 1.0, lambda_hi = 1.0;
    double eps0 = 0.01, nu = 0.1;
    double h = 1.0 / 256.0;
    int t_count = 20;
    double t_span = 4096.0;  // ratio between the largest and smallest t
};

struct HarnackParams {
    int n = 1;
    std::vector<double> sigmas{1.2, 1.5, 1.8, 1.95};
    double L = 2.25, h = 1.0 / 16.0;
    double C0 = 1.0;
    double tol = 1e-6;
};

struct HoelderParams {
    std::string source = "function";  // function | solve
    int N = 1, k_max = 10;
    Vec center{0.0, 0.0};
};

struct C1AlphaParams {
    double beta = 1.0, delta = 1.0;
    std::vector<Vec> h_set;
    int N = 1, k_max = 10;
};

using Params = std::variant<EvalParams, BarrierCheckParams, AbpParams, SolveParams, DecayParams, HarnackParams,
                            HoelderParams, C1AlphaParams>;

struct RunConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::optional<KernelBlock> kernel;
    std::optional<FunctionBlock> function;
    std::optional<SolveParams> solve;  // probe-hoelder with source = solve
    QuadConfig quad;
    Params params;
    nlohmann::json raw;  // the parsed document, for hashing
};

const std::vector<std::string>& experiment_kinds();

RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_file(const std::string& path);

}  // namespace nonloc::cli
