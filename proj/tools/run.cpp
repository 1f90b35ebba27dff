#include "run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "nonloc/barriers.hpp"
#include "nonloc/envelope_abp.hpp"
#include "nonloc/probes.hpp"
#include "nonloc/solver.hpp"

namespace nonloc::cli {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string fmt_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// JSON has no infinity; such values are written as strings.
json num(double v)
{
    if (std::isfinite(v))
        return v;
    return fmt_number(v);
}

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header)
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            os_ << (i ? "," : "") << header[i];
        os_ << '\n';
    }
    void row(const std::vector<double>& vals)
    {
        for (std::size_t i = 0; i < vals.size(); ++i)
            os_ << (i ? "," : "") << fmt_number(vals[i]);
        os_ << '\n';
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

std::vector<std::string> coord_names(int n, const std::string& prefix = "")
{
    return n == 1 ? std::vector<std::string>{prefix + "x"} : std::vector<std::string>{prefix + "x", prefix + "y"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<double> coords(const Vec& x, int n)
{
    return n == 1 ? std::vector<double>{x[0]} : std::vector<double>{x[0], x[1]};
}

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

SolveConfig make_solve_config(const SolveParams& p, const std::optional<KernelBlock>& kernel)
{
    SolveConfig c;
    c.n = p.n;
    c.L = p.L;
    c.h = p.h;
    c.omega = {p.center, p.radius};
    const OperatorBlock& o = p.op;
    if (o.type == "pucci") {
        c.op = PucciSpec{o.lambda_lo, o.lambda_hi, o.sigma, o.sign};
    } else if (o.type == "linear") {
        c.op = LinearSpec{kernel.value().build(), o.t};
    } else {
        KernelTable table;
        for (const auto& row : o.table) {
            std::vector<KernelSpec> r;
            for (const auto& k : row)
                r.push_back(k.build());
            table.push_back(r);
        }
        c.op = InfSupSpec{table, o.t_set, o.mode};
    }
    double g = p.g_value, f = p.f_value;
    c.g = [g](const Vec&) { return g; };
    c.g_far = g;
    c.f = [f](const Vec&) { return f; };
    c.tol = p.tol;
    c.max_iter = p.max_iter;
    return c;
}

json solve_summary(const SolveResult& r)
{
    json hist = json::array();
    for (std::size_t i = 0; i < r.residuals.size(); ++i)
        if (i % 100 == 0 || i + 1 == r.residuals.size())
            hist.push_back(json{{"step", i}, {"residual", num(r.residuals[i])}});
    return json{{"iterations", r.iterations}, {"converged", r.converged}, {"residual", num(r.residual)},
                {"rejected_steps", r.rejected},   {"tau", num(r.tau)},         {"residual_history", hist}};
}

Artifacts run_eval(const RunConfig& cfg, const EvalParams& p)
{
    BoundedFunction u = cfg.function->build();
    const int n = u.dim();
    std::vector<Vec> pts = p.points;
    std::mt19937_64 rng(cfg.seed);
    for (int i = 0; i < p.random_points; ++i) {
        Vec x{0.0, 0.0};
        for (int k = 0; k < n; ++k)
            x[k] = p.radius * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0);
        pts.push_back(x);
    }
    Csv csv(concat(coord_names(n), {"value", "near", "mid", "tail", "err_est"}));
    double worst = 0.0;
    for (const Vec& x : pts) {
        Vec g = p.zero_grad ? Vec{0.0, 0.0} : gradient(u, x);
        OperatorValue v;
        if (p.op == "linear") {
            v = linear_op(u, x, g, p.t, cfg.kernel->build(), cfg.quad);
        } else {
            const KernelBlock& k = *cfg.kernel;
            v = pucci(u, x, g, k.lambda_lo, k.lambda_hi, k.sigma, p.op == "pucci_plus" ? 1 : -1, cfg.quad);
        }
        worst = std::max(worst, v.err_est);
        csv.row(concat(coords(x, n), {v.value, v.near_field, v.mid_field, v.tail, v.err_est}));
    }
    Artifacts a;
    a.csv_name = "eval.csv";
    a.csv = csv.str();
    a.summary = {{"points", pts.size()}, {"operator", p.op}, {"t", num(p.t)}, {"max_err_est", num(worst)}};
    return a;
}

Artifacts run_barrier(const RunConfig& cfg, const BarrierCheckParams& p)
{
    ScanResult s = scan_barrier(p.n, p.lambda_lo, p.lambda_hi, cfg.quad, p.p_max, p.sigmas, p.delta);
    Csv csv({"p", "sigma", "margin"});
    for (const ScanRow& r : s.rows)
        csv.row({r.p, r.sigma, r.margin});
    Artifacts a;
    a.csv_name = "barrier.csv";
    a.csv = csv.str();
    json cert{{"found", s.found}};
    if (s.found) {
        const BarrierParams& b = s.params;
        cert.update({{"p", b.p},
                     {"sigma_star", b.sigma_star},
                     {"delta", b.delta},
                     {"r", b.r},
                     {"delta0", num(b.delta0)},
                     {"delta0_limit", num(delta0_limit(b.p, p.n))},
                     {"c_psi", num(b.c_psi)},
                     {"rho0", num(b.rho0)},
                     {"margin", num(b.margin)}});
        if (p.defect) {
            DefectResult d = psi_defect(b.sigma_star, build_psi(p.n, b.p, b.delta), p.lambda_lo, p.lambda_hi, cfg.quad);
            cert["defect"] = {{"sup", num(d.sup)}, {"outside_min", num(d.outside_min)},
                              {"outside_tested", d.outside_tested}};
        }
    } else {
        a.status = ExitCode::certification_failure;
    }
    a.summary = {{"certificate", cert}};
    return a;
}

Artifacts run_abp(const RunConfig& cfg, const AbpParams& p)
{
    BoundedFunction u = cfg.function->build();
    const int n = u.dim();
    EnvelopeResult env = concave_envelope(u);
    double fv = p.f_value;
    ScalarField f = [fv](const Vec&) { return fv; };
    CubeConfig cc;
    cc.depth_cap = p.depth_cap;
    CubeCover cover = calibrate_cover(env, f, p.sigma, cc, p.k_max);
    AlexandroffResult ag = alexandroff_aggregate(cover, env, f);
    Csv csv(concat(coord_names(n, "center_"), {"side", "depth", "e", "f", "lhs_e", "rhs_e", "measure_f"}));
    for (const Cube& q : cover.cubes)
        csv.row(concat(coords(q.center, n), {q.side, static_cast<double>(q.depth), q.e ? 1.0 : 0.0, q.f ? 1.0 : 0.0,
                                             q.lhs_e, q.rhs_e, q.measure_f}));
    Artifacts a;
    a.csv_name = "cubes.csv";
    a.csv = csv.str();
    a.summary = {{"contact_nodes", env.contact_count()},
                 {"cubes", cover.cubes.size()},
                 {"C", num(cover.C)},
                 {"gamma", num(cover.gamma_measured)},
                 {"eta", num(cover.eta)},
                 {"d0", num(cover.d0)},
                 {"max_depth_hit", cover.max_depth_hit},
                 {"properties",
                  {{"a", cover.a}, {"b", cover.b}, {"c", cover.c}, {"d", cover.d}, {"e", cover.e_all}, {"f", cover.f_all}}},
                 {"aggregate",
                  {{"lhs", num(ag.lhs)},
                   {"rhs", num(ag.rhs)},
                   {"implied_C", num(ag.implied_C)},
                   {"sup_u_plus", num(ag.sup_u_plus)},
                   {"f_norm", num(ag.f_norm)},
                   {"abp_ratio", num(ag.abp_ratio)}}}};
    if (cover.max_depth_hit)
        a.status = ExitCode::certification_failure;
    return a;
}

Artifacts run_solve(const RunConfig& cfg, const SolveParams& p)
{
    SolveResult r = solve_dirichlet(make_solve_config(p, cfg.kernel));
    Csv csv(concat(coord_names(p.n), {"value"}));
    for (std::size_t k = 0; k < r.u.node_count(); ++k)
        csv.row(concat(coords(r.u.node(k), p.n), {r.u.values()[k]}));
    Artifacts a;
    a.csv_name = "solution.csv";
    a.csv = csv.str();
    a.summary = solve_summary(r);
    if (!r.converged)
        a.status = ExitCode::numerical_failure;
    return a;
}

Artifacts run_decay(const RunConfig& cfg, const DecayParams& p)
{
    BarrierScenario sc = barrier_scenario(p.n, p.p, p.sigma, p.lambda_lo, p.lambda_hi, p.eps0, cfg.quad, p.nu, p.h);
    double top = 0.0;
    for (std::size_t k = 0; k < sc.u.node_count(); ++k) {
        Vec x = sc.u.node(k);
        if (norm(x, p.n) <= 0.5)
            top = std::max(top, sc.u.values()[k]);
    }
    std::vector<double> ts;
    for (int i = 0; i < p.t_count; ++i)
        ts.push_back(top * std::pow(p.t_span, -1.0 + static_cast<double>(i) / (p.t_count - 1)));
    DecayFit fit = levelset_decay(sc.u, {0.0, 0.0}, 0.5, p.eps0, p.sigma, ts);
    Csv csv({"t", "measure", "envelope_curve"});
    for (std::size_t i = 0; i < ts.size(); ++i)
        csv.row({ts[i], fit.measure[i], fit.step ? 0.0 : fit.curve(ts[i], fit.C_envelope)});
    Artifacts a;
    a.csv_name = "decay.csv";
    a.csv = csv.str();
    a.summary = {{"kappa", num(sc.kappa)},
                 {"defect_sup", num(sc.defect_sup)},
                 {"inf_q1", num(sc.inf_q1)},
                 {"nu", sc.nu},
                 {"M", num(sc.M)},
                 {"measure_at_M", num(sc.measure_at_M)},
                 {"step", fit.step},
                 {"eps_star", num(fit.eps_star)},
                 {"C", num(fit.C)},
                 {"C_envelope", num(fit.C_envelope)},
                 {"dominates", fit.dominates},
                 {"dominates_all", fit.dominates_all},
                 {"nonincreasing", fit.nonincreasing}};
    return a;
}

SolveParams torsion_params(int n, double sigma, double L, double h, double tol)
{
    SolveParams s;
    s.n = n;
    s.L = L;
    s.h = h;
    s.radius = 2.0;
    s.op.type = "linear";
    s.op.sigma = sigma;
    s.op.t = kInf;
    s.g_value = 0.0;
    s.f_value = -1.0;
    s.tol = tol;
    return s;
}

Artifacts run_harnack(const RunConfig&, const HarnackParams& p)
{
    Csv csv({"sigma", "sup", "inf", "ratio", "iterations"});
    json rows = json::array();
    int status = ExitCode::ok;
    for (double s : p.sigmas) {
        KernelBlock k;
        k.n = p.n;
        k.sigma = s;
        SolveResult r = solve_dirichlet(make_solve_config(torsion_params(p.n, s, p.L, p.h, p.tol), k));
        if (!r.converged)
            status = ExitCode::numerical_failure;
        HarnackReport h = harnack_ratio(r.u, p.C0, s);
        csv.row({s, h.sup, h.inf, h.ratio, static_cast<double>(r.iterations)});
        rows.push_back({{"sigma", s}, {"sup", num(h.sup)}, {"inf", num(h.inf)}, {"ratio", num(h.ratio)},
                        {"converged", r.converged}});
    }
    Artifacts a;
    a.csv_name = "harnack.csv";
    a.csv = csv.str();
    a.summary = {{"C0", p.C0}, {"rows", rows}};
    a.status = status;
    return a;
}

Artifacts run_hoelder(const RunConfig& cfg, const HoelderParams& p)
{
    BoundedFunction u;
    json extra = json::object();
    if (p.source == "function") {
        u = cfg.function->build();
    } else {
        SolveResult r = solve_dirichlet(make_solve_config(*cfg.solve, cfg.kernel));
        extra = solve_summary(r);
        u = r.u;
    }
    HolderReport h = oscillation_cascade(u, p.N, p.k_max, p.center);
    Csv csv({"k", "radius", "m", "M", "osc"});
    for (std::size_t k = 0; k < h.radius.size(); ++k)
        csv.row({static_cast<double>(k), h.radius[k], h.m[k], h.M[k], h.osc[k]});
    Artifacts a;
    a.csv_name = "hoelder.csv";
    a.csv = csv.str();
    a.summary = {{"alpha", num(h.alpha)}, {"capped", h.capped}, {"monotone", h.monotone}, {"N", h.N}};
    if (!extra.empty())
        a.summary["solve"] = extra;
    return a;
}

Artifacts run_c1alpha(const RunConfig& cfg, const C1AlphaParams& p)
{
    BoundedFunction u = cfg.function->build();
    const int n = u.dim();
    QuotientConfig qc;
    qc.N = p.N;
    qc.k_max = p.k_max;
    QuotientReport rep = difference_quotient_probe(u, cfg.kernel->build(), p.beta, p.h_set, p.delta, qc);
    Csv csv(concat(coord_names(n, "h_"),
                   {"alpha", "capped", "L1", "L1_err", "L1_bound", "L2", "L2_err", "L2_bound"}));
    for (const QuotientRow& r : rep.rows)
        csv.row(concat(coords(r.h, n), {r.alpha, r.capped ? 1.0 : 0.0, r.L1, r.L1_err, r.L1_bound, r.L2, r.L2_err,
                                        r.L2_bound}));
    Artifacts a;
    a.csv_name = "c1alpha.csv";
    a.csv = csv.str();
    a.summary = {{"beta", p.beta},
                 {"delta", p.delta},
                 {"min_alpha", num(rep.min_alpha)},
                 {"indicated_exponent", num(rep.indicated_exponent)},
                 {"tails_ok", rep.tails_ok}};
    if (!rep.tails_ok)
        a.status = ExitCode::certification_failure;
    return a;
}

void write_file(const std::filesystem::path& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary);
    out << bytes;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

Artifacts compute_experiment(const RunConfig& cfg)
{
    Artifacts a = std::visit(
        [&](const auto& p) -> Artifacts {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, EvalParams>)
                return run_eval(cfg, p);
            else if constexpr (std::is_same_v<P, BarrierCheckParams>)
                return run_barrier(cfg, p);
            else if constexpr (std::is_same_v<P, AbpParams>)
                return run_abp(cfg, p);
            else if constexpr (std::is_same_v<P, SolveParams>)
                return run_solve(cfg, p);
            else if constexpr (std::is_same_v<P, DecayParams>)
                return run_decay(cfg, p);
            else if constexpr (std::is_same_v<P, HarnackParams>)
                return run_harnack(cfg, p);
            else if constexpr (std::is_same_v<P, HoelderParams>)
                return run_hoelder(cfg, p);
            else
                return run_c1alpha(cfg, p);
        },
        cfg.params);
    a.summary["schema_version"] = kSchemaVersion;
    a.summary["experiment"] = cfg.experiment;
    a.summary["seed"] = cfg.seed;
    a.summary["config_sha256"] = sha256_hex(cfg.raw.dump());
    return a;
}

int run_experiment(const RunConfig& cfg, const std::string& out_dir)
{
    const auto t0 = std::chrono::steady_clock::now();
    Artifacts a;
    try {
        a = compute_experiment(cfg);
    } catch (const CertificationFailure& e) {
        std::cerr << "certification failure: " << e.what() << '\n';
        return ExitCode::certification_failure;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return ExitCode::numerical_failure;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return ExitCode::config_error;
    }
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const std::string summary = a.summary.dump(2) + "\n";
    write_file(dir / a.csv_name, a.csv);
    write_file(dir / "summary.json", summary);
    json files = json::array();
    files.push_back({{"name", a.csv_name}, {"sha256", sha256_hex(a.csv)}, {"bytes", a.csv.size()}});
    files.push_back({{"name", "summary.json"}, {"sha256", sha256_hex(summary)}, {"bytes", summary.size()}});
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest{{"schema_version", kSchemaVersion},
                  {"experiment", cfg.experiment},
                  {"library_version", kVersion},
                  {"config_sha256", sha256_hex(cfg.raw.dump())},
                  {"seed", cfg.seed},
                  {"files", files},
                  {"exit_code", a.status},
                  {"wall_time_s", wall}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cerr << cfg.experiment << ": wrote " << (dir / a.csv_name).string() << " (exit " << a.status << ")\n";
    return a.status;
}

}  // namespace nonloc::cli
