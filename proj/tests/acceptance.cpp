// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "config.hpp"
#include "gen.hpp"
#include "nonloc/barriers.hpp"
#include "nonloc/envelope_abp.hpp"
#include "nonloc/nonlocal_eval.hpp"
#include "nonloc/probes.hpp"
#include "nonloc/solver.hpp"
#include "run.hpp"
#include "tool.hpp"

using namespace nonloc;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json run_config(const std::string& file)
{
    auto a = cli::compute_experiment(cli::parse_config_file((tool::configs() / file).string()));
    if (a.status != cli::ExitCode::ok)
        throw std::runtime_error(file + " finished with status " + std::to_string(a.status));
    return a.summary;
}

Outcome quadrature_oracle()
{
    auto slab = BoundedFunction::from_closed_form(
        1, 4.0, 1.0 / 64.0, [](const Vec& x) { return (x[0] >= 1.0 && x[0] <= 2.0) ? 1.0 : 0.0; },
        Exterior::indicator_slab(1.0, 2.0), 1.0);
    KernelSpec K = make_power_kernel(1, 1.5, 1.0, 1.0, Profile::isotropic(1.0));
    double v = linear_op(slab, {0.0, 0.0}, {0.0, 0.0}, 0.5, K).value;
    bool slab_ok = std::abs(v - 0.2154823) <= 1e-4;

    Rng rng(1001);
    QuadConfig fine;
    fine.radial_nodes *= 10;
    fine.angular_nodes *= 10;
    int agree = 0;
    const int probes = 100;
    for (int i = 0; i < probes; ++i) {
        int n = i < 70 ? 1 : 2;
        auto u = random_bump(rng, n);
        Vec x = rng.point(n, 0.5);
        KernelSpec Kr = random_kernel(rng, n, rng.uniform(1.1, 1.9), 1.0, 2.0);
        double t = QuadConfig{}.t_set[rng.integer(0, 3)];
        Vec g = gradient(u, x);
        OperatorValue a = linear_op(u, x, g, t, Kr);
        OperatorValue b = linear_op(u, x, g, t, Kr, fine);
        agree += std::abs(a.value - b.value) <= a.err_est;
    }
    return {slab_ok && agree >= 95, fmt("slab %.9f; refined agreement %d/%d", v, agree, probes)};
}

Outcome extremal_algebra()
{
    Rng rng(1002);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        int n = rng.integer(1, 2);
        auto u = random_bump(rng, n);
        Vec x = rng.point(n, 0.5);
        Vec g = gradient(u, x);
        double lo = rng.uniform(0.5, 1.0), hi = lo * rng.uniform(1.0, 3.0);
        for (int j = 0; j < 32; ++j) {
            Vec y = rng.point(n, 3.0);
            ExtremalMu e = extremal_mu(u, x, y, g);
            // The same increments for -u, with the gradient negated.
            double d1 = u(add(x, y)) - u(x);
            ExtremalMu m = extremal_mu_from(-d1, -dot(g, y, n), norm(y, n));
            worst = std::max(worst, std::abs(pucci_integrand(m, lo, hi, 1) + pucci_integrand(e, lo, hi, -1)));
        }
    }
    int violations = 0, total = 0;
    for (int k = 0; k < 20; ++k) {
        int n = k < 12 ? 1 : 2;
        auto u = random_bump(rng, n);
        Vec x = rng.point(n, 0.5);
        Vec g = gradient(u, x);
        double s = rng.uniform(1.1, 1.9);
        KernelSpec K = random_kernel(rng, n, s, 1.0, 2.0);
        OperatorValue up = pucci(u, x, g, 1.0, 2.0, s, 1);
        OperatorValue dn = pucci(u, x, g, 1.0, 2.0, s, -1);
        for (double t : QuadConfig{}.t_set) {
            OperatorValue l = linear_op(u, x, g, t, K);
            ++total;
            if (!(dn.value - dn.err_est - l.err_est <= l.value && l.value <= up.value + up.err_est + l.err_est))
                ++violations;
        }
    }
    return {worst <= 1e-12 && violations == 0,
            fmt("duality max gap %.3g over 100 probes; sandwich violations %d/%d", worst, violations, total)};
}

Outcome barrier_certificate()
{
    using Big = boost::multiprecision::cpp_bin_float_50;
    ScanResult s = scan_barrier(1, 1.0, 1.0);
    if (!s.found)
        return {false, "scan found no certified pair"};
    auto oracle = [](double r_in, double p_in) {
        // n = 1: the sphere is {-1, 1}, so both the measure and the theta^2 integral are 2.
        Big r = r_in, p = p_in, A = 1 + r * r;
        return static_cast<double>(p * (p + 2) / (2 * pow(A, p / 2 + 2)) * 2 + 2 / pow(A, p / 2 + 1) - (p / 2 + 1) * 2);
    };
    double gap = std::abs(delta0(s.params.r, s.params.p, 1) - oracle(s.params.r, s.params.p));
    Rng rng(1003);
    for (int i = 0; i < 50; ++i) {
        double r = std::exp(rng.uniform(std::log(1e-6), std::log(10.0))), p = rng.uniform(1.0, 16.0);
        double want = oracle(r, p);
        gap = std::max(gap, std::abs(delta0(r, p, 1) - want) / std::max(1.0, std::abs(want)));
    }
    return {s.params.margin >= 0.0 && gap <= 1e-12,
            fmt("p=%g sigma*=%g margin=%.4g delta0(%g)=%.6g; oracle gap %.2g", s.params.p, s.params.sigma_star,
                s.params.margin, s.params.r, s.params.delta0, gap)};
}

Outcome psi_construction()
{
    ScanResult s = scan_barrier(1, 1.0, 1.0);
    if (!s.found)
        return {false, "no barrier pair to build Psi from"};
    double jump = 0.0, slope = 0.0, min_q1 = kInf;
    for (int n = 1; n <= 2; ++n) {
        double p = n == 1 ? s.params.p : 3.0;
        PsiParams P = build_psi(n, p, 0.125);
        double d = P.delta;
        double outer = P.c * (std::pow(d, -p) - std::pow(n, -p / 2.0));
        jump = std::max(jump, std::abs(P.c * (P.a + P.b * d * d) - outer) / outer);
        double dout = P.c * p * std::pow(d, -p - 1.0);
        slope = std::max(slope, std::abs(-2.0 * P.c * P.b * d - dout) / dout);
        const int S = n == 1 ? 256 : 64;
        for (int i = 0; i <= S; ++i)
            for (int j = 0; j <= (n == 2 ? S : 0); ++j)
                min_q1 = std::min(min_q1, special_psi({-0.5 + double(i) / S, n == 2 ? -0.5 + double(j) / S : 0.0}, P));
    }
    PsiParams P1 = build_psi(1, s.params.p, 0.125);
    DefectResult d = psi_defect(s.params.sigma_star, P1, 1.0, 1.0, {});
    bool ok = jump <= 1e-12 && slope <= 1e-12 && min_q1 > 2.0 && d.outside_tested > 0 && d.outside_min >= 0.0;
    return {ok, fmt("value gap %.2g, slope gap %.2g, min on Q1 %.4f, defect sup %.4g, min outside B_1/4 %.3g (%d pts)",
                    jump, slope, min_q1, d.sup, d.outside_min, d.outside_tested)};
}

Outcome abp_geometry()
{
    const double h = 1.0 / 256.0;
    const int N = 1025;
    std::vector<double> v(N, 0.0);
    v[N / 2] = 1.0;
    auto u = BoundedFunction::from_grid(1, 2.0, h, v, Exterior::constant(0.0));
    EnvelopeResult env = concave_envelope(u);
    ScalarField f = [](const Vec&) { return 1.0; };
    CubeCover c = calibrate_cover(env, f, 1.5);
    int depth = 0;
    for (const Cube& q : c.cubes)
        depth = std::max(depth, q.depth);

    // Upper hull by brute force over node pairs bracketing x.
    std::vector<std::size_t> b2;
    for (std::size_t k = 0; k < u.node_count(); ++k)
        if (env.in_b2[k])
            b2.push_back(k);
    Rng rng(1005);
    double gap = 0.0;
    for (int s = 0; s < 50; ++s) {
        std::size_t k = b2[rng.integer(0, static_cast<int>(b2.size()) - 1)];
        double x = u.node(k)[0], best = 0.0;
        for (std::size_t i : b2)
            for (std::size_t j : b2) {
                double a = u.node(i)[0], b = u.node(j)[0];
                if (a > x || b < x)
                    continue;
                double vi = std::max(0.0, u.values()[i]), vj = std::max(0.0, u.values()[j]);
                best = std::max(best, b == a ? std::max(vi, vj) : vi + (vj - vi) * (x - a) / (b - a));
            }
        gap = std::max(gap, std::abs(env.gamma[k] - best));
    }
    bool ok = !c.max_depth_hit && depth < 12 && c.a && c.b && c.c && c.d && c.e_all && c.f_all &&
              std::isfinite(c.C) && c.gamma_measured > 0.0 && gap <= 1e-8;
    return {ok, fmt("%zu cubes, max depth %d, (a-d)=%d%d%d%d, (e,f)=%d%d at C=%.4g gamma=%.4g; hull gap %.2g",
                    c.cubes.size(), depth, c.a, c.b, c.c, c.d, c.e_all, c.f_all, c.C, c.gamma_measured, gap)};
}

double torsion_shape_error(const BoundedFunction& u, double s)
{
    double num = 0.0, den = 0.0, top = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < u.node_count(); ++k) {
        Vec x = u.node(k);
        if (std::abs(x[0]) >= 1.0)
            continue;
        double phi = std::pow(1.0 - x[0] * x[0], s / 2.0), val = u.values()[k];
        pts.push_back({phi, val});
        num += phi * val;
        den += phi * phi;
        top = std::max(top, std::abs(val));
    }
    double c = num / den, err = 0.0;
    for (auto [phi, val] : pts)
        err = std::max(err, std::abs(val - c * phi));
    return err / top;
}

SolveConfig torsion_config(double s, double h)
{
    SolveConfig c;
    c.n = 1;
    c.L = 1.25;
    c.h = h;
    c.op = LinearSpec{make_power_kernel(1, s, 1.0, 1.0, Profile::isotropic(1.0)), kInf};
    c.f = [](const Vec&) { return -1.0; };
    c.tol = 1e-6;
    return c;
}

Outcome solver_shape()
{
    bool ok = true;
    std::string detail;
    for (double s : {1.3, 1.7}) {
        auto t0 = std::chrono::steady_clock::now();
        SolveResult r = solve_dirichlet(torsion_config(s, 1.0 / 64.0));
        double secs = seconds_since(t0);
        double e = torsion_shape_error(r.u, s);
        ok = ok && r.converged && e <= 0.05 && secs < 60.0;
        detail += fmt("sigma=%g err=%.2f%% %.1fs; ", s, 100.0 * e, secs);
    }
    return {ok, detail};
}

Outcome comparison()
{
    Rng rng(1007);
    int violations = 0, unconverged = 0;
    double worst = -kInf;
    const double tol = 1e-7;
    for (int k = 0; k < 20; ++k) {
        double s = rng.uniform(1.2, 1.9);
        double lo = rng.uniform(0.5, 1.0), hi = lo * rng.uniform(1.0, 2.0);
        double g1 = rng.uniform(-1.0, 1.0), g2 = g1 + rng.uniform(0.0, 1.0);
        double f2 = rng.uniform(-2.0, 0.0), f1 = f2 + rng.uniform(0.0, 1.0);
        // Affine data in x keep the pair ordered off the domain as well.
        double slope = rng.uniform(-0.3, 0.3);
        SolveConfig a;
        a.h = 1.0 / 32.0;
        a.op = PucciSpec{lo, hi, s, k % 2 == 0 ? 1 : -1};
        a.tol = tol;
        SolveConfig b = a;
        a.g = [=](const Vec& x) { return g1 + slope * x[0]; };
        b.g = [=](const Vec& x) { return g2 + slope * x[0]; };
        // Beyond the box the exterior is a constant; keep it below / above the box data.
        a.g_far = g1 - 0.3 * 1.25;
        b.g_far = g2 + 0.3 * 1.25;
        a.f = [=](const Vec&) { return f1; };
        b.f = [=](const Vec&) { return f2; };
        SolveResult ua = solve_dirichlet(a), ub = solve_dirichlet(b);
        unconverged += !ua.converged + !ub.converged;
        double w = -kInf;
        for (std::size_t i = 0; i < ua.u.node_count(); ++i)
            w = std::max(w, ua.u.values()[i] - ub.u.values()[i]);
        worst = std::max(worst, w);
        violations += w > 2.0 * tol;
    }
    return {violations == 0 && unconverged == 0,
            fmt("20 pairs, max(u1 - u2) = %.3g, violations %d, unconverged %d", worst, violations, unconverged)};
}

Outcome harnack()
{
    json s = run_config("probe_harnack.json");
    double ref = 0.0;
    std::string detail;
    for (const auto& row : s["rows"]) {
        if (row["sigma"].get<double>() == 1.5)
            ref = row["ratio"].get<double>();
        detail += fmt("%g:%.3f ", row["sigma"].get<double>(), row["ratio"].get<double>());
    }
    bool ok = ref > 0.0;
    for (const auto& row : s["rows"])
        ok = ok && row["converged"].get<bool>() && row["ratio"].get<double>() < 3.0 * ref;
    return {ok, "ratios " + detail};
}

Outcome hoelder()
{
    ScalarField f = [](const Vec& x) { return std::sqrt(std::min(std::abs(x[0]), 1.5)); };
    auto u = BoundedFunction::from_closed_form(1, 2.0, 1.0 / 256.0, f, Exterior::constant(std::sqrt(1.5)),
                                               std::sqrt(1.5));
    HolderReport h = oscillation_cascade(u, 1, 10);
    SolveResult r = solve_dirichlet(torsion_config(1.5, 1.0 / 64.0));
    HolderReport hs = oscillation_cascade(r.u, 1, 3);
    bool decay = true;
    for (std::size_t k = 1; k < hs.osc.size(); ++k)
        decay = decay && hs.osc[k] < hs.osc[k - 1];
    bool ok = std::abs(h.alpha - 0.5) <= 0.05 && r.converged && hs.alpha > 0.0 && hs.monotone && decay;
    return {ok, fmt("alpha(|x|^1/2)=%.4f; torsion solution alpha=%.4f%s, osc %.4g -> %.4g", h.alpha, hs.alpha,
                    hs.capped ? " (capped)" : "", hs.osc.front(), hs.osc.back())};
}

Outcome levelset()
{
    json s = run_config("probe_decay.json");
    bool ok = s["nonincreasing"].get<bool>() && !s["step"].get<bool>() && s["dominates"].get<bool>();
    return {ok, fmt("eps*=%s C_envelope=%s, nonincreasing=%d dominates=%d",
                    s["eps_star"].dump().c_str(), s["C_envelope"].dump().c_str(), s["nonincreasing"].get<bool>(),
                    s["dominates"].get<bool>())};
}

Outcome c1alpha()
{
    json s = run_config("probe_c1alpha.json");
    double a = s["min_alpha"].get<double>();
    bool ok = std::abs(a - 0.5) <= 0.07 && s["tails_ok"].get<bool>();
    return {ok, fmt("alpha=%.4f, tails within the display: %d", a, s["tails_ok"].get<bool>())};
}

Outcome determinism()
{
    auto a = tool::scratch("acc_a"), b = tool::scratch("acc_b");
    int runs = 0, mismatched = 0, failed = 0;
    for (const auto& entry : std::filesystem::directory_iterator(tool::configs())) {
        if (entry.path().extension() != ".json")
            continue;
        json doc = json::parse(tool::slurp(entry.path()));
        std::string kind = doc["experiment"];
        int ea = tool::run(kind, entry.path(), a), eb = tool::run(kind, entry.path(), b);
        ++runs;
        if (ea != eb || ea != 0) {
            ++failed;
            continue;
        }
        json ma = json::parse(tool::slurp(a / "manifest.json")), mb = json::parse(tool::slurp(b / "manifest.json"));
        for (const auto& f : ma["files"]) {
            std::string name = f["name"];
            mismatched += tool::slurp(a / name) != tool::slurp(b / name);
        }
        ma.erase("wall_time_s");
        mb.erase("wall_time_s");
        mismatched += ma != mb;
    }
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    return {runs > 0 && mismatched == 0 && failed == 0,
            fmt("%d configs run twice, %d mismatches, %d nonzero exits", runs, mismatched, failed)};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"quadrature oracle", quadrature_oracle},
        {"extremal operator algebra", extremal_algebra},
        {"barrier certificate", barrier_certificate},
        {"Psi construction", psi_construction},
        {"ABP geometry", abp_geometry},
        {"solver shape", solver_shape},
        {"comparison", comparison},
        {"Harnack uniformity", harnack},
        {"Hoelder probe", hoelder},
        {"level-set decay", levelset},
        {"C^{1,alpha} probe", c1alpha},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
