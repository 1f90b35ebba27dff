#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nonloc/barriers.hpp"

namespace nonloc::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& errs)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < errs.size(); ++i)
        os << (i ? "\n" : "") << errs[i];
    return os.str();
}

// Typed, range-checked access to one JSON object; problems are collected, not thrown.
class Reader {
public:
    Reader(const json& obj, std::string path, std::vector<std::string>& errs)
        : obj_(obj), path_(std::move(path)), errs_(errs)
    {
        if (!obj_.is_object())
            fail("", "expected an object");
    }

    bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    void fail(const std::string& key, const std::string& msg) const
    {
        errs_.push_back((key.empty() ? (path_.empty() ? std::string("<root>") : path_) : at(key)) + ": " + msg);
    }

    // Numbers also accept the strings "inf" and "infinity".
    double number(const std::string& key, double def, double lo = -kInf, double hi = kInf, bool open_lo = false,
                  bool open_hi = false, bool required = false) const
    {
        if (!has(key)) {
            if (required)
                fail(key, "required field is missing");
            return def;
        }
        double v = def;
        if (!to_number(obj_.at(key), v)) {
            fail(key, "expected a number");
            return def;
        }
        bool bad = open_lo ? !(v > lo) : !(v >= lo);
        bad = bad || (open_hi ? !(v < hi) : !(v <= hi));
        if (bad) {
            std::ostringstream os;
            os << "must lie in " << (open_lo ? "(" : "[") << lo << ", " << hi << (open_hi ? ")" : "]") << ", got "
               << v;
            fail(key, os.str());
            return def;
        }
        return v;
    }

    int integer(const std::string& key, int def, int lo, int hi) const
    {
        if (!has(key))
            return def;
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) {
            fail(key, "expected an integer");
            return def;
        }
        long long x = v.get<long long>();
        if (x < lo || x > hi) {
            fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(x));
            return def;
        }
        return static_cast<int>(x);
    }

    bool boolean(const std::string& key, bool def) const
    {
        if (!has(key))
            return def;
        if (!obj_.at(key).is_boolean()) {
            fail(key, "expected true or false");
            return def;
        }
        return obj_.at(key).get<bool>();
    }

    std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& options) const
    {
        if (!has(key))
            return def;
        const json& v = obj_.at(key);
        if (!v.is_string()) {
            fail(key, "expected a string");
            return def;
        }
        std::string s = v.get<std::string>();
        if (options.empty())
            return s;
        for (const auto& o : options)
            if (o == s)
                return s;
        std::string list;
        for (std::size_t i = 0; i < options.size(); ++i)
            list += (i ? ", " : "") + options[i];
        fail(key, "unknown value '" + s + "', expected one of: " + list);
        return def;
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& def, double lo = -kInf,
                                double hi = kInf) const
    {
        if (!has(key))
            return def;
        const json& v = obj_.at(key);
        if (!v.is_array() || v.empty()) {
            fail(key, "expected a nonempty array of numbers");
            return def;
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            double x = 0.0;
            if (!to_number(v[i], x) || x < lo || x > hi) {
                std::ostringstream os;
                os << "entry " << i << " must be a number in [" << lo << ", " << hi << "]";
                fail(key, os.str());
                return def;
            }
            out.push_back(x);
        }
        return out;
    }

    // A point is a number (n = 1) or an array of n numbers.
    std::vector<Vec> points(const std::string& key, int n) const
    {
        std::vector<Vec> out;
        if (!has(key))
            return out;
        const json& v = obj_.at(key);
        if (!v.is_array()) {
            fail(key, "expected an array of points");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            Vec p{0.0, 0.0};
            if (!to_point(v[i], n, p)) {
                fail(key, "entry " + std::to_string(i) + " is not a point in dimension " + std::to_string(n));
                return {};
            }
            out.push_back(p);
        }
        return out;
    }

    Vec point(const std::string& key, int n, Vec def) const
    {
        if (!has(key))
            return def;
        Vec p{0.0, 0.0};
        if (!to_point(obj_.at(key), n, p)) {
            fail(key, "expected a point in dimension " + std::to_string(n));
            return def;
        }
        return p;
    }

    const json& raw(const std::string& key) const { return obj_.at(key); }

private:
    static bool to_number(const json& v, double& out)
    {
        if (v.is_number()) {
            out = v.get<double>();
            return std::isfinite(out);
        }
        if (v.is_string()) {
            std::string s = v.get<std::string>();
            if (s == "inf" || s == "infinity") {
                out = kInf;
                return true;
            }
        }
        return false;
    }
    static bool to_point(const json& v, int n, Vec& p)
    {
        if (n == 1 && v.is_number()) {
            p = {v.get<double>(), 0.0};
            return true;
        }
        if (!v.is_array() || static_cast<int>(v.size()) != n)
            return false;
        for (int k = 0; k < n; ++k) {
            if (!v[k].is_number())
                return false;
            p[k] = v[k].get<double>();
        }
        return true;
    }

    const json& obj_;
    std::string path_;
    std::vector<std::string>& errs_;
};

KernelBlock read_kernel(const Reader& r)
{
    KernelBlock k;
    k.n = r.integer("n", 1, 1, 2);
    k.sigma = r.number("sigma", 1.5, 1.0, 2.0, true, true);
    k.lambda_lo = r.number("lambda_lo", 1.0, 0.0, kInf, true);
    k.lambda_hi = r.number("lambda_hi", k.lambda_lo, 0.0, kInf, true);
    if (k.lambda_hi < k.lambda_lo)
        r.fail("lambda_hi", "must be at least lambda_lo");
    k.profile = r.choice("profile", "isotropic", {"isotropic", "two_valued", "table"});
    std::vector<double> def = k.profile == "two_valued" ? std::vector<double>{k.lambda_lo, k.lambda_hi}
                                                        : std::vector<double>{k.lambda_lo};
    if (k.profile == "table" && !r.has("data"))
        r.fail("data", "table profiles need data");
    k.data = r.numbers("data", def, 0.0);
    if (k.profile == "isotropic" && k.data.size() != 1)
        r.fail("data", "isotropic profiles take one value");
    if (k.profile == "two_valued" && k.data.size() != 2)
        r.fail("data", "two_valued profiles take two values");
    for (double a : k.data)
        if (a < k.lambda_lo || a > k.lambda_hi) {
            r.fail("data", "profile values must lie in [lambda_lo, lambda_hi]");
            break;
        }
    return k;
}

FunctionBlock read_function(const Reader& r)
{
    FunctionBlock f;
    f.kind = r.choice("kind", "slab", {"slab", "bump", "power", "constant", "spike", "csv"});
    f.n = r.integer("n", 1, 1, 2);
    f.L = r.number("L", 4.0, 0.0, kInf, true);
    f.h = r.number("h", 1.0 / 64.0, 0.0, kInf, true);
    double cells = 2.0 * f.L / f.h;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells || cells < 2.0 || cells > 4096.0)
        r.fail("h", "must divide 2 L into between 2 and 4096 cells");
    f.lo = r.number("lo", 1.0);
    f.hi = r.number("hi", 2.0);
    if (f.kind == "slab" && !(f.hi > f.lo))
        r.fail("hi", "must exceed lo");
    f.value = r.number("value", f.kind == "csv" ? 0.0 : 1.0);
    f.c = r.number("c", 1.0, 0.0, kInf, true);
    f.p = r.number("p", 0.5, 0.0, kInf, true);
    f.cap = r.number("cap", std::min(1.5, f.L), 0.0, kInf, true);
    if (f.kind == "csv") {
        f.path = r.choice("path", "", {});
        if (f.path.empty())
            r.fail("path", "csv functions need a path");
    }
    return f;
}

OperatorBlock read_operator(const Reader& r, int n, std::vector<std::string>& errs)
{
    OperatorBlock op;
    op.type = r.choice("type", "pucci", {"pucci", "linear", "infsup"});
    op.lambda_lo = r.number("lambda_lo", 1.0, 0.0, kInf, true);
    op.lambda_hi = r.number("lambda_hi", op.lambda_lo, 0.0, kInf, true);
    if (op.lambda_hi < op.lambda_lo)
        r.fail("lambda_hi", "must be at least lambda_lo");
    op.sigma = r.number("sigma", 1.5, 1.0, 2.0, true, true);
    op.sign = r.integer("sign", 1, -1, 1);
    if (op.sign == 0)
        r.fail("sign", "must be 1 or -1");
    op.t = r.number("t", kInf, 0.0, kInf, true);
    op.t_set = r.numbers("t_set", op.t_set, 0.0);
    op.mode = r.integer("mode", 1, -1, 1);
    if (op.mode == 0)
        r.fail("mode", "must be 1 (sup over t) or -1 (inf over t)");
    if (op.type == "infsup") {
        if (!r.has("table") || !r.raw("table").is_array() || r.raw("table").empty()) {
            r.fail("table", "infsup operators need a nonempty table of kernel rows");
        } else {
            const json& t = r.raw("table");
            for (std::size_t i = 0; i < t.size(); ++i) {
                std::vector<KernelBlock> row;
                if (!t[i].is_array() || t[i].empty()) {
                    r.fail("table", "row " + std::to_string(i) + " must be a nonempty array");
                    continue;
                }
                for (std::size_t j = 0; j < t[i].size(); ++j) {
                    Reader kr(t[i][j], r.at("table") + "[" + std::to_string(i) + "][" + std::to_string(j) + "]", errs);
                    row.push_back(read_kernel(kr));
                    if (row.back().n != n)
                        kr.fail("n", "kernel dimension must match the solve dimension");
                }
                if (!op.table.empty() && row.size() != op.table[0].size())
                    r.fail("table", "rows must have equal length");
                op.table.push_back(row);
            }
        }
    }
    return op;
}

SolveParams read_solve(const Reader& r, std::vector<std::string>& errs)
{
    SolveParams s;
    s.n = r.integer("n", 1, 1, 2);
    s.L = r.number("L", 1.25, 0.0, kInf, true);
    s.h = r.number("h", 1.0 / 64.0, 0.0, kInf, true);
    double cells = 2.0 * s.L / s.h;
    if (std::abs(cells - std::round(cells)) > 1e-9 * cells || cells < 4.0 || cells > 1024.0)
        r.fail("h", "must divide 2 L into between 4 and 1024 cells");
    s.center = r.point("center", s.n, s.center);
    s.radius = r.number("radius", 1.0, 0.0, kInf, true);
    for (int k = 0; k < s.n; ++k)
        if (std::abs(s.center[k]) + s.radius >= s.L - 0.5 * s.h) {
            r.fail("radius", "the domain must lie strictly inside the box");
            break;
        }
    if (r.has("operator")) {
        Reader opr(r.raw("operator"), r.at("operator"), errs);
        s.op = read_operator(opr, s.n, errs);
    }
    s.g_value = r.number("g", 0.0);
    s.f_value = r.number("f", -1.0);
    s.tol = r.number("tol", 1e-6, 0.0, kInf, true);
    s.max_iter = r.integer("max_iter", 200000, 0, 100000000);
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errs) : std::runtime_error(join(errs)), errors(std::move(errs)) {}

const std::vector<std::string>& experiment_kinds()
{
    static const std::vector<std::string> kinds{"eval",          "barrier-check", "abp",           "solve",
                                                "probe-decay",   "probe-harnack", "probe-hoelder", "probe-c1alpha"};
    return kinds;
}

KernelSpec KernelBlock::build() const
{
    Profile p = profile == "isotropic"    ? Profile::isotropic(data.at(0))
                : profile == "two_valued" ? Profile::two_valued(data.at(0), data.at(1))
                                          : Profile::table(data);
    return make_power_kernel(n, sigma, lambda_lo, lambda_hi, p);
}

BoundedFunction FunctionBlock::build() const
{
    const int dim = n;
    if (kind == "slab") {
        double a = lo, b = hi, v = value;
        auto f = [a, b, v](const Vec& x) { return (x[0] >= a && x[0] <= b) ? v : 0.0; };
        return BoundedFunction::from_closed_form(n, L, h, f, Exterior::indicator_slab(lo, hi, value), std::abs(value));
    }
    if (kind == "bump") {
        double cc = c;
        auto f = [dim, cc](const Vec& x) { return bump(x, dim, cc); };
        return BoundedFunction::from_closed_form(n, L, h, f, Exterior::constant(0.0), c);
    }
    if (kind == "power") {
        double pp = p, cp = cap;
        auto f = [dim, pp, cp](const Vec& x) { return std::pow(std::min(norm(x, dim), cp), pp); };
        return BoundedFunction::from_closed_form(n, L, h, f, Exterior::constant(std::pow(cap, p)), std::pow(cap, p));
    }
    if (kind == "constant") {
        double v = value;
        return BoundedFunction::from_closed_form(n, L, h, [v](const Vec&) { return v; }, Exterior::constant(v),
                                                 std::abs(v));
    }
    if (kind == "spike") {
        int N = static_cast<int>(std::lround(2.0 * L / h)) + 1;
        std::size_t count = n == 1 ? N : static_cast<std::size_t>(N) * N;
        std::vector<double> v(count, 0.0);
        v[n == 1 ? N / 2 : static_cast<std::size_t>(N / 2) * N + N / 2] = value;
        return BoundedFunction::from_grid(n, L, h, std::move(v), Exterior::constant(0.0));
    }
    return BoundedFunction::from_csv(path, n, L, h, Exterior::constant(value));
}

RunConfig parse_config(const json& doc)
{
    std::vector<std::string> errs;
    Reader root(doc, "", errs);
    if (!errs.empty())
        throw ConfigError(errs);
    RunConfig cfg;
    cfg.raw = doc;
    if (root.has("schema_version")) {
        int v = root.integer("schema_version", kSchemaVersion, 0, 1000);
        if (v != kSchemaVersion)
            root.fail("schema_version", "unsupported version " + std::to_string(v));
    }
    if (!root.has("experiment"))
        root.fail("experiment", "required field is missing");
    cfg.experiment = root.choice("experiment", "", experiment_kinds());
    if (root.has("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned())
            root.fail("seed", "expected a nonnegative integer");
        else
            cfg.seed = s.get<std::uint64_t>();
    }
    cfg.output_dir = root.has("output_dir") ? root.choice("output_dir", "out", {}) : "out";

    if (root.has("kernel")) {
        Reader kr(doc.at("kernel"), "kernel", errs);
        cfg.kernel = read_kernel(kr);
    }
    if (root.has("function")) {
        Reader fr(doc.at("function"), "function", errs);
        cfg.function = read_function(fr);
    }
    if (root.has("quadrature")) {
        Reader q(doc.at("quadrature"), "quadrature", errs);
        cfg.quad.eps_pv = q.number("eps_pv", cfg.quad.eps_pv, 0.0, kInf, true);
        cfg.quad.R_trunc = q.number("R_trunc", cfg.quad.R_trunc, 0.0, kInf, true, true);
        cfg.quad.radial_nodes = q.integer("radial_nodes", cfg.quad.radial_nodes, 2, 64);
        cfg.quad.angular_nodes = q.integer("angular_nodes", cfg.quad.angular_nodes, 8, 4096);
        cfg.quad.t_set = q.numbers("t_set", cfg.quad.t_set, 0.0);
        cfg.quad.max_tail_shells = q.integer("max_tail_shells", cfg.quad.max_tail_shells, 0, 100000);
        cfg.quad.tail_tol = q.number("tail_tol", cfg.quad.tail_tol, 0.0, kInf, true);
        cfg.quad.bound_only_tail = q.boolean("bound_only_tail", cfg.quad.bound_only_tail);
    }

    static const json empty = json::object();
    const json& pj = root.has("params") ? doc.at("params") : empty;
    Reader p(pj, "params", errs);
    const std::string& e = cfg.experiment;
    auto need_kernel = [&] {
        if (!cfg.kernel)
            root.fail("kernel", "experiment '" + e + "' needs a kernel block");
    };
    auto need_function = [&] {
        if (!cfg.function)
            root.fail("function", "experiment '" + e + "' needs a function block");
    };
    auto same_dim = [&] {
        if (cfg.kernel && cfg.function && cfg.kernel->n != cfg.function->n)
            root.fail("kernel.n", "must match function.n");
    };

    if (e == "eval") {
        need_function();
        EvalParams ep;
        ep.op = p.choice("operator", "linear", {"linear", "pucci_plus", "pucci_minus"});
        if (ep.op == "linear")
            need_kernel();
        same_dim();
        int n = cfg.function ? cfg.function->n : 1;
        ep.t = p.number("t", 0.5, 0.0, kInf, true);
        ep.zero_grad = p.boolean("zero_grad", false);
        ep.points = p.points("points", n);
        ep.random_points = p.integer("random_points", 0, 0, 100000);
        ep.radius = p.number("radius", 1.0, 0.0, kInf, true);
        if (ep.points.empty() && ep.random_points == 0)
            p.fail("points", "give points or random_points");
        if (ep.op != "linear" && !cfg.kernel)
            root.fail("kernel", "extremal operators read sigma and the ellipticity bounds from the kernel block");
        cfg.params = ep;
    } else if (e == "barrier-check") {
        BarrierCheckParams bp;
        bp.n = p.integer("n", 1, 1, 2);
        bp.lambda_lo = p.number("lambda_lo", 1.0, 0.0, kInf, true);
        bp.lambda_hi = p.number("lambda_hi", bp.lambda_lo, 0.0, kInf, true);
        if (bp.lambda_hi < bp.lambda_lo)
            p.fail("lambda_hi", "must be at least lambda_lo");
        bp.p_max = p.integer("p_max", 16, 2, 64);
        bp.sigmas = p.numbers("sigmas", bp.sigmas, 1.0, 2.0);
        for (double s : bp.sigmas)
            if (!(s > 1.0 && s < 2.0))
                p.fail("sigmas", "entries must lie in (1, 2)");
        bp.delta = p.number("delta", 0.125, 0.0, 1.0, true, true);
        bp.defect = p.boolean("defect", true);
        cfg.params = bp;
    } else if (e == "abp") {
        need_function();
        AbpParams ap;
        ap.sigma = p.number("sigma", 1.5, 1.0, 2.0, true, true);
        ap.f_value = p.number("f", 1.0);
        ap.depth_cap = p.integer("depth_cap", 12, 1, 30);
        ap.k_max = p.integer("k_max", 80, 0, 400);
        if (cfg.function && cfg.function->L < 2.0)
            root.fail("function.L", "the envelope needs a box containing B_2");
        cfg.params = ap;
    } else if (e == "solve") {
        SolveParams sp = read_solve(p, errs);
        if (sp.op.type == "linear") {
            need_kernel();
            if (cfg.kernel && cfg.kernel->n != sp.n)
                root.fail("kernel.n", "must match params.n");
        }
        cfg.params = sp;
    } else if (e == "probe-decay") {
        DecayParams dp;
        dp.n = p.integer("n", 1, 1, 2);
        dp.p = p.number("p", dp.n + 1.0, dp.n, kInf, true);
        dp.sigma = p.number("sigma", 1.5, 1.0, 2.0, true, true);
        dp.lambda_lo = p.number("lambda_lo", 1.0, 0.0, kInf, true);
        dp.lambda_hi = p.number("lambda_hi", dp.lambda_lo, 0.0, kInf, true);
        if (dp.lambda_hi < dp.lambda_lo)
            p.fail("lambda_hi", "must be at least lambda_lo");
        dp.eps0 = p.number("eps0", 0.01, 0.0, kInf, true);
        dp.nu = p.number("nu", 0.1, 0.0, 1.0, true, true);
        dp.h = p.number("h", dp.n == 1 ? 1.0 / 256.0 : 1.0 / 32.0, 0.0, 0.25, true);
        dp.t_count = p.integer("t_count", 20, 3, 1000);
        dp.t_span = p.number("t_span", 4096.0, 1.0, kInf, true);
        cfg.params = dp;
    } else if (e == "probe-harnack") {
        HarnackParams hp;
        hp.n = p.integer("n", 1, 1, 2);
        hp.sigmas = p.numbers("sigmas", hp.sigmas, 1.0, 2.0);
        for (double s : hp.sigmas)
            if (!(s > 1.0 && s < 2.0))
                p.fail("sigmas", "entries must lie in (1, 2)");
        hp.L = p.number("L", 2.25, 2.0, kInf, true);
        hp.h = p.number("h", 1.0 / 16.0, 0.0, 0.25, true);
        double cells = 2.0 * hp.L / hp.h;
        if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
            p.fail("h", "must divide 2 L");
        else if (hp.L < 2.0 + 0.5 * hp.h + 1e-12)
            p.fail("L", "must exceed 2 + h / 2");
        hp.C0 = p.number("C0", 1.0, 0.0);
        hp.tol = p.number("tol", 1e-6, 0.0, kInf, true);
        cfg.params = hp;
    } else if (e == "probe-hoelder") {
        HoelderParams hp;
        hp.source = p.choice("source", "function", {"function", "solve"});
        hp.N = p.integer("N", 1, 1, 8);
        hp.k_max = p.integer("k_max", 10, 1, 40);
        if (hp.source == "function") {
            need_function();
        } else if (!p.has("solve")) {
            p.fail("solve", "source 'solve' needs a solve block");
        } else {
            Reader sr(pj.at("solve"), "params.solve", errs);
            cfg.solve = read_solve(sr, errs);
            if (cfg.solve->op.type == "linear")
                need_kernel();
        }
        int n = hp.source == "function" ? (cfg.function ? cfg.function->n : 1) : (cfg.solve ? cfg.solve->n : 1);
        hp.center = p.point("center", n, hp.center);
        cfg.params = hp;
    } else if (e == "probe-c1alpha") {
        need_function();
        need_kernel();
        same_dim();
        C1AlphaParams cp;
        cp.beta = p.number("beta", 1.0, 0.0, 1.0, true);
        cp.delta = p.number("delta", 1.0, 0.0, kInf, true);
        int n = cfg.function ? cfg.function->n : 1;
        cp.h_set = p.points("h_set", n);
        if (cp.h_set.empty())
            p.fail("h_set", "give one or more shifts");
        for (const Vec& h : cp.h_set) {
            double nh = norm(h, n);
            if (!(nh > 0.0 && nh < cp.delta / 16.0)) {
                p.fail("h_set", "every shift must satisfy 0 < |h| < delta / 16");
                break;
            }
        }
        cp.N = p.integer("N", 1, 1, 8);
        cp.k_max = p.integer("k_max", 10, 1, 40);
        cfg.params = cp;
    }
    if (!errs.empty())
        throw ConfigError(errs);
    return cfg;
}

RunConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({path + ": cannot open config file"});
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({path + ": " + e.what()});
    }
    return parse_config(doc);
}

}  // namespace nonloc::cli
