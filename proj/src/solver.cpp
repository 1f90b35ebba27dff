#include "nonloc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nonloc {

void SolveConfig::validate() const
{
    check_dim(n);
    if (!(h > 0.0) || !(L > 0.0))
        throw InvalidArgument("solver grid needs positive spacing and half-width");
    if (!(tol > 0.0) || max_iter < 0 || tau < 0.0)
        throw InvalidArgument("solver needs tol > 0, tau >= 0 and max_iter >= 0");
    if (!(omega.radius > 0.0))
        throw InvalidArgument("domain radius must be positive");
    for (int k = 0; k < n; ++k)
        if (std::abs(omega.center[k]) + omega.radius >= L - h * 0.5)
            throw InvalidArgument("domain must lie strictly inside the box");
    if (!g || !f)
        throw InvalidArgument("solver needs g and f");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kRays = 128;  // directions for the region beyond the box in 2D

// Integral over r in [a, b] of (2-s)(A + B r) r^{-1-s}.
double linear_piece(double A, double B, double s, double a, double b)
{
    if (!(b > a))
        return 0.0;
    double ia = std::pow(a, -s), ib = std::isinf(b) ? 0.0 : std::pow(b, -s);
    double ja = std::pow(a, 1.0 - s), jb = std::isinf(b) ? 0.0 : std::pow(b, 1.0 - s);
    return (2.0 - s) * (A * (ia - ib) / s + B * (ja - jb) / (s - 1.0));
}

// Integral over r > rho of (2-s) r^{-1-s} P(r), where P is the extremal integrand
// for the increment d1 and gradient candidate d1 - r q. P is piecewise linear in r.
double pucci_ray(double d1, double q, double lo, double hi, int sign, double s, double rho)
{
    auto P = [&](double r) { return pucci_integrand(extremal_mu_from(d1, r * q, r), lo, hi, sign); };
    std::vector<double> cuts{rho};
    if (0.5 > rho)
        cuts.push_back(0.5);
    if (q != 0.0 && d1 / q > rho)
        cuts.push_back(d1 / q);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(kInf);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        if (!(b > a))
            continue;
        // Relative offsets: a + 1 and a + 2 coincide in floating point once a is huge.
        double r1 = a * 1.25 + 1.0, r2 = a * 1.5 + 2.0;
        if (std::isfinite(b)) {
            r1 = a + 0.25 * (b - a);
            r2 = a + 0.75 * (b - a);
        }
        double p1 = P(r1), p2 = P(r2);
        double B = (p2 - p1) / (r2 - r1);
        total += linear_piece(p1 - B * r1, B, s, a, b);
    }
    return total;
}

// Integral of (2-s) a r^{-1-s} over [y0, y1] (0 < y0 < y1) and of (2-s) a r^{-s}.
double mass_1d(double a, double s, double y0, double y1)
{
    return (2.0 - s) * a * (std::pow(y0, -s) - std::pow(y1, -s)) / s;
}
double moment_1d(double a, double s, double y0, double y1)
{
    return (2.0 - s) * a * (std::pow(y0, 1.0 - s) - std::pow(y1, 1.0 - s)) / (s - 1.0);
}

class DiscreteOperator {
public:
    explicit DiscreteOperator(const SolveConfig& cfg);

    const std::vector<std::size_t>& interior() const { return interior_; }
    double dmax() const { return dmax_; }
    double sigma() const { return sigma_; }
    int nodes_per_axis() const { return N_; }
    std::size_t node_count() const { return count_; }
    Vec node(std::size_t k) const
    {
        int i = static_cast<int>(k % N_), j = static_cast<int>(k / N_);
        return {-L_ + i * h_, n_ == 2 ? -L_ + j * h_ : 0.0};
    }

    // Operator at every interior node; out is indexed like interior().
    void apply(const std::vector<double>& u, std::vector<double>& out) const;

private:
    struct KernelData {
        std::vector<double> w;      // cell weights by offset
        std::vector<Vec> m;         // cell first moments by offset
        double near1 = 0.0;         // 1D: coefficient of H
        double near2[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // 2D: coefficient matrix of H
        std::vector<double> eout;   // per interior node
        std::vector<std::vector<Vec>> gsum;  // [node][t] first moment over |y| < t
    };

    int n_, N_;
    double L_, h_, sigma_ = 1.5;
    std::size_t count_;
    double g_far_;
    std::vector<std::size_t> interior_;
    double dmax_ = 0.0;

    bool pucci_ = false;
    PucciSpec pspec_;
    std::vector<double> c_;               // isotropic cell weights
    std::vector<std::vector<double>> rho_;  // per interior node, per ray

    std::vector<KernelData> kd_;
    std::vector<double> ts_;
    std::size_t na_ = 1, nb_ = 1;
    int mode_ = 1;
    std::vector<Vec> rays_;

    std::size_t off(int di, int dj) const
    {
        return static_cast<std::size_t>((di + N_ - 1) + (n_ == 2 ? (dj + N_ - 1) * (2 * N_ - 1) : 0));
    }
    double ray_length(const Vec& x, const Vec& th) const
    {
        double edge = L_ + 0.5 * h_, best = kInf;
        for (int k = 0; k < n_; ++k) {
            if (th[k] > 0.0)
                best = std::min(best, (edge - x[k]) / th[k]);
            else if (th[k] < 0.0)
                best = std::min(best, (-edge - x[k]) / th[k]);
        }
        return best;
    }
    void cell_integrals(const std::function<double(const Vec&)>& K, std::vector<double>& w, std::vector<Vec>* m) const;
    void hessian(const std::vector<double>& u, std::size_t k, double H[2][2]) const;
};

DiscreteOperator::DiscreteOperator(const SolveConfig& cfg)
    : n_(cfg.n), L_(cfg.L), h_(cfg.h), g_far_(cfg.g_far)
{
    double cells = 2.0 * L_ / h_;
    long kc = std::lround(cells);
    if (kc < 2 || std::abs(cells - kc) > 1e-9 * cells)
        throw InvalidArgument("spacing must divide the box width");
    N_ = static_cast<int>(kc) + 1;
    count_ = n_ == 1 ? static_cast<std::size_t>(N_) : static_cast<std::size_t>(N_) * N_;
    for (std::size_t k = 0; k < count_; ++k)
        if (norm(sub(node(k), cfg.omega.center), n_) < cfg.omega.radius - 1e-12)
            interior_.push_back(k);
    if (n_ == 1)
        rays_ = {{1.0, 0.0}, {-1.0, 0.0}};
    else
        for (int j = 0; j < kRays; ++j) {
            double th = (j + 0.5) * kTwoPi / kRays;
            rays_.push_back({std::cos(th), std::sin(th)});
        }
    const double dth = n_ == 1 ? 1.0 : kTwoPi / kRays;
    const double rho = 0.5 * h_;

    if (auto p = std::get_if<PucciSpec>(&cfg.op)) {
        pucci_ = true;
        pspec_ = *p;
        sigma_ = p->sigma;
        if (!(sigma_ > 1.0 && sigma_ < 2.0) || !(p->lambda_lo > 0.0 && p->lambda_lo <= p->lambda_hi))
            throw InvalidArgument("invalid extremal operator parameters");
        const double s = sigma_;
        cell_integrals([&](const Vec& y) { return (2.0 - s) * std::pow(norm(y, n_), -n_ - s); }, c_, nullptr);
        rho_.resize(interior_.size());
        double near_coef = n_ == 1 ? 2.0 * std::pow(rho, 2.0 - s) * 2.0 / (h_ * h_)
                                   : 0.5 * std::pow(rho, 2.0 - s) * kTwoPi * 6.0 / (h_ * h_);
        for (std::size_t q = 0; q < interior_.size(); ++q) {
            Vec x = node(interior_[q]);
            double sum = 0.0, eout = 0.0;
            for (const Vec& th : rays_) {
                double r = ray_length(x, th);
                rho_[q].push_back(r);
                eout += (2.0 - s) * std::pow(r, -s) / s * dth;
            }
            int i0 = static_cast<int>(interior_[q] % N_), j0 = static_cast<int>(interior_[q] / N_);
            for (std::size_t k = 0; k < count_; ++k) {
                int i = static_cast<int>(k % N_), j = static_cast<int>(k / N_);
                if (k != interior_[q])
                    sum += c_[off(i - i0, j - j0)];
            }
            dmax_ = std::max(dmax_, p->lambda_hi * (sum + eout + near_coef));
        }
        return;
    }

    KernelTable table;
    if (auto l = std::get_if<LinearSpec>(&cfg.op)) {
        table = {{l->K}};
        ts_ = {l->t};
    } else {
        const auto& s = std::get<InfSupSpec>(cfg.op);
        table = s.table;
        ts_ = s.t_set;
        mode_ = s.mode;
    }
    if (table.empty() || table[0].empty() || ts_.empty())
        throw InvalidArgument("empty kernel table or threshold set");
    na_ = table.size();
    nb_ = table[0].size();
    for (const auto& row : table) {
        if (row.size() != nb_)
            throw InvalidArgument("kernel table rows must have equal length");
        for (const KernelSpec& K : row) {
            if (K.n() != n_)
                throw InvalidArgument("kernel dimension does not match the solver");
            KernelData d;
            const double s = K.sigma();
            sigma_ = s;
            cell_integrals([&K](const Vec& y) { return K(y); }, d.w, &d.m);
            if (n_ == 1) {
                d.near1 = 0.5 * (K.coefficient({1.0, 0.0}) + K.coefficient({-1.0, 0.0})) * std::pow(rho, 2.0 - s);
            } else {
                const int A = 256;
                for (int j = 0; j < A; ++j) {
                    double th = (j + 0.5) * kTwoPi / A;
                    Vec e{std::cos(th), std::sin(th)};
                    double a = K.coefficient(e) * kTwoPi / A;
                    for (int p = 0; p < 2; ++p)
                        for (int r = 0; r < 2; ++r)
                            d.near2[p][r] += 0.5 * std::pow(rho, 2.0 - s) * a * e[p] * e[r];
                }
            }
            d.eout.resize(interior_.size());
            d.gsum.resize(interior_.size());
            for (std::size_t q = 0; q < interior_.size(); ++q) {
                Vec x = node(interior_[q]);
                int i0 = static_cast<int>(interior_[q] % N_), j0 = static_cast<int>(interior_[q] / N_);
                double eout = 0.0, sum = 0.0;
                std::vector<Vec> gs(ts_.size(), Vec{0.0, 0.0});
                for (const Vec& th : rays_) {
                    double r = ray_length(x, th);
                    double a = K.coefficient(th) * dth;
                    eout += (2.0 - s) * a * std::pow(r, -s) / s;
                    for (std::size_t t = 0; t < ts_.size(); ++t) {
                        if (!(ts_[t] > r))
                            continue;
                        double tt = std::isinf(ts_[t]) ? 0.0 : std::pow(ts_[t], 1.0 - s);
                        double mom = (2.0 - s) * a * (std::pow(r, 1.0 - s) - tt) / (s - 1.0);
                        gs[t] = add(gs[t], scale(th, mom));
                    }
                }
                for (std::size_t k = 0; k < count_; ++k) {
                    if (k == interior_[q])
                        continue;
                    int i = static_cast<int>(k % N_), j = static_cast<int>(k / N_);
                    std::size_t o = off(i - i0, j - j0);
                    sum += d.w[o];
                    Vec y{(i - i0) * h_, (j - j0) * h_};
                    double r = norm(y, n_);
                    for (std::size_t t = 0; t < ts_.size(); ++t)
                        if (r < ts_[t])
                            gs[t] = add(gs[t], d.m[o]);
                }
                d.eout[q] = eout;
                d.gsum[q] = gs;
                double near_coef = n_ == 1 ? d.near1 * 2.0 / (h_ * h_)
                                           : (std::abs(d.near2[0][0]) + std::abs(d.near2[1][1]) +
                                              2.0 * std::abs(d.near2[0][1])) * 2.0 / (h_ * h_);
                dmax_ = std::max(dmax_, sum + eout + near_coef);
            }
            kd_.push_back(std::move(d));
        }
    }
}

void DiscreteOperator::cell_integrals(const std::function<double(const Vec&)>& K, std::vector<double>& w,
                                      std::vector<Vec>* m) const
{
    const int M = N_ - 1;
    const std::size_t size = n_ == 1 ? 2 * M + 1 : static_cast<std::size_t>(2 * M + 1) * (2 * M + 1);
    w.assign(size, 0.0);
    if (m)
        m->assign(size, Vec{0.0, 0.0});
    if (n_ == 1) {
        // Power-law profiles integrate in closed form; the coefficient is read off K.
        for (int di = -M; di <= M; ++di) {
            if (di == 0)
                continue;
            double y0 = (std::abs(di) - 0.5) * h_, y1 = (std::abs(di) + 0.5) * h_;
            Vec e{di > 0 ? 1.0 : -1.0, 0.0};
            double a = K(e) / (2.0 - sigma_);  // K(e) = (2-s) a for |e| = 1
            w[off(di, 0)] = mass_1d(a, sigma_, y0, y1);
            if (m)
                (*m)[off(di, 0)] = {e[0] * moment_1d(a, sigma_, y0, y1), 0.0};
        }
        return;
    }
    const GaussRule& g = gauss_legendre(6);
    parallel_for(size, [&](std::size_t idx) {
        int di = static_cast<int>(idx % (2 * M + 1)) - M, dj = static_cast<int>(idx / (2 * M + 1)) - M;
        if (di == 0 && dj == 0)
            return;
        int sub = std::max(std::abs(di), std::abs(dj)) <= 2 ? 8 : (std::max(std::abs(di), std::abs(dj)) <= 6 ? 2 : 1);
        double hs = h_ / sub;
        double acc = 0.0;
        Vec mom{0.0, 0.0};
        for (int a = 0; a < sub; ++a)
            for (int b = 0; b < sub; ++b) {
                double x0 = (di - 0.5) * h_ + a * hs, y0 = (dj - 0.5) * h_ + b * hs;
                for (std::size_t p = 0; p < g.x.size(); ++p)
                    for (std::size_t q = 0; q < g.x.size(); ++q) {
                        Vec y{x0 + 0.5 * hs * (1.0 + g.x[p]), y0 + 0.5 * hs * (1.0 + g.x[q])};
                        double wq = 0.25 * hs * hs * g.w[p] * g.w[q] * K(y);
                        acc += wq;
                        mom = add(mom, scale(y, wq));
                    }
            }
        w[idx] = acc;
        if (m)
            (*m)[idx] = mom;
    });
}

void DiscreteOperator::hessian(const std::vector<double>& u, std::size_t k, double H[2][2]) const
{
    int i = static_cast<int>(k % N_), j = static_cast<int>(k / N_);
    auto at = [&](int a, int b) { return u[static_cast<std::size_t>(b) * N_ + a]; };
    double h2 = h_ * h_;
    H[0][0] = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / h2;
    H[0][1] = H[1][0] = H[1][1] = 0.0;
    if (n_ == 2) {
        H[1][1] = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / h2;
        H[0][1] = H[1][0] = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4.0 * h2);
    }
}

void DiscreteOperator::apply(const std::vector<double>& u, std::vector<double>& out) const
{
    out.assign(interior_.size(), 0.0);
    const double dth = n_ == 1 ? 1.0 : kTwoPi / kRays;
    const double rho = 0.5 * h_;
    parallel_for(interior_.size(), [&](std::size_t q) {
        const std::size_t k0 = interior_[q];
        const int i0 = static_cast<int>(k0 % N_), j0 = static_cast<int>(k0 / N_);
        const double u0 = u[k0];
        Vec g{(u[k0 + 1] - u[k0 - 1]) / (2.0 * h_), 0.0};
        if (n_ == 2)
            g[1] = (u[k0 + N_] - u[k0 - N_]) / (2.0 * h_);
        double H[2][2];
        hessian(u, k0, H);

        if (pucci_) {
            const double lo = pspec_.lambda_lo, hi = pspec_.lambda_hi, s = sigma_;
            const int sign = pspec_.sign;
            double sum = 0.0;
            for (std::size_t k = 0; k < count_; ++k) {
                if (k == k0)
                    continue;
                int i = static_cast<int>(k % N_), j = static_cast<int>(k / N_);
                Vec y{(i - i0) * h_, (j - j0) * h_};
                double r = norm(y, n_);
                ExtremalMu e = extremal_mu_from(u[k] - u0, dot(g, y, n_), r);
                sum += c_[off(i - i0, j - j0)] * pucci_integrand(e, lo, hi, sign);
            }
            // Cell around the node: second-order Taylor term.
            double near = 0.0;
            if (n_ == 1) {
                double Hp = std::max(H[0][0], 0.0), Hm = std::max(-H[0][0], 0.0);
                near = (sign > 0 ? hi * Hp - lo * Hm : lo * Hp - hi * Hm) * std::pow(rho, 2.0 - s);
            } else {
                const int A = 64;
                double acc = 0.0;
                for (int a = 0; a < A; ++a) {
                    double th = (a + 0.5) * kTwoPi / A;
                    double c = std::cos(th), sn = std::sin(th);
                    double qf = H[0][0] * c * c + 2.0 * H[0][1] * c * sn + H[1][1] * sn * sn;
                    double qp = std::max(qf, 0.0), qm = std::max(-qf, 0.0);
                    acc += (sign > 0 ? hi * qp - lo * qm : lo * qp - hi * qm);
                }
                near = 0.5 * std::pow(rho, 2.0 - s) * acc * kTwoPi / A;
            }
            double far = 0.0;
            for (std::size_t r = 0; r < rays_.size(); ++r)
                far += pucci_ray(g_far_ - u0, dot(g, rays_[r], n_), lo, hi, sign, s, rho_[q][r]) * dth;
            out[q] = sum + near + far;
            return;
        }

        const std::size_t nk = kd_.size(), nt = ts_.size();
        std::vector<double> vals(nk * nt);
        for (std::size_t a = 0; a < nk; ++a) {
            const KernelData& d = kd_[a];
            double sum = 0.0;
            for (std::size_t k = 0; k < count_; ++k) {
                if (k == k0)
                    continue;
                int i = static_cast<int>(k % N_), j = static_cast<int>(k / N_);
                sum += d.w[off(i - i0, j - j0)] * (u[k] - u0);
            }
            double near = n_ == 1 ? d.near1 * H[0][0]
                                  : d.near2[0][0] * H[0][0] + 2.0 * d.near2[0][1] * H[0][1] + d.near2[1][1] * H[1][1];
            double base = sum + near + (g_far_ - u0) * d.eout[q];
            for (std::size_t t = 0; t < nt; ++t)
                vals[a * nt + t] = base - dot(g, d.gsum[q][t], n_);
        }
        double best = mode_ > 0 ? -kInf : kInf;
        for (std::size_t t = 0; t < nt; ++t) {
            double inf_b = kInf;
            for (std::size_t b = 0; b < nb_; ++b) {
                double sup_a = -kInf;
                for (std::size_t a = 0; a < na_; ++a)
                    sup_a = std::max(sup_a, vals[(a * nb_ + b) * nt + t]);
                inf_b = std::min(inf_b, sup_a);
            }
            best = mode_ > 0 ? std::max(best, inf_b) : std::min(best, inf_b);
        }
        out[q] = best;
    });
}

std::vector<double> initial_iterate(const SolveConfig& cfg, const DiscreteOperator& op)
{
    std::vector<double> u(op.node_count());
    std::vector<char> inside(op.node_count(), 0);
    for (std::size_t k : op.interior())
        inside[k] = 1;
    std::vector<std::size_t> outside;
    for (std::size_t k = 0; k < op.node_count(); ++k)
        if (!inside[k]) {
            u[k] = cfg.g(op.node(k));
            outside.push_back(k);
        }
    // Inverse-square-distance blend of the exterior data.
    for (std::size_t k : op.interior()) {
        Vec x = op.node(k);
        double num = 0.0, den = 0.0;
        for (std::size_t e : outside) {
            Vec d = sub(op.node(e), x);
            double w = 1.0 / dot(d, d, cfg.n);
            num += w * u[e];
            den += w;
        }
        u[k] = den > 0.0 ? num / den : cfg.g_far;
    }
    return u;
}

}  // namespace

std::vector<double> apply_discrete(const SolveConfig& cfg, const std::vector<double>& values)
{
    cfg.validate();
    DiscreteOperator op(cfg);
    if (values.size() != op.node_count())
        throw InvalidArgument("value count does not match the solver grid");
    std::vector<double> r;
    op.apply(values, r);
    std::vector<double> out(op.node_count(), 0.0);
    for (std::size_t q = 0; q < r.size(); ++q)
        out[op.interior()[q]] = r[q];
    return out;
}

SolveResult solve_dirichlet(const SolveConfig& cfg)
{
    cfg.validate();
    DiscreteOperator op(cfg);
    const auto& in = op.interior();
    if (in.empty())
        throw InvalidArgument("domain contains no grid nodes");
    std::vector<double> u = initial_iterate(cfg, op);
    std::vector<double> fv(in.size());
    for (std::size_t q = 0; q < in.size(); ++q)
        fv[q] = cfg.f(op.node(in[q]));

    auto residual = [&](const std::vector<double>& v, std::vector<double>& r) {
        op.apply(v, r);
        double m = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q) {
            r[q] -= fv[q];
            if (!std::isfinite(r[q]))
                throw NumericalFailure("non-finite residual in the solver");
            m = std::max(m, std::abs(r[q]));
        }
        return m;
    };

    SolveResult res;
    double tau = cfg.tau > 0.0 ? cfg.tau : std::min(std::pow(cfg.h, op.sigma()) / 4.0, 0.95 / op.dmax());
    std::vector<double> r, rn, trial;
    double R = residual(u, r);
    res.residuals.push_back(R);
    int it = 0;
    while (R > cfg.tol && it < cfg.max_iter) {
        trial = u;
        for (std::size_t q = 0; q < in.size(); ++q)
            trial[in[q]] += tau * r[q];
        double Rn = residual(trial, rn);
        ++it;
        if (Rn > R) {
            tau *= 0.5;
            ++res.rejected;
            if (tau < 1e-300)
                break;
            continue;
        }
        u.swap(trial);
        r.swap(rn);
        R = Rn;
        res.residuals.push_back(R);
        if (cfg.observer)
            cfg.observer(it, u);
    }
    res.iterations = it;
    res.residual = R;
    res.converged = R <= cfg.tol;
    res.tau = tau;
    res.u = BoundedFunction::from_grid(cfg.n, cfg.L, cfg.h, u, Exterior::constant(cfg.g_far));
    return res;
}

ComparisonReport comparison_check(const BoundedFunction& u, const BoundedFunction& v, const OperatorSpec& op,
                                  const ScalarField& f, const Region& omega, const QuadConfig& cfg,
                                  double cert_slack, double order_slack)
{
    if (u.dim() != v.dim())
        throw InvalidArgument("comparison needs functions of the same dimension");
    const int n = u.dim();
    ComparisonReport rep;
    rep.sub = viscosity_check(u, omega, f, Inequality::sub, op, cfg, cert_slack);
    rep.super = viscosity_check(v, omega, f, Inequality::super, op, cfg, cert_slack);
    if (rep.sub.failed > 0 || rep.super.failed > 0)
        throw CertificationFailure("comparison: sub/supersolution certificate failed");
    // Off Omega: nodes of both grids and a ring of far points.
    auto check_out = [&](const Vec& x) {
        if (norm(sub(x, omega.center), n) < omega.radius)
            return;
        if (u.evaluate(x) > v.evaluate(x) + order_slack)
            rep.exterior_ordered = false;
    };
    for (std::size_t k = 0; k < u.node_count(); ++k)
        check_out(u.node(k));
    for (std::size_t k = 0; k < v.node_count(); ++k)
        check_out(v.node(k));
    double far = 2.0 * std::max(u.half_width(), v.half_width());
    check_out({far, n == 2 ? far : 0.0});
    check_out({-far, n == 2 ? -far : 0.0});
    if (!rep.exterior_ordered)
        throw CertificationFailure("comparison: u <= v fails outside the domain");
    for (std::size_t k = 0; k < u.node_count(); ++k) {
        Vec x = u.node(k);
        if (norm(sub(x, omega.center), n) >= omega.radius)
            continue;
        rep.worst_violation = std::max(rep.worst_violation, u.evaluate(x) - v.evaluate(x));
    }
    rep.passed = rep.worst_violation <= order_slack;
    return rep;
}

double assumption51_delta(const KernelTable& table, double R, double sigma, const QuadConfig& cfg,
                          const std::vector<double>& t_set, int samples_per_axis)
{
    if (!(R > 1.0))
        throw InvalidArgument("R must exceed 1");
    if (table.empty() || table[0].empty())
        throw InvalidArgument("empty kernel table");
    const int n = table[0][0].n();
    const double R5 = std::pow(R, 5.0);
    const double kink = std::pow(R, 2.5);
    const double L = std::ceil(kink) + 1.0;
    const double h = L / 64.0;
    auto phi = [R5, n](const Vec& x) { return std::min(R5, dot(x, x, n)); };
    BoundedFunction u = BoundedFunction::from_closed_form(n, L, h, phi, Exterior::constant(R5), R5);
    const double rad = std::pow(R, 2.0 - sigma);
    std::vector<Vec> pts;
    for (int i = 0; i < samples_per_axis; ++i)
        for (int j = 0; j < (n == 2 ? samples_per_axis : 1); ++j) {
            double a = -rad + 2.0 * rad * (i + 0.5) / samples_per_axis;
            double b = n == 2 ? -rad + 2.0 * rad * (j + 0.5) / samples_per_axis : 0.0;
            Vec x{a, b};
            if (norm(x, n) < rad)
                pts.push_back(x);
        }
    pts.push_back({0.0, 0.0});
    std::vector<double> best(pts.size(), kInf);
    parallel_for(pts.size(), [&](std::size_t q) {
        const Vec& x = pts[q];
        Vec grad = scale(x, 2.0);
        for (const auto& row : table)
            for (const KernelSpec& K : row)
                for (double t : t_set) {
                    OperatorValue v = linear_op(u, x, grad, t, K, cfg);
                    best[q] = std::min(best[q], v.lower());
                }
    });
    return *std::min_element(best.begin(), best.end());
}

}  // namespace nonloc
