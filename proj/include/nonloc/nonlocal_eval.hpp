#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "nonloc/funcspace.hpp"
#include "nonloc/kernel.hpp"
#include "nonloc/quadrature.hpp"

namespace nonloc {

struct OperatorValue {
    double value = 0.0;
    double near_field = 0.0;  // never estimated; see near_lo / near_hi
    double mid_field = 0.0;
    double tail = 0.0;
    double err_est = 0.0;

    // One-sided bounds for the discarded |y| < eps_pv part, from the openings.
    double near_lo = 0.0;
    double near_hi = 0.0;
    double quad_err = 0.0;
    double tail_err = 0.0;

    double lower() const { return value + near_lo - quad_err - tail_err; }
    double upper() const { return value + near_hi + quad_err + tail_err; }
};

// Openings of paraboloids touching from above / below; kInf when unavailable.
struct Openings {
    double above = kInf;
    double below = kInf;
};

// u(x+y) - u(x) - (grad . y) 1{|y| < t}.
double mu(const BoundedFunction& u, const Vec& x, const Vec& y, const Vec& grad, double t);

struct ExtremalMu {
    double sup_plus, inf_plus, sup_minus, inf_minus;
};
ExtremalMu extremal_mu(const BoundedFunction& u, const Vec& x, const Vec& y, const Vec& grad);
// Same rule from the increment d1 = u(x+y) - u(x) and g = grad . y.
ExtremalMu extremal_mu_from(double d1, double g, double ynorm);

// Openings measured on the lattice of u around x.
Openings measure_openings(const BoundedFunction& u, const Vec& x, const QuadConfig& cfg);

// PV integral of mu_t K. When `open` is absent the openings are measured and
// must both be finite.
OperatorValue linear_op(const BoundedFunction& u, const Vec& x, const Vec& grad, double t, const KernelSpec& K,
                        const QuadConfig& cfg = {}, std::optional<Openings> open = std::nullopt);

// sign = +1 for the maximal operator, -1 for the minimal one.
OperatorValue pucci(const BoundedFunction& u, const Vec& x, const Vec& grad, double lambda_lo, double lambda_hi,
                    double sigma, int sign, const QuadConfig& cfg = {}, std::optional<Openings> open = std::nullopt);

// Integrand of the extremal operators without the (2-s)/|y|^{n+s} factor.
double pucci_integrand(const ExtremalMu& e, double lambda_lo, double lambda_hi, int sign);

using KernelTable = std::vector<std::vector<KernelSpec>>;  // [alpha][beta]

struct InfSupValue {
    OperatorValue op;
    int t_index = -1;
    int alpha = -1;  // for the selected t and beta
    int beta = -1;
};

// inf over beta of sup over alpha of L^t, then sup (mode > 0) or inf over t_set.
InfSupValue infsup_op(const BoundedFunction& u, const Vec& x, const Vec& grad, const KernelTable& table,
                      const std::vector<double>& t_set, int mode, const QuadConfig& cfg = {},
                      std::optional<Openings> open = std::nullopt);

// Gap between the pointwise-in-y extremal form and the best single threshold
// from cfg.t_set (evaluated with the isotropic extremal kernels). Nonnegative up
// to quadrature error.
double pucci_t_gap(const BoundedFunction& u, const Vec& x, const Vec& grad, double lambda_lo, double lambda_hi,
                   double sigma, int sign, const QuadConfig& cfg = {}, std::optional<Openings> open = std::nullopt);

struct PucciSpec {
    double lambda_lo = 1.0, lambda_hi = 1.0, sigma = 1.5;
    int sign = 1;
};
struct LinearSpec {
    KernelSpec K;
    double t = 0.5;
};
struct InfSupSpec {
    KernelTable table;
    std::vector<double> t_set{0.5, 1.0, 2.0, kInf};
    int mode = 1;
};
using OperatorSpec = std::variant<PucciSpec, LinearSpec, InfSupSpec>;

OperatorValue apply_operator(const OperatorSpec& op, const BoundedFunction& u, const Vec& x, const Vec& grad,
                             const QuadConfig& cfg, std::optional<Openings> open = std::nullopt);

enum class Inequality { sub, super };  // operator >= f, operator <= f

struct Region {
    Vec center{0.0, 0.0};
    double radius = 1.0;
};

struct ViscosityReport {
    int tested = 0;
    int passed = 0;
    int failed = 0;
    int skipped = 0;          // infinite opening on the tested side
    double worst_margin = kInf;
    Vec worst_point{0.0, 0.0};
};

// For grid nodes in the region (open ball), evaluates the operator with the
// touching gradient and checks the inequality. The margin of a point is
// (value - f) for sub, (f - value) for super, widened by the one-sided error
// bounds and `slack`; the point passes when the margin is >= 0.
ViscosityReport viscosity_check(const BoundedFunction& u, const Region& region, const ScalarField& f, Inequality side,
                                const OperatorSpec& op, const QuadConfig& cfg = {}, double slack = 0.0,
                                double touch_radius = 0.0);

}  // namespace nonloc
