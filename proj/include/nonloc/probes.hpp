#pragma once

#include <string>
#include <vector>

#include "nonloc/barriers.hpp"
#include "nonloc/funcspace.hpp"
#include "nonloc/kernel.hpp"

namespace nonloc {

// Least-squares line y = intercept + slope x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// Index range [first, last) of the middle 60% of count samples (at least two when count >= 2).
std::pair<std::size_t, std::size_t> middle_window(std::size_t count);

struct DecayFit {
    Vec x{0.0, 0.0};
    double r = 1.0, c0 = 0.0, sigma = 1.5;
    std::vector<double> t;
    std::vector<double> measure;   // |{u > t} cap B_r(x)| on the grid
    bool step = false;             // measures take at most one positive value in the window
    double eps_star = 0.0;         // fitted exponent
    double C = 0.0;                // least-squares constant in C r^n (u(x) + c0 r^sigma)^eps t^-eps
    double C_envelope = 0.0;       // smallest constant with the fitted exponent above the window
    double scale = 1.0;            // r^n (u(x) + c0 r^sigma)^eps, or r^n when the base is 0
    bool dominates = false;        // envelope curve >= measurements on the window
    bool dominates_all = false;    // same, on every t
    bool nonincreasing = true;
    std::size_t window_lo = 0, window_hi = 0;

    double curve(double t, double constant) const;
};

DecayFit levelset_decay(const BoundedFunction& u, const Vec& x, double r, double c0, double sigma,
                        const std::vector<double>& t_grid);

struct HarnackReport {
    double sigma = 0.0;
    double sup = 0.0, inf = 0.0;
    double C0 = 0.0;
    double ratio = 0.0;  // sup / (inf + C0)
};

// Exact grid sup and inf over the nodes of the closed ball B_{1/2}.
HarnackReport harnack_ratio(const BoundedFunction& u, double C0, double sigma = 0.0);

struct HolderReport {
    int N = 1;
    Vec center{0.0, 0.0};
    std::vector<double> radius;   // 2^{-kN}
    std::vector<double> m, M;     // min and max over B_radius(center)
    std::vector<double> osc;
    double alpha = 0.0;           // kInf when u is constant on the largest ball
    bool capped = false;
    bool monotone = true;         // m nondecreasing, M nonincreasing
};

// Grid functions need at least 8 nodes across the smallest ball; closed forms
// are sampled at 64 points per axis on each ball.
HolderReport oscillation_cascade(const BoundedFunction& u, int N, int k_max, const Vec& center = {0.0, 0.0});

struct QuotientRow {
    Vec h{0.0, 0.0};
    double alpha = 0.0;
    bool capped = false;
    double L1 = 0.0, L2 = 0.0;         // tail terms at x = 0
    double L1_err = 0.0, L2_err = 0.0;
    double L1_bound = 0.0;             // |u|_inf * display * |h|^{1-beta}
    double L2_bound = 0.0;             // |u|_inf * Lip(cutoff) * tail mass * |h|^{1-beta}
    bool L1_ok = false, L2_ok = false;
};

struct QuotientReport {
    double beta = 1.0, delta = 1.0;
    double min_alpha = kInf;
    double indicated_exponent = 0.0;   // beta + min_alpha
    bool tails_ok = true;
    std::vector<QuotientRow> rows;
};

struct QuotientConfig {
    int N = 1;
    int k_max = 10;
    int radial_nodes = 16;
    int angular_nodes = 64;
};

// w^h = (u(. + h) - u) / |h|^beta, split with a smooth cutoff equal to 1 on
// B_{delta/2} and 0 off B_delta. The tail bounds use the radial display at rho = delta/4.
QuotientReport difference_quotient_probe(const BoundedFunction& u, const KernelSpec& K, double beta,
                                         const std::vector<Vec>& h_set, double delta,
                                         const QuotientConfig& cfg = {});

// Nonnegative supersolution built from Psi: u = kappa (Psi(0) - Psi) with
// kappa = eps0 / sup of the defect, so that the minimal operator of u is at most eps0.
struct BarrierScenario {
    PsiParams psi;
    double sigma = 1.5;
    double eps0 = 0.01;
    double defect_sup = 0.0;
    double kappa = 0.0;
    BoundedFunction u;
    double inf_q1 = 0.0;
    double nu = 0.1;
    double M = kInf;             // smallest M with |{u <= M} cap Q_1| >= nu
    double measure_at_M = 0.0;
};

BarrierScenario barrier_scenario(int n, double p, double sigma, double lambda_lo, double lambda_hi, double eps0,
                                 const QuadConfig& cfg = {}, double nu = 0.1, double h = 1.0 / 256.0);

}  // namespace nonloc
