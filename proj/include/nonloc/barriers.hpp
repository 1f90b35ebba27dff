#pragma once

#include <vector>

#include "nonloc/funcspace.hpp"
#include "nonloc/nonlocal_eval.hpp"

namespace nonloc {

// min(plateau^{-p}, |x|^{-p}).
double f_p(const Vec& x, int n, double p, double plateau);

// Positivity margin of the second-order expansion of |e + y|^{-p} on B_r.
double delta0(double r, double p, int n);
// Limit of delta0 as r -> 0.
double delta0_limit(double p, int n);

// Radial profile: 0 outside B_sqrt(n), c(|x|^{-p} - n^{-p/2}) on the annulus,
// c(a + b|x|^2) on B_delta.
struct PsiParams {
    int n = 1;
    double p = 2.0;
    double delta = 0.125;
    double a = 0.0, b = 0.0;
    double c = 1.0;
};

PsiParams build_psi(int n, double p, double delta);
double special_psi(const Vec& x, const PsiParams& P);
Vec special_psi_gradient(const Vec& x, const PsiParams& P);

// c (1 - |x|^2)_+.
double bump(const Vec& x, int n, double c);

struct BarrierParams {
    int n = 1;
    double p = 0.0;
    double delta = 0.125;
    double sigma_star = 0.0;
    double r = 0.0;
    double delta0 = 0.0;
    double c_psi = 0.0;
    double rho0 = 0.0;
    double quad_a = 0.0, quad_b = 0.0;
    double margin = 0.0;
};

struct SubsolutionMargin {
    double margin = kInf;  // min of the certified lower bound of the minimal operator
    Vec worst_x{0.0, 0.0};
    double worst_value = 0.0;
    double worst_err = 0.0;
};

// Checks the minimal operator on min(2^p, |x|^{-p}) at |x| in {1, 1.25, 1.5, 2, 4}.
SubsolutionMargin verify_subsolution(int n, double p, double sigma, double lambda_lo, double lambda_hi,
                                     const QuadConfig& cfg = {});

// f_p as a closed-form bounded function on [-L, L]^n with the power-decay exterior.
BoundedFunction barrier_function(int n, double p, double plateau, double L, double h);

struct ScanRow {
    double p, sigma, margin;
};
struct ScanResult {
    bool found = false;
    BarrierParams params;
    std::vector<ScanRow> rows;
};

// For each p in {n+1, ..., p_max} evaluates every sigma; sigma* is the smallest
// sampled sigma from which all larger samples pass. Stops at the first p with a sigma*.
ScanResult scan_barrier(int n, double lambda_lo, double lambda_hi, const QuadConfig& cfg = {}, int p_max = 16,
                        std::vector<double> sigmas = {1.5, 1.8, 1.9, 1.95, 1.99}, double delta = 0.125);

// Psi as a closed-form bounded function on [-L, L]^n with zero exterior.
BoundedFunction psi_function(const PsiParams& P, double L, double h);

struct DefectResult {
    BoundedFunction psi;      // defect on a grid over B_{1/4}, zero elsewhere
    double sup = 0.0;
    double outside_min = kInf;  // min over sampled 1/4 < |x| of the upper bound of the minimal operator
    Vec outside_worst{0.0, 0.0};
    int outside_tested = 0;
};

// psi(x) = max(0, -M^-Psi(x) + err) on grid nodes of B_{1/4} with spacing h.
DefectResult psi_defect(double sigma, const PsiParams& P, double lambda_lo, double lambda_hi, const QuadConfig& cfg,
                        double h = 1.0 / 32.0);

}  // namespace nonloc
