#pragma once

#include <vector>

#include "nonloc/funcspace.hpp"
#include "nonloc/nonlocal_eval.hpp"

namespace nonloc {

// Exterior Dirichlet problem: Op u = f on the open ball Omega, u = g elsewhere.
// g is sampled at box nodes outside Omega; beyond the box u equals g_far.
struct SolveConfig {
    int n = 1;
    double L = 1.25;
    double h = 1.0 / 64.0;
    Region omega{{0.0, 0.0}, 1.0};
    OperatorSpec op = PucciSpec{};
    ScalarField g = [](const Vec&) { return 0.0; };
    double g_far = 0.0;
    ScalarField f = [](const Vec&) { return 0.0; };
    double tau = 0.0;  // 0 selects min(h^sigma / 4, 0.95 / D_max)
    double tol = 1e-6;
    int max_iter = 200000;
    // Called with the iterate after every accepted step (tests use it).
    std::function<void(int, const std::vector<double>&)> observer;

    void validate() const;
};

struct SolveResult {
    BoundedFunction u;
    std::vector<double> residuals;  // sup residual of accepted iterates
    int iterations = 0;
    bool converged = false;
    double residual = kInf;
    double tau = 0.0;
    int rejected = 0;
};

SolveResult solve_dirichlet(const SolveConfig& cfg);

// Discrete operator of the solver applied to node values (box grid of cfg),
// returned for Omega nodes (others 0).
std::vector<double> apply_discrete(const SolveConfig& cfg, const std::vector<double>& values);

struct ComparisonReport {
    ViscosityReport sub;    // u as subsolution
    ViscosityReport super;  // v as supersolution
    bool exterior_ordered = true;
    double worst_violation = 0.0;  // max over Omega nodes of u - v
    bool passed = false;
};

// Certifies u (sub) and v (super) with viscosity_check at the given slack, checks
// u <= v off Omega, then u <= v + slack on Omega. Throws CertificationFailure when
// a certificate fails.
ComparisonReport comparison_check(const BoundedFunction& u, const BoundedFunction& v, const OperatorSpec& op,
                                  const ScalarField& f, const Region& omega, const QuadConfig& cfg = {},
                                  double cert_slack = 0.0, double order_slack = 0.0);

// min over kernels, thresholds and x in B_{R^{2-sigma}} of the lower bound of
// L(R^5 ^ |x|^2)(x).
double assumption51_delta(const KernelTable& table, double R, double sigma, const QuadConfig& cfg = {},
                          const std::vector<double>& t_set = {0.5, 1.0, 2.0, kInf}, int samples_per_axis = 9);

}  // namespace nonloc
