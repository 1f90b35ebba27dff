#pragma once

#include <vector>

#include "nonloc/funcspace.hpp"

namespace nonloc {

// Concave envelope of u+ over the grid nodes of B_2 (the grid of u).
struct EnvelopeResult {
    BoundedFunction u;
    std::vector<double> gamma;     // per grid node, 0 outside B_2
    std::vector<Vec> supergrad;    // one element of the superdifferential per node
    std::vector<char> in_b2;
    std::vector<char> contact;     // nodes of B_1 with gamma - u <= tol_contact
    double tol_contact = 0.0;
    std::vector<std::size_t> hull;        // 1D: hull vertex nodes in increasing x
    std::vector<std::size_t> candidates;  // 2D: nodes that can be hull vertices

    std::size_t contact_count() const;
};

// tol_contact < 0 selects 1e-9 (1 + sup u+).
EnvelopeResult concave_envelope(const BoundedFunction& u, double tol_contact = -1.0);

// Superdifferential of the hull at a node: an interval [lo, hi] in 1D, a polygon
// (vertex list) in 2D.
std::vector<Vec> superdifferential(const EnvelopeResult& env, std::size_t node);

double g_eta(const Vec& z, double eta, int n);
// Integral of g_eta over the superdifferential of a node.
double ma_measure(const EnvelopeResult& env, std::size_t node, double eta);

struct RingFamily {
    Vec center{0.0, 0.0};
    double rho0 = 0.0;
    std::vector<double> radii;  // r_0 > r_1 > ...
};
RingFamily ring_family(int n, const Vec& x, double sigma, int k_max);

struct RingCheck {
    int k_found = -1;
    double best_ratio = kInf;            // min over k of fraction * M / (f + |grad Gamma|)
    std::vector<double> fractions;       // NaN for skipped rings
    std::vector<int> counts;
    int skipped = 0;
};
// Fraction of lattice points of each ring where the lower extremal negative
// increment is at least M r_k^2; the first k below C (f + |grad Gamma|) / M is reported.
RingCheck ring_measure_check(const EnvelopeResult& env, std::size_t node, double M, double f_val, double sigma,
                             double C = 1.0, int k_max = 8);

struct Cube {
    Vec center{0.0, 0.0};
    double side = 0.0;
    double diameter = 0.0;
    int depth = 0;
    std::array<long, 2> index{0, 0};  // lower corner in units of side
    bool e = false, f = false;
    double lhs_e = 0.0, rhs_e = 0.0;
    double measure_f = 0.0;
};

struct CubeConfig {
    double C = 10.0;
    double gamma = 0.0;     // (f) requires measure >= gamma |Q| and measure > 0
    int depth_cap = 12;
    double eta = -1.0;      // < 0 selects the L^n norm of f on the contact set
};

struct CubeCover {
    std::vector<Cube> cubes;
    bool a = true, b = true, c = true, d = true;  // disjoint, covers contact, meets contact, small
    bool e_all = true, f_all = true;
    bool max_depth_hit = false;
    double gamma_measured = kInf;  // min of measure_f / |Q|
    double d0 = 0.0;
    double C = 0.0;
    double eta = 0.0;
};

CubeCover cube_decomposition(const EnvelopeResult& env, const ScalarField& f, double sigma,
                             const CubeConfig& cfg = {});

// Smallest C = 2^{k/4}, k = 0, 1, ..., k_max, whose decomposition never hits the depth cap.
CubeCover calibrate_cover(const EnvelopeResult& env, const ScalarField& f, double sigma, CubeConfig cfg = {},
                          int k_max = 80);

struct AlexandroffResult {
    double lhs = 0.0;          // integral of g_eta over the gradient image of the contact set
    double rhs = 0.0;          // sum over cubes of sup (1 + eta^{-n} |f|^n) |Q|
    double implied_C = 0.0;    // lhs / rhs
    double sup_u_plus = 0.0;
    double f_norm = 0.0;       // L^n norm of f on the contact set
    double abp_ratio = 0.0;    // sup u+ / f_norm
    double eta = 0.0;
};
AlexandroffResult alexandroff_aggregate(const CubeCover& cover, const EnvelopeResult& env, const ScalarField& f,
                                        double eta = -1.0);

enum class CzOutcome { hypotheses_unmet, holds, violated };

// Masks over the 2^level (per axis) dyadic cells of Q_1, row-major with x fastest.
CzOutcome dyadic_cz_check(const std::vector<char>& A, const std::vector<char>& B, int n, int level, double delta);

}  // namespace nonloc
