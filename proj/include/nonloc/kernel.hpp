#pragma once

#include <functional>
#include <vector>

#include "nonloc/common.hpp"
#include "nonloc/quadrature.hpp"

namespace nonloc {

enum class ProfileKind { isotropic, two_valued, table, callable };

// Directional coefficient a(theta).
//  isotropic:  data = {a}
//  two_valued: data = {a_up, a_down}; a_up where the last coordinate of theta is > 0
//  table:      n = 1: data = {a(+1), a(-1)}; n = 2: m equal angular bins starting at angle 0
//  callable:   fn(theta)
struct Profile {
    ProfileKind kind = ProfileKind::isotropic;
    std::vector<double> data{1.0};
    std::function<double(const Vec&)> fn;

    static Profile isotropic(double a) { return {ProfileKind::isotropic, {a}, {}}; }
    static Profile two_valued(double up, double down) { return {ProfileKind::two_valued, {up, down}, {}}; }
    static Profile table(std::vector<double> v) { return {ProfileKind::table, std::move(v), {}}; }
    static Profile callable(std::function<double(const Vec&)> f) { return {ProfileKind::callable, {}, std::move(f)}; }
};

class KernelSpec {
public:
    int n() const { return n_; }
    double sigma() const { return sigma_; }
    double lambda_lo() const { return lo_; }
    double lambda_hi() const { return hi_; }
    const Profile& profile() const { return profile_; }
    bool symmetric() const { return symmetric_; }
    double scale() const { return scale_; }

    // a(theta) for a unit vector theta.
    double coefficient(const Vec& theta) const;
    // K(y); throws on y = 0.
    double operator()(const Vec& y) const;

    // Integral of a over the unit sphere and of theta * a(theta).
    double mass() const { return mass_; }
    Vec first_moment() const { return moment_; }
    // Angles in [0, 2pi) where a may jump (n = 2 only).
    std::vector<double> angular_breaks() const;

private:
    friend KernelSpec make_power_kernel(int, double, double, double, Profile);
    friend KernelSpec rescale_kernel(const KernelSpec&, double);

    int n_ = 1;
    double sigma_ = 1.5, lo_ = 1.0, hi_ = 1.0;
    Profile profile_;
    bool symmetric_ = true;
    double scale_ = 1.0;
    double mass_ = 2.0;
    Vec moment_{0.0, 0.0};
};

KernelSpec make_power_kernel(int n, double sigma, double lambda_lo, double lambda_hi, Profile profile);

// y -> t^{-n-sigma} K(y / t).
KernelSpec rescale_kernel(const KernelSpec& K, double t);

// Integral of (|y|^2 ^ 1) K(y): closed form and a quadrature cross-check.
double truncated_second_moment(const KernelSpec& K);
double truncated_second_moment_quadrature(const KernelSpec& K, double r_min = 1e-30, double r_max = 1e30,
                                          int nodes = 16);

struct SmoothnessReport {
    double bound = 0.0;              // max over h of the quotient
    double err = 0.0;                // quadrature error estimate for the maximizing h
    std::vector<double> quotient;    // one per sample h
    bool converged = true;
    bool in_L01 = true;              // no |h|^{-1} type growth across the samples
    double growth = 1.0;             // quotient(smallest |h|) / quotient(largest |h|)
};

SmoothnessReport translation_smoothness_bound(const KernelSpec& K, double rho1, const std::vector<Vec>& h_samples,
                                              const QuadConfig& cfg = {});

// The mean value theorem bound for radial kernels,
// (2-s) Lambda (n+s) 2^{n+s+1} omega_n / (s+1) rho1^{-1-s}.
double radial_smoothness_display(const KernelSpec& K, double rho1);

}  // namespace nonloc
