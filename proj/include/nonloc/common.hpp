#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonloc {

// Points in R^n for n in {1,2}; the second slot is zero when n == 1.
using Vec = std::array<double, 2>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a quadrature or solve cannot produce a trustworthy number.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A certificate that a downstream check depends on did not hold.
struct CertificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double dot(const Vec& a, const Vec& b, int n)
{
    return n == 1 ? a[0] * b[0] : a[0] * b[0] + a[1] * b[1];
}

inline double norm(const Vec& a, int n) { return std::sqrt(dot(a, a, n)); }

inline Vec add(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec scale(const Vec& a, double s) { return {a[0] * s, a[1] * s}; }

// Surface measure of the unit sphere; for n = 1 this is the counting measure on {-1, 1}.
inline double omega(int n) { return n == 1 ? 2.0 : 2.0 * std::numbers::pi; }

inline void check_dim(int n)
{
    if (n != 1 && n != 2)
        throw InvalidArgument("dimension must be 1 or 2, got " + std::to_string(n));
}

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Cached per node count; safe to call from several threads after first use.
const GaussRule& gauss_legendre(int m);

// Runs fn(i) for i in [0, count). Output must go to per-index slots so that the
// result does not depend on the schedule.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace nonloc
