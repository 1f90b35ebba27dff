#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nonloc/common.hpp"

namespace nonloc {

using ScalarField = std::function<double(const Vec&)>;

enum class ExteriorKind { constant, power_decay, indicator_slab, callable };

// Closed-form values outside the box.
//  constant:       value
//  power_decay:    value * |x|^{-p}
//  indicator_slab: value on {lo <= x[axis] <= hi}, 0 elsewhere
//  callable:       fn(x), with |fn| <= bound
struct Exterior {
    ExteriorKind kind = ExteriorKind::constant;
    double value = 0.0;
    double p = 0.0;
    double lo = 0.0, hi = 0.0;
    int axis = 0;
    ScalarField fn;
    double bound = 0.0;

    static Exterior constant(double c)
    {
        Exterior e;
        e.value = c;
        return e;
    }
    static Exterior power_decay(double c, double p)
    {
        Exterior e;
        e.kind = ExteriorKind::power_decay;
        e.value = c;
        e.p = p;
        return e;
    }
    static Exterior indicator_slab(double lo, double hi, double value = 1.0, int axis = 0)
    {
        Exterior e;
        e.kind = ExteriorKind::indicator_slab;
        e.lo = lo;
        e.hi = hi;
        e.value = value;
        e.axis = axis;
        return e;
    }
    static Exterior callable(ScalarField f, double bound)
    {
        Exterior e;
        e.kind = ExteriorKind::callable;
        e.fn = std::move(f);
        e.bound = bound;
        return e;
    }

    double operator()(const Vec& x, int n) const;
    // Bound on |value| for x outside the box [-L, L]^n.
    double sup_outside(double L, int n) const;
};

// Bounded function on R^n: samples on a uniform grid of [-L, L]^n, optionally a
// closed-form interior, and a closed-form exterior. Immutable; copies share state.
class BoundedFunction {
public:
    BoundedFunction() = default;

    static BoundedFunction from_grid(int n, double L, double h, std::vector<double> values, Exterior ext);
    // Interior evaluated from f itself; the grid holds its samples. sup_bound is
    // raised to cover the samples if the given value is too small.
    static BoundedFunction from_closed_form(int n, double L, double h, ScalarField f, Exterior ext,
                                            double sup_bound);
    // Rows "x,value" or "x,y,value" covering every grid node once.
    static BoundedFunction from_csv(const std::string& path, int n, double L, double h, Exterior ext);

    int dim() const;
    double half_width() const;
    double spacing() const;
    int nodes_per_axis() const;
    std::size_t node_count() const;
    bool closed_form() const;

    const std::vector<double>& values() const;
    Vec node(std::size_t idx) const;
    std::size_t index(int i, int j = 0) const;
    std::pair<int, int> multi_index(std::size_t idx) const;

    bool in_box(const Vec& x) const;
    double evaluate(const Vec& x) const;
    double operator()(const Vec& x) const { return evaluate(x); }
    double sup_bound() const;
    const Exterior& exterior() const;

    // Same grid and exterior, new node values (interior closed form dropped).
    BoundedFunction with_values(std::vector<double> values) const;

private:
    struct Patch {
        Vec center;
        double radius;
        ScalarField phi;
    };
    struct State {
        int n = 1;
        double L = 1.0, h = 0.1;
        int N = 21;
        std::vector<double> values;
        ScalarField interior;
        Exterior ext;
        double sup = 0.0;
        std::vector<Patch> patches;
    };
    std::shared_ptr<const State> s_;

    double interpolate(const Vec& x) const;
    friend BoundedFunction surgery(const BoundedFunction&, const ScalarField&, const Vec&, double);
};

enum class Side { above, below };

struct TouchingData {
    Vec x{0.0, 0.0};
    Vec grad{0.0, 0.0};
    double opening = 0.0;  // kInf when no finite paraboloid touches
    Side side = Side::above;
};

inline constexpr double kOpeningCap = 1e6;

// Smallest opening M of a paraboloid l(y) + (M/2)|y - x|^2 touching u from
// above (first) and -(M/2)|y - x|^2 from below (second) at x, using the lattice
// x + h Z^n inside B_radius(x). A kink is reported as kInf: it shows up as an
// opening that doubles against the 2h lattice on B_{2 radius}(x).
std::pair<TouchingData, TouchingData> touching_opening(const BoundedFunction& u, const Vec& x, double radius);

// v = phi on the closed ball B_radius(center), u elsewhere.
BoundedFunction surgery(const BoundedFunction& u, const ScalarField& phi, const Vec& center, double radius);

// Central differences with the function's grid spacing.
Vec gradient(const BoundedFunction& u, const Vec& x);

// min over v in R^n of max_i (c_i - s_i . v); returns the value and a minimizer.
// Exposed for the envelope code and tests.
std::pair<double, Vec> min_max_affine(int n, const std::vector<double>& c, const std::vector<Vec>& s, double box);

}  // namespace nonloc
