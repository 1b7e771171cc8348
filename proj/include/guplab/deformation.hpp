#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "guplab/expr.hpp"
#include "guplab/grid.hpp"

namespace guplab {

// f(p) for [X, P] = i hbar f(P), its first two derivatives, and g = f - 1.
class DeformationSpec {
public:
    DeformationSpec() : DeformationSpec(expr::num(1.0), {}, {}) {}

    DeformationSpec(ExprPtr fexpr, ParamMap params, PhysicalUnits units = {}, bool canonical_limit = true)
        : source_(std::move(fexpr)), params_(std::move(params)), units_(units), canonical_limit_(canonical_limit) {
        units_.validate();
        for (auto& [k, v] : params_)
            if (!std::isfinite(v)) throw ValidationError("parameter '" + k + "' is not finite");
        source_d1_ = guplab::derivative(source_);
        f_ = guplab::bind(source_, params_);
        d1_ = guplab::bind(source_d1_, params_);
        d2_ = guplab::derivative(d1_);
        polynomial_ = guplab::is_polynomial(source_);
        if (polynomial_) {
            c0_ = guplab::coefficients(f_);
            c1_ = guplab::coefficients(d1_);
            c2_ = guplab::coefficients(d2_);
        }
        if (canonical_limit_ && std::abs(f(0.0) - 1.0) > 1e-12)
            throw ValidationError("canonical-limit deformation requires f(0) = 1");
        const MomentumGrid g = MomentumGrid::standard(units_);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double v = f(g[i]);
            if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("deformation not positive");
        }
    }

    // re-binds the same expression with new parameter values
    DeformationSpec rebind(const ParamMap& params) const {
        ParamMap merged = params_;
        for (auto& [k, v] : params) merged[k] = v;
        return DeformationSpec(source_, std::move(merged), units_, canonical_limit_);
    }

    static DeformationSpec gup(double beta, PhysicalUnits units = {}) {
        return DeformationSpec(parse_expression("1 + beta*p^2"), {{"beta", beta}}, units);
    }

    double f(double p) const { return polynomial_ ? horner(c0_, p) : guplab::evaluate(*f_, p); }
    double df(double p) const { return polynomial_ ? horner(c1_, p) : guplab::evaluate(*d1_, p); }
    double d2f(double p) const { return polynomial_ ? horner(c2_, p) : guplab::evaluate(*d2_, p); }
    double g(double p) const { return f(p) - 1.0; }

    VectorXd f_on(const MomentumGrid& grid) const { return map(grid, [this](double p) { return f(p); }); }
    VectorXd df_on(const MomentumGrid& grid) const { return map(grid, [this](double p) { return df(p); }); }
    VectorXd d2f_on(const MomentumGrid& grid) const { return map(grid, [this](double p) { return d2f(p); }); }

    bool is_polynomial() const { return polynomial_; }
    const std::vector<double>& coefficients_f() const { return c0_; }
    const ExprPtr& expression() const { return source_; }
    const ExprPtr& derivative_expression() const { return source_d1_; }
    const ParamMap& params() const { return params_; }
    const PhysicalUnits& units() const { return units_; }
    double hbar() const { return units_.hbar; }

    // true when f == 1 identically
    bool canonical() const {
        return polynomial_ && std::all_of(c0_.begin() + 1, c0_.end(), [](double c) { return c == 0.0; }) &&
               c0_[0] == 1.0;
    }

private:
    ExprPtr source_, source_d1_, f_, d1_, d2_;
    ParamMap params_;
    PhysicalUnits units_;
    bool canonical_limit_ = true;
    bool polynomial_ = false;
    std::vector<double> c0_, c1_, c2_;

    static double horner(const std::vector<double>& c, double p) {
        double r = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * p + *it;
        return r;
    }
    template <class Fn>
    static VectorXd map(const MomentumGrid& grid, Fn fn) {
        VectorXd v(static_cast<Eigen::Index>(grid.size()));
        for (std::size_t i = 0; i < grid.size(); ++i) v[static_cast<Eigen::Index>(i)] = fn(grid[i]);
        return v;
    }
};

inline DeformationSpec parse_deformation(const std::string& text, const ParamMap& params,
                                         PhysicalUnits units = {}, bool canonical_limit = true) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ValidationError("deformation text is empty");
    ExprPtr e = parse_expression(text);
    std::set<std::string> names;
    collect_params(e, names);
    for (auto& n : names)
        if (!params.count(n)) throw ValidationError("unbound parameter '" + n + "'");
    return DeformationSpec(e, params, units, canonical_limit);
}

namespace detail {

template <class Fn>
double simpson_step(Fn& fn, double a, double fa, double b, double fb, double m, double fm, double whole, double tol,
                    int depth, double& worst) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = fn(lm), frm = fn(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || std::abs(b - a) <= 1e-13 * (1.0 + std::abs(a))) {
        return left + right + delta / 15.0;
    }
    if (depth <= 0) {
        worst = std::max(worst, std::abs(delta) / 15.0);
        return left + right + delta / 15.0;
    }
    return simpson_step(fn, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, worst) +
           simpson_step(fn, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, worst);
}

} // namespace detail

// adaptive Simpson on [a, b]; throws when the depth limit is hit before tol
template <class Fn>
double adaptive_simpson(Fn fn, double a, double b, double tol = 1e-12, int max_depth = 60) {
    if (a == b) return 0.0;
    double fa = fn(a), fb = fn(b), m = 0.5 * (a + b), fm = fn(m);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double worst = 0.0;
    double r = detail::simpson_step(fn, a, fa, b, fb, m, fm, whole, tol, max_depth, worst);
    if (worst > tol) throw NumericalError("adaptive quadrature did not converge (achieved " + std::to_string(worst) + ")");
    return r;
}

// k(p) = int_0^p dq / f(q)
inline double momentum_map(const DeformationSpec& spec, double p) {
    auto inv = [&spec](double q) { return 1.0 / spec.f(q); };
    // split at |p| = 1, 2, 4, ... so long ranges start from sensible panels
    double sign = p < 0 ? -1.0 : 1.0, a = 0.0, total = 0.0, target = std::abs(p);
    double b = std::min(1.0, target);
    while (a < target) {
        total += adaptive_simpson([&](double q) { return inv(sign * q); }, a, b, 1e-13);
        a = b;
        b = std::min(2.0 * b, target);
    }
    return sign * total;
}

// k on every grid point, integrating cell by cell outward from p = 0
inline VectorXd momentum_map_on(const DeformationSpec& spec, const MomentumGrid& grid) {
    const std::size_t n = grid.size();
    VectorXd k(static_cast<Eigen::Index>(n));
    std::size_t j0 = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(grid[i]) < std::abs(grid[j0])) j0 = i;
    auto inv = [&spec](double q) { return 1.0 / spec.f(q); };
    k[static_cast<Eigen::Index>(j0)] = momentum_map(spec, grid[j0]);
    for (std::size_t i = j0 + 1; i < n; ++i)
        k[static_cast<Eigen::Index>(i)] = k[static_cast<Eigen::Index>(i - 1)] + adaptive_simpson(inv, grid[i - 1], grid[i], 1e-15);
    for (std::size_t i = j0; i-- > 0;)
        k[static_cast<Eigen::Index>(i)] = k[static_cast<Eigen::Index>(i + 1)] - adaptive_simpson(inv, grid[i], grid[i + 1], 1e-15);
    return k;
}

namespace detail {

// f(p)/p^2 has a positive liminf on p = 1e3 .. 1e6, judged by its trend
inline bool superlinear_tail(const DeformationSpec& spec, double sign) {
    std::vector<double> r;
    for (int j = 0; j <= 6; ++j) {
        double p = sign * std::pow(10.0, 3.0 + 0.5 * j);
        double v = spec.f(p) / (p * p);
        if (!(v > 0.0) || !std::isfinite(v)) return false;
        r.push_back(v);
    }
    // a decay of p^-1/2 per half decade or faster means growth of degree <= 1.5
    return r[6] / r[5] >= std::pow(10.0, -0.25);
}

inline double tail_integral(const DeformationSpec& spec, double sign, double p0) {
    // int_p0^inf dp/f(p) with t = 1/p
    // The integrand varies on the scale t ~ 1/sqrt(leading coefficient), so [0, 1/p0] is cut at
    // decades and each piece integrated separately.
    auto fn = [&](double t) { return 1.0 / (t * t * spec.f(sign / t)); };
    double v = 0.0, err = 0.0, hi = 1.0 / p0;
    for (int k = 0; k <= 12; ++k) {
        const double lo = k == 12 ? 0.0 : hi / 10.0;
        double e = 0.0;
        v += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fn, lo, hi, 4, 1e-10, &e);
        err += e;
        hi = lo;
    }
    if (!(err <= 1e-10 * std::max(1.0, std::abs(v))))
        throw NumericalError("cutoff tail quadrature did not converge (error " + std::to_string(err) + ")");
    return v;
}

} // namespace detail

// lim_{p -> +inf} k(p), or nullopt when the integral diverges
inline std::optional<double> momentum_cutoff(const DeformationSpec& spec) {
    if (!detail::superlinear_tail(spec, 1.0)) return std::nullopt;
    return momentum_map(spec, 1.0) + detail::tail_integral(spec, 1.0, 1.0);
}

// (k(+inf), -k(-inf)); both finite or nullopt
inline std::optional<std::pair<double, double>> momentum_cutoffs(const DeformationSpec& spec) {
    if (!detail::superlinear_tail(spec, 1.0) || !detail::superlinear_tail(spec, -1.0)) return std::nullopt;
    double up = momentum_map(spec, 1.0) + detail::tail_integral(spec, 1.0, 1.0);
    double down = -momentum_map(spec, -1.0) + detail::tail_integral(spec, -1.0, 1.0);
    return std::make_pair(up, down);
}

// psi = Psi / sqrt(f): from measure dp/f to dp
inline GridWaveFunction to_unit_measure(const GridWaveFunction& Psi, const DeformationSpec& spec) {
    VectorXd f = spec.f_on(Psi.grid);
    return Psi.with(Psi.amp.cwiseQuotient(f.cwiseSqrt().cast<cplx>()));
}

// int |Psi|^2 dp/f on the grid
inline double norm_deformed_measure(const GridWaveFunction& Psi, const DeformationSpec& spec) {
    VectorXd f = spec.f_on(Psi.grid);
    const VectorXd& w = Psi.grid.weights();
    double s = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) s += w[i] * std::norm(Psi.amp[i]) / f[i];
    return std::sqrt(s);
}

} // namespace guplab
