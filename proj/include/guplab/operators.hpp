#pragma once

#include <functional>
#include <string>

#include "guplab/deformation.hpp"
#include "guplab/grid.hpp"

namespace guplab {

struct OperatorAction {
    std::string label;
    std::function<GridWaveFunction(const GridWaveFunction&)> apply;
    bool symmetric = true;

    GridWaveFunction operator()(const GridWaveFunction& psi) const { return apply(psi); }
};

inline constexpr cplx iunit{0.0, 1.0};

// x = i hbar d/dp
inline GridWaveFunction canonical_x(const GridWaveFunction& psi, double hbar = 1.0) {
    GridWaveFunction d = differentiate(psi, 1);
    d.amp *= iunit * hbar;
    return d;
}

inline GridWaveFunction canonical_p(const GridWaveFunction& psi) { return multiply(psi, psi.grid.points()); }

// i hbar f psi' + (i hbar / 2) f' psi
inline GridWaveFunction deformed_X(const DeformationSpec& spec, const GridWaveFunction& psi) {
    GridWaveFunction d = differentiate(psi, 1);
    VectorXd f = spec.f_on(psi.grid), df = spec.df_on(psi.grid);
    const cplx ih = iunit * spec.hbar();
    for (Eigen::Index i = 0; i < d.amp.size(); ++i) d.amp[i] = ih * (f[i] * d.amp[i] + 0.5 * df[i] * psi.amp[i]);
    return d;
}

// sqrt(f) x sqrt(f), differentiating the product directly
inline GridWaveFunction deformed_X_sqrt_form(const DeformationSpec& spec, const GridWaveFunction& psi) {
    VectorXd s = spec.f_on(psi.grid).cwiseSqrt();
    GridWaveFunction inner = multiply(psi, s);
    GridWaveFunction d = canonical_x(inner, spec.hbar());
    return multiply(d, s);
}

// sqrt(g) on the grid. When g vanishes at p = 0 the branch sign(p) sqrt(g) is
// used: sign(p)^2 = 1 leaves the operator unchanged and keeps the factor smooth.
inline VectorXd sqrt_g_on(const DeformationSpec& spec, const MomentumGrid& grid) {
    VectorXd s(static_cast<Eigen::Index>(grid.size()));
    const bool odd_branch = std::abs(spec.g(0.0)) <= 1e-14;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double g = spec.g(grid[i]);
        if (g < -1e-13 * std::max(1.0, spec.f(grid[i]))) throw ValidationError("g not nonnegative");
        double r = std::sqrt(std::max(g, 0.0));
        s[static_cast<Eigen::Index>(i)] = (odd_branch && grid[i] < 0) ? -r : r;
    }
    return s;
}

// x + sqrt(g) x sqrt(g)
inline GridWaveFunction deformed_X_via_g(const DeformationSpec& spec, const GridWaveFunction& psi) {
    VectorXd s = sqrt_g_on(spec, psi.grid);
    GridWaveFunction a = canonical_x(psi, spec.hbar());
    GridWaveFunction b = multiply(canonical_x(multiply(psi, s), spec.hbar()), s);
    return a.with(a.amp + b.amp, b.boundary_warning);
}

// f(p) x: not symmetric
inline GridWaveFunction nonsymmetric_X(const DeformationSpec& spec, const GridWaveFunction& psi) {
    return multiply(canonical_x(psi, spec.hbar()), spec.f_on(psi.grid));
}

inline OperatorAction X_action(const DeformationSpec& spec) {
    return {"X", [spec](const GridWaveFunction& psi) { return deformed_X(spec, psi); }, true};
}
inline OperatorAction P_action() {
    return {"P", [](const GridWaveFunction& psi) { return canonical_p(psi); }, true};
}
inline OperatorAction x_action(double hbar = 1.0) {
    return {"x", [hbar](const GridWaveFunction& psi) { return canonical_x(psi, hbar); }, true};
}

// ||[X, P] psi - i hbar f psi|| / ||psi||
inline double commutator_residual(const DeformationSpec& spec, const GridWaveFunction& psi) {
    GridWaveFunction xp = deformed_X(spec, canonical_p(psi));
    GridWaveFunction px = canonical_p(deformed_X(spec, psi));
    VectorXd f = spec.f_on(psi.grid);
    GridWaveFunction r = psi.with(xp.amp - px.amp - (iunit * spec.hbar()) * psi.amp.cwiseProduct(f.cast<cplx>()));
    return norm(r) / norm(psi);
}

struct GupCheck {
    double dx = 0, dp = 0, lhs = 0, rhs = 0;
    bool satisfied = false;
};

// Both sides without the domain guard; for slowly decaying states such as the
// minimal-length family, whose 1/p^2 tails never pass the heuristic.
inline GupCheck gup_terms(const DeformationSpec& spec, const GridWaveFunction& psi) {
    GupCheck c;
    c.dx = uncertainty(psi, X_action(spec));
    c.dp = uncertainty(psi, P_action());
    c.lhs = c.dx * c.dp;
    cplx mf = inner_product(psi, multiply(psi, spec.f_on(psi.grid)));
    c.rhs = 0.5 * spec.hbar() * std::abs(mf);
    c.satisfied = c.lhs >= c.rhs - 1e-9;
    return c;
}

// dX dP >= (hbar/2) |<f(P)>|, the Robertson bound of [X, P] = i hbar f(P)
inline GupCheck check_gup(const DeformationSpec& spec, const GridWaveFunction& psi) {
    if (!schwartz_check(psi).passed) throw ValidationError("state outside physical domain heuristic");
    return gup_terms(spec, psi);
}

} // namespace guplab
