#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "guplab/deformation.hpp"
#include "guplab/grid.hpp"
#include "guplab/operators.hpp"

namespace guplab {

struct SqueezedParams {
    double a = 1.0;
    double x0 = 0.0;
    double p0 = 0.0;
};

struct MLParams {
    double xi = 0.0;
    double beta = 0.01;
};

inline std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

// (a/pi)^(1/4) exp(-a (p - p0)^2 / 2 - i p x0 / hbar)
inline GridWaveFunction squeezed_state(const SqueezedParams& s, const MomentumGrid& grid, double hbar = 1.0) {
    if (!(s.a > 0.0) || !std::isfinite(s.a)) throw ValidationError("squeezing a must be positive");
    const double reach = 8.0 / std::sqrt(s.a);
    if (grid.p_min() > s.p0 - reach || grid.p_max() < s.p0 + reach)
        throw ValidationError("grid too narrow for squeezing a");
    const double pref = std::pow(s.a / std::numbers::pi, 0.25);
    return sample(grid, [&](double p) {
        double d = p - s.p0;
        return pref * std::exp(-0.5 * s.a * d * d) * std::polar(1.0, -p * s.x0 / hbar);
    });
}

// Grid sized for a squeezed state: +-12/sqrt(a) around p0, step fine enough to
// resolve positions out to |x0| + 12 hbar sqrt(a), size a power of two.
inline MomentumGrid squeezed_grid(const SqueezedParams& s, double hbar = 1.0, std::size_t min_points = 256) {
    const double half = 12.0 / std::sqrt(s.a);
    const double reach_x = std::abs(s.x0) + 12.0 * hbar * std::sqrt(s.a);
    const double h = 0.8 * std::numbers::pi * hbar / reach_x;
    std::size_t n = next_pow2(static_cast<std::size_t>(std::ceil(2.0 * half / h)) + 1);
    return MomentumGrid::centered(s.p0, half, std::max(n, min_points));
}

// (int dp/f)^(-1/2) f^(-1/2) exp(-i x k(p) / hbar)
inline GridWaveFunction deformed_eigenstate(const DeformationSpec& spec, double x, const MomentumGrid& grid) {
    auto cut = momentum_cutoffs(spec);
    if (!cut) throw ValidationError("eigenstate not normalizable for this f");
    const double total = cut->first + cut->second;
    const double pref = 1.0 / std::sqrt(total);
    VectorXd f = spec.f_on(grid);
    VectorXcd a(f.size());
    if (x == 0.0) {
        for (Eigen::Index i = 0; i < f.size(); ++i) a[i] = pref / std::sqrt(f[i]);
    } else {
        VectorXd k = momentum_map_on(spec, grid);
        for (Eigen::Index i = 0; i < f.size(); ++i) a[i] = pref / std::sqrt(f[i]) * std::polar(1.0, -x * k[i] / spec.hbar());
    }
    return GridWaveFunction(grid, std::move(a));
}

// sqrt(2 sqrt(beta)/pi) / (1 + beta p^2) * exp(-i xi atan(sqrt(beta) p) / (hbar sqrt(beta)))
inline cplx ml_amplitude(const MLParams& m, double p, double hbar = 1.0) {
    const double sb = std::sqrt(m.beta);
    const double pref = std::sqrt(2.0 * sb / std::numbers::pi);
    return pref / (1.0 + m.beta * p * p) * std::polar(1.0, -m.xi / (hbar * sb) * std::atan(sb * p));
}

inline GridWaveFunction ml_state(const MLParams& m, const MomentumGrid& grid, double hbar = 1.0, bool renormalize = true) {
    if (!(m.beta > 0.0) || !std::isfinite(m.beta)) throw ValidationError("minimal-length state requires beta > 0");
    const double reach = 10.0 / std::sqrt(m.beta);
    if (grid.p_min() > -reach || grid.p_max() < reach)
        throw ValidationError("grid too narrow for minimal-length state");
    GridWaveFunction psi = sample(grid, [&](double p) { return ml_amplitude(m, p, hbar); });
    return renormalize ? normalize(psi) : psi;
}

// +-200/sqrt(beta) with step 0.05/sqrt(beta): the poles at p = +-i/sqrt(beta) sit twenty steps
// off the axis. The phase exp(-i xi atan(sqrt(beta) p)/(hbar sqrt(beta))) grows near the poles, so
// the step shrinks once xi/(hbar sqrt(beta)) exceeds 7.
inline MomentumGrid ml_grid(double beta, double xi = 0.0, double hbar = 1.0, double half_width_factor = 200.0) {
    if (!(beta > 0.0)) throw ValidationError("minimal-length state requires beta > 0");
    const double sb = std::sqrt(beta);
    const double h = 0.05 / sb / std::max(1.0, std::abs(xi) / (7.0 * hbar * sb));
    const double half = half_width_factor / sb;
    const double n = 2.0 * std::ceil(half / h) + 1.0;
    if (n > double(1 << 22)) throw ValidationError("minimal-length grid too large for this xi/sqrt(beta)");
    return MomentumGrid::centered(0.0, half, std::size_t(n));
}

// xi = X + i hbar beta P
inline GridWaveFunction xi_apply(const MLParams& m, const GridWaveFunction& psi, double hbar = 1.0) {
    PhysicalUnits u;
    u.hbar = hbar;
    GridWaveFunction x = deformed_X(DeformationSpec::gup(m.beta, u), psi);
    const VectorXd& p = psi.grid.points();
    for (Eigen::Index i = 0; i < p.size(); ++i) x.amp[i] += iunit * (hbar * m.beta * p[i]) * psi.amp[i];
    return x;
}

// closed-form deformed position uncertainty of a squeezed state for f = 1 + beta p^2
inline double gaussian_deformed_dx(const SqueezedParams& s, double beta, double hbar = 1.0) {
    const double a = s.a, x0 = s.x0, p0 = s.p0, h2 = hbar * hbar, b2 = beta * beta;
    double v = 0.5 * h2 * a * (1.0 + beta / a + 1.75 * b2 / (a * a)) + h2 * a * beta * p0 * p0 * (1.0 + 0.5 * beta * p0 * p0) +
               2.5 * h2 * b2 * p0 * p0 + 2.0 * b2 / a * x0 * x0 * p0 * p0 + b2 / (2.0 * a * a) * x0 * x0;
    return std::sqrt(v);
}

struct MinDx {
    double a_star = 0;
    double dx_min = 0;
};

// golden section in log a; the bracket [beta/100, 100 beta] grows while the minimum sits at an end
inline MinDx min_dx_over_gaussians(double beta, double x0, double p0, double hbar = 1.0) {
    if (!(beta > 0.0)) throw ValidationError("min_dx_over_gaussians requires beta > 0");
    auto F = [&](double la) { return gaussian_deformed_dx({std::exp(la), x0, p0}, beta, hbar); };
    double lo = std::log(beta / 100.0), hi = std::log(100.0 * beta);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int expand = 0; expand < 60; ++expand) {
        double a = lo, b = hi;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = F(c), fd = F(d);
        // tolerance 1e-10 relative in a is 1e-10 absolute in log a
        while (b - a > 1e-10) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = F(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = F(d);
            }
        }
        double la = 0.5 * (a + b);
        const double width = hi - lo;
        if (la - lo < 1e-3 * width) {
            lo -= width;
        } else if (hi - la < 1e-3 * width) {
            hi += width;
        } else {
            return {std::exp(la), F(la)};
        }
    }
    throw NumericalError("min_dx_over_gaussians: no interior minimum found");
}

} // namespace guplab
