#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <vector>

#include "guplab/deformation.hpp"
#include "guplab/grid.hpp"
#include "guplab/operators.hpp"
#include "guplab/parallel.hpp"

namespace guplab {

// W(x_i, p_j) stored as values(i, j); a cell has area wx[i] * wp[j].
struct PhaseSpaceField {
    std::vector<double> x, p;
    std::vector<double> wx, wp;
    Eigen::MatrixXd values;
    double max_imag = 0.0;  // largest discarded imaginary part

    double mass() const {
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j)
            for (std::size_t i = 0; i < x.size(); ++i) s += wx[i] * wp[j] * values(Eigen::Index(i), Eigen::Index(j));
        return s;
    }
};

struct WignerOptions {
    double hbar = 1.0;
    // Rows kept: |p - grid center| <= row_fraction * grid half width. Rows near the
    // edge see a u-kernel cut short by the grid.
    double row_fraction = 1.0;
    // Cosine roll-off over this outer fraction of each row's u-range; 0 disables it.
    double taper = 0.25;
    bool parallel = true;
};

namespace detail {

inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    if (x.size() == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        double h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

inline std::vector<std::size_t> wigner_rows(const MomentumGrid& g, double fraction) {
    const double c = 0.5 * (g.p_min() + g.p_max()), half = 0.5 * (g.p_max() - g.p_min());
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (std::abs(g[j] - c) <= fraction * half * (1.0 + 1e-14)) rows.push_back(j);
    if (rows.empty()) throw ValidationError("Wigner row window is empty");
    return rows;
}

// psi(p + u/2) psi*(p - u/2) at u = 2kh, k = -K..K, trapezoid and taper weights folded in
inline std::vector<cplx> wigner_kernel(const GridWaveFunction& psi, std::size_t j, double taper, std::size_t& K) {
    const std::size_t n = psi.size();
    K = std::min(j, n - 1 - j);
    std::vector<cplx> s(2 * K + 1);
    const double edge = (1.0 - taper) * double(K + 1);
    for (std::size_t t = 0; t <= 2 * K; ++t) {
        long k = long(t) - long(K);
        double wt = 1.0;
        if (K > 0 && std::size_t(std::abs(k)) == K) wt = 0.5;
        double ak = std::abs(double(k));
        if (taper > 0.0 && ak > edge)
            wt *= 0.5 * (1.0 + std::cos(std::numbers::pi * (ak - edge) / (double(K + 1) - edge)));
        s[t] = wt * psi.amp[Eigen::Index(long(j) + k)] * std::conj(psi.amp[Eigen::Index(long(j) - k)]);
    }
    return s;
}

} // namespace detail

// For minimal-length states: step 0.08/sqrt(beta), +-160/sqrt(beta). Only the inner half of the
// rows is usable (row_fraction 0.5), which leaves a tail mass near 8e-7 outside.
inline MomentumGrid ml_wigner_grid(double beta) {
    if (!(beta > 0.0)) throw ValidationError("minimal-length state requires beta > 0");
    return MomentumGrid::centered(0.0, 160.0 / std::sqrt(beta), 4001);
}

// 129 points over <x> +- 8 dx of the canonical position distribution
inline std::vector<double> default_x_grid(const GridWaveFunction& psi, double hbar = 1.0, std::size_t n = 129) {
    double mean = expectation(psi, [&](const GridWaveFunction& v) { return canonical_x(v, hbar); }).real();
    double dx = uncertainty(psi, x_action(hbar));
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = mean + 8.0 * dx * (2.0 * double(i) / double(n - 1) - 1.0);
    return xs;
}

// W(x,p) = (1/2 pi hbar) int e^{ixu/hbar} psi(p+u/2) psi*(p-u/2) du, trapezoid in u with step 2h
// so that p +- u/2 are grid points.
inline PhaseSpaceField wigner_function(const GridWaveFunction& psi, const std::vector<double>& xs,
                                       const WignerOptions& opt = {}) {
    if (xs.empty()) throw ValidationError("position grid is empty");
    const double h = psi.grid.step(), hbar = opt.hbar;
    PhaseSpaceField W;
    W.x = xs;
    W.wx = detail::trapezoid_weights(xs);
    std::vector<std::size_t> rows = detail::wigner_rows(psi.grid, opt.row_fraction);
    for (std::size_t j : rows) {
        W.p.push_back(psi.grid[j]);
        W.wp.push_back(psi.grid.weights()[Eigen::Index(j)]);
    }
    const std::size_t nx = xs.size(), kmax = psi.size() / 2 + 1;
    // phase table e^{2 i x k h / hbar}
    Eigen::MatrixXcd phase(Eigen::Index(kmax + 1), Eigen::Index(nx));
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t k = 0; k <= kmax; ++k)
            phase(Eigen::Index(k), Eigen::Index(i)) = std::polar(1.0, 2.0 * xs[i] * double(k) * h / hbar);
    W.values.resize(Eigen::Index(nx), Eigen::Index(rows.size()));
    std::vector<double> imag(rows.size(), 0.0);
    const double pref = h / (std::numbers::pi * hbar);
    auto row = [&](std::size_t c) {
        std::size_t K = 0;
        std::vector<cplx> s = detail::wigner_kernel(psi, rows[c], opt.taper, K);
        for (std::size_t i = 0; i < nx; ++i) {
            cplx acc = s[K];
            for (std::size_t k = 1; k <= K; ++k) {
                const cplx e = phase(Eigen::Index(k), Eigen::Index(i));
                acc += e * s[K + k] + std::conj(e) * s[K - k];
            }
            acc *= pref;
            W.values(Eigen::Index(i), Eigen::Index(c)) = acc.real();
            imag[c] = std::max(imag[c], std::abs(acc.imag()));
        }
    };
    if (opt.parallel)
        parallel_for(rows.size(), row);
    else
        for (std::size_t c = 0; c < rows.size(); ++c) row(c);
    W.max_imag = *std::max_element(imag.begin(), imag.end());
    if (W.max_imag > 1e-6) throw NumericalError("asymmetric kernel (bug or grid too coarse)");
    return W;
}

inline PhaseSpaceField wigner_function(const GridWaveFunction& psi, const WignerOptions& opt = {}) {
    return wigner_function(psi, default_x_grid(psi, opt.hbar), opt);
}

// Same transform on the conjugate lattice x_m = (m - M/2) pi hbar / (M h), which spans one
// full period of the u-sum; each row is then a single inverse FFT.
inline PhaseSpaceField wigner_function_lattice(const GridWaveFunction& psi, const WignerOptions& opt = {},
                                               std::size_t M = 0) {
    const double h = psi.grid.step(), hbar = opt.hbar;
    if (M == 0) {
        M = 1;
        while (M < psi.size()) M <<= 1;
    }
    if (M < psi.size()) throw ValidationError("lattice size must be at least the grid size");
    PhaseSpaceField W;
    const double dx = std::numbers::pi * hbar / (double(M) * h);
    W.x.resize(M);
    W.wx.assign(M, dx);
    for (std::size_t m = 0; m < M; ++m) W.x[m] = (double(m) - double(M / 2)) * dx;
    std::vector<std::size_t> rows = detail::wigner_rows(psi.grid, opt.row_fraction);
    for (std::size_t j : rows) {
        W.p.push_back(psi.grid[j]);
        W.wp.push_back(psi.grid.weights()[Eigen::Index(j)]);
    }
    W.values.resize(Eigen::Index(M), Eigen::Index(rows.size()));
    std::vector<double> imag(rows.size(), 0.0);
    const double pref = h / (std::numbers::pi * hbar) * double(M);
    auto row = [&](std::size_t c) {
        std::size_t K = 0;
        std::vector<cplx> s = detail::wigner_kernel(psi, rows[c], opt.taper, K);
        std::vector<cplx> sh(M, 0.0), out(M);
        for (std::size_t t = 0; t <= 2 * K; ++t) {
            long k = long(t) - long(K);
            std::size_t slot = std::size_t(((k % long(M)) + long(M)) % long(M));
            sh[slot] += (k % 2 == 0 ? 1.0 : -1.0) * s[t];
        }
        Eigen::FFT<double> fft;
        fft.inv(out, sh);
        for (std::size_t m = 0; m < M; ++m) {
            cplx v = pref * out[m];
            W.values(Eigen::Index(m), Eigen::Index(c)) = v.real();
            imag[c] = std::max(imag[c], std::abs(v.imag()));
        }
    };
    if (opt.parallel)
        parallel_for(rows.size(), row);
    else
        for (std::size_t c = 0; c < rows.size(); ++c) row(c);
    W.max_imag = *std::max_element(imag.begin(), imag.end());
    if (W.max_imag > 1e-6) throw NumericalError("asymmetric kernel (bug or grid too coarse)");
    return W;
}

struct Marginals {
    std::vector<double> momentum;  // int W dx, one value per p row
    std::vector<double> position;  // int W dp, one value per x
};

inline Marginals marginals(const PhaseSpaceField& W) {
    Marginals m;
    m.momentum.assign(W.p.size(), 0.0);
    m.position.assign(W.x.size(), 0.0);
    for (std::size_t j = 0; j < W.p.size(); ++j)
        for (std::size_t i = 0; i < W.x.size(); ++i) {
            double v = W.values(Eigen::Index(i), Eigen::Index(j));
            m.momentum[j] += W.wx[i] * v;
            m.position[i] += W.wp[j] * v;
        }
    return m;
}

template <class Symbol>
double phase_space_expectation(const PhaseSpaceField& W, Symbol&& symbol) {
    double s = 0.0;
    for (std::size_t j = 0; j < W.p.size(); ++j) {
        double row = 0.0;
        for (std::size_t i = 0; i < W.x.size(); ++i)
            row += W.wx[i] * symbol(W.x[i], W.p[j]) * W.values(Eigen::Index(i), Eigen::Index(j));
        s += W.wp[j] * row;
    }
    return s;
}

// Weyl symbols of X and X^2: x f(p) and x^2 f^2 + hbar^2 f'^2 / 4
inline double weyl_symbol_deformed_X(const DeformationSpec& spec, double x, double p) { return x * spec.f(p); }
inline double weyl_symbol_deformed_X2(const DeformationSpec& spec, double x, double p) {
    double f = spec.f(p), d = spec.df(p), hb = spec.hbar();
    return x * x * f * f + 0.25 * hb * hb * d * d;
}

struct PhaseSpaceMoments {
    double one = 0, p = 0, p2 = 0, X = 0, X2 = 0;
};

// symbols 1, p, p^2, x f, x^2 f^2 + hbar^2 f'^2/4 integrated against W
inline PhaseSpaceMoments phase_space_moments(const DeformationSpec& spec, const PhaseSpaceField& W) {
    PhaseSpaceMoments m;
    m.one = phase_space_expectation(W, [](double, double) { return 1.0; });
    m.p = phase_space_expectation(W, [](double, double p) { return p; });
    m.p2 = phase_space_expectation(W, [](double, double p) { return p * p; });
    m.X = phase_space_expectation(W, [&](double x, double p) { return weyl_symbol_deformed_X(spec, x, p); });
    m.X2 = phase_space_expectation(W, [&](double x, double p) { return weyl_symbol_deformed_X2(spec, x, p); });
    return m;
}

// Operator expectations of 1, P, P^2, X, X^2 accumulated only over the momentum rows W keeps.
// Per row, int x W dx = Re(psi* i hbar psi') and int x^2 W dx = (hbar^2/2)(|psi'|^2 - Re psi* psi'').
// With every row kept these are the ordinary expectations.
inline PhaseSpaceMoments row_restricted_moments(const DeformationSpec& spec, const GridWaveFunction& psi,
                                                const PhaseSpaceField& W) {
    const MomentumGrid& g = psi.grid;
    GridWaveFunction d1 = differentiate(psi, 1), d2 = differentiate(psi, 2);
    const double hb = spec.hbar();
    PhaseSpaceMoments m;
    for (double pr : W.p) {
        const long jl = std::lround((pr - g.p_min()) / g.step());
        if (jl < 0 || std::size_t(jl) >= g.size() || std::abs(g[std::size_t(jl)] - pr) > 1e-9 * g.step())
            throw ValidationError("phase-space rows do not lie on the state's grid");
        const Eigen::Index j = jl;
        const double w = g.weights()[j], p = g[std::size_t(j)], f = spec.f(p), df = spec.df(p);
        const cplx a = psi.amp[j], a1 = d1.amp[j], a2 = d2.amp[j];
        const double rho = std::norm(a);
        m.one += w * rho;
        m.p += w * p * rho;
        m.p2 += w * p * p * rho;
        m.X += w * f * (std::conj(a) * iunit * hb * a1).real();
        m.X2 += w * (f * f * 0.5 * hb * hb * (std::norm(a1) - (std::conj(a) * a2).real()) + 0.25 * hb * hb * df * df * rho);
    }
    return m;
}

inline void write_wigner_csv(std::ostream& os, const PhaseSpaceField& W) {
    os << "x,p,W\n";
    for (std::size_t i = 0; i < W.x.size(); ++i)
        for (std::size_t j = 0; j < W.p.size(); ++j)
            os << fmt17(W.x[i]) << ',' << fmt17(W.p[j]) << ',' << fmt17(W.values(Eigen::Index(i), Eigen::Index(j))) << '\n';
}

// gnuplot "matrix nonuniform": first row is the p axis, each later row is x then W(x, p_j)
inline void write_wigner_matrix(std::ostream& os, const PhaseSpaceField& W) {
    os << W.p.size();
    for (double p : W.p) os << ' ' << fmt17(p);
    os << '\n';
    for (std::size_t i = 0; i < W.x.size(); ++i) {
        os << fmt17(W.x[i]);
        for (std::size_t j = 0; j < W.p.size(); ++j) os << ' ' << fmt17(W.values(Eigen::Index(i), Eigen::Index(j)));
        os << '\n';
    }
}

} // namespace guplab
