#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "guplab/units.hpp"

namespace guplab {

using cplx = std::complex<double>;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double boundary_tol = 1e-12;

// Uniform momentum grid with trapezoid weights. Immutable; copies share storage.
class MomentumGrid {
public:
    MomentumGrid(double p_min, double p_max, std::size_t n_points) {
        if (!std::isfinite(p_min) || !std::isfinite(p_max) || !(p_min < p_max))
            throw ValidationError("grid requires finite p_min < p_max");
        if (n_points < 16) throw ValidationError("grid requires at least 16 points");
        auto d = std::make_shared<Data>();
        d->p_min = p_min;
        d->p_max = p_max;
        d->n = n_points;
        d->step = (p_max - p_min) / static_cast<double>(n_points - 1);
        d->p.resize(static_cast<Eigen::Index>(n_points));
        d->w.resize(static_cast<Eigen::Index>(n_points));
        // built from the center so that symmetric grids are exactly symmetric
        const double c = 0.5 * (p_min + p_max);
        const double half = 0.5 * d->step;
        for (std::size_t i = 0; i < n_points; ++i) {
            double m = 2.0 * static_cast<double>(i) - static_cast<double>(n_points - 1);
            d->p[static_cast<Eigen::Index>(i)] = c + m * half;
        }
        d->p[0] = p_min;
        d->p[static_cast<Eigen::Index>(n_points - 1)] = p_max;
        d->w.setConstant(d->step);
        d->w[0] = d->w[static_cast<Eigen::Index>(n_points - 1)] = half;
        data_ = std::move(d);
    }

    static MomentumGrid centered(double center, double half_width, std::size_t n_points) {
        return MomentumGrid(center - half_width, center + half_width, n_points);
    }

    // [-40, 40] * sqrt(2) K0 with 2048 points
    static MomentumGrid standard(const PhysicalUnits& u = {}) {
        double w = 40.0 * std::sqrt(2.0) * u.K0();
        return MomentumGrid(-w, w, 2048);
    }

    double p_min() const { return data_->p_min; }
    double p_max() const { return data_->p_max; }
    double step() const { return data_->step; }
    std::size_t size() const { return data_->n; }
    double operator[](std::size_t i) const { return data_->p[static_cast<Eigen::Index>(i)]; }
    const VectorXd& points() const { return data_->p; }
    const VectorXd& weights() const { return data_->w; }

    bool same_as(const MomentumGrid& o) const {
        return data_ == o.data_ ||
               (data_->n == o.data_->n && data_->p_min == o.data_->p_min && data_->p_max == o.data_->p_max);
    }

private:
    struct Data {
        double p_min = 0, p_max = 0, step = 0;
        std::size_t n = 0;
        VectorXd p, w;
    };
    std::shared_ptr<const Data> data_;
};

struct GridWaveFunction {
    MomentumGrid grid;
    VectorXcd amp;
    bool boundary_warning = false;

    GridWaveFunction(MomentumGrid g, VectorXcd a, bool warn = false)
        : grid(std::move(g)), amp(std::move(a)), boundary_warning(warn) {
        if (static_cast<std::size_t>(amp.size()) != grid.size())
            throw ValidationError("amplitude count does not match grid size");
    }
    explicit GridWaveFunction(MomentumGrid g)
        : grid(std::move(g)), amp(VectorXcd::Zero(static_cast<Eigen::Index>(grid.size()))) {}

    std::size_t size() const { return grid.size(); }
    cplx operator[](std::size_t i) const { return amp[static_cast<Eigen::Index>(i)]; }

    // same grid, new amplitudes; warnings propagate
    GridWaveFunction with(VectorXcd a, bool warn = false) const {
        return GridWaveFunction(grid, std::move(a), boundary_warning || warn);
    }
};

template <class Fn>
GridWaveFunction sample(const MomentumGrid& g, Fn&& fn) {
    VectorXcd a(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) a[static_cast<Eigen::Index>(i)] = cplx(fn(g[i]));
    return GridWaveFunction(g, std::move(a));
}

inline void require_same_grid(const GridWaveFunction& a, const GridWaveFunction& b) {
    if (!a.grid.same_as(b.grid)) throw ValidationError("incompatible grids");
}

inline cplx inner_product(const GridWaveFunction& phi, const GridWaveFunction& psi) {
    require_same_grid(phi, psi);
    const VectorXd& w = phi.grid.weights();
    double re = 0.0, im = 0.0;
    // written out so that <phi|psi> and conj(<psi|phi>) perform identical operations
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double a = phi.amp[i].real(), b = phi.amp[i].imag();
        const double c = psi.amp[i].real(), d = psi.amp[i].imag();
        re += w[i] * (a * c + b * d);
        im += w[i] * (a * d - b * c);
    }
    return {re, im};
}

inline double norm(const GridWaveFunction& psi) { return std::sqrt(inner_product(psi, psi).real()); }

inline GridWaveFunction normalize(const GridWaveFunction& psi) {
    double n = norm(psi);
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("cannot normalize a zero or non-finite state");
    if (n == 1.0) return psi;
    return psi.with(psi.amp / n);
}

enum class DiffMode {
    automatic,          // boundary correction only when the ends do not decay
    periodic,           // plain discrete Fourier derivative, period n*step
    boundary_corrected  // always subtract the two-point Hermite interpolant first
};

namespace detail {

// smallest 2^a 3^b 5^c >= n
inline Eigen::Index fast_size(Eigen::Index n) {
    Eigen::Index best = 1;
    while (best < n) best *= 2;
    for (Eigen::Index p5 = 1; p5 < 2 * n; p5 *= 5)
        for (Eigen::Index p35 = p5; p35 < 2 * n; p35 *= 3) {
            Eigen::Index m = p35;
            while (m < n) m *= 2;
            best = std::min(best, m);
        }
    return best;
}

// Spectral derivative with period n*h. With pad, the data are zero-extended to a fast
// transform length first; that is exact in spirit for data vanishing at both ends and
// avoids the quadratic cost of prime lengths.
inline VectorXcd fft_derivative(const VectorXcd& v, double h, int order, bool pad = true) {
    const Eigen::Index n0 = v.size();
    const Eigen::Index n = pad ? fast_size(n0) : n0;
    Eigen::FFT<double> fft;
    VectorXcd in = VectorXcd::Zero(n), spec(n), out(n);
    in.head(n0) = v;
    fft.fwd(spec, in);
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * h);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index m = (j <= n / 2) ? j : j - n;
        double k = dk * static_cast<double>(m);
        if (order == 1) {
            // the unpaired Nyquist mode has no odd derivative
            if (n % 2 == 0 && j == n / 2) k = 0.0;
            spec[j] *= cplx(0.0, k);
        } else {
            spec[j] *= -k * k;
        }
    }
    fft.inv(out, spec);
    return out.head(n0);
}

constexpr int end_order = 3;  // derivatives matched at each end
constexpr int end_stencil = 10;

// rows j = 0..end_order: weights giving j! c_j of the interpolant through t = 0..S-1
inline const Eigen::Matrix<double, end_order + 1, end_stencil>& end_weights() {
    static const Eigen::Matrix<double, end_order + 1, end_stencil> w = [] {
        Eigen::Matrix<double, end_stencil, end_stencil> V;
        for (int i = 0; i < end_stencil; ++i)
            for (int j = 0; j < end_stencil; ++j) V(i, j) = std::pow(double(i), double(j));
        Eigen::Matrix<double, end_stencil, end_stencil> inv = V.fullPivLu().inverse();
        Eigen::Matrix<double, end_order + 1, end_stencil> r;
        double fact = 1.0;
        for (int j = 0; j <= end_order; ++j) {
            if (j > 0) fact *= j;
            r.row(j) = fact * inv.row(j);
        }
        return r;
    }();
    return w;
}

// inverse of the constraint matrix of the degree 2m+1 two-point Hermite problem on s in [0,1]
inline const Eigen::MatrixXd& hermite_inverse() {
    static const Eigen::MatrixXd inv = [] {
        const int n = 2 * end_order + 2;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j <= end_order; ++j)
            for (int k = j; k < n; ++k) {
                double c = 1.0;
                for (int t = 0; t < j; ++t) c *= (k - t);
                if (k == j) A(j, k) = c;
                A(end_order + 1 + j, k) = c;
            }
        return Eigen::MatrixXd(A.fullPivLu().inverse());
    }();
    return inv;
}

inline VectorXcd corrected_derivative(const VectorXcd& v, double h, int order) {
    const Eigen::Index n = v.size();
    const int m = end_order;
    const double len = h * static_cast<double>(n - 1);
    const auto& W = end_weights();
    Eigen::Matrix<cplx, end_stencil, 1> left, right;
    for (int i = 0; i < end_stencil; ++i) {
        left[i] = v[i];
        right[i] = v[n - 1 - i];
    }
    Eigen::VectorXcd rhs(2 * m + 2);
    double scale = 1.0;  // (len/h)^j converts t-derivatives into s-derivatives
    for (int j = 0; j <= m; ++j) {
        cplx dl = (W.row(j).cast<cplx>() * left)(0);
        cplx dr = (W.row(j).cast<cplx>() * right)(0);
        if (j % 2 == 1) dr = -dr;
        rhs[j] = dl * scale;
        rhs[m + 1 + j] = dr * scale;
        scale *= len / h;
    }
    Eigen::VectorXcd c = hermite_inverse().cast<cplx>() * rhs;
    const int deg = 2 * m + 1;
    VectorXcd r(n), dr(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = static_cast<double>(i) / static_cast<double>(n - 1);
        cplx val = c[deg], d1 = 0.0, d2 = 0.0;
        for (int k = deg - 1; k >= 0; --k) {
            d2 = d2 * s + 2.0 * d1;
            d1 = d1 * s + val;
            val = val * s + c[k];
        }
        r[i] = val;
        dr[i] = (order == 1) ? d1 / len : d2 / (len * len);
    }
    return fft_derivative(v - r, h, order) + dr;
}

} // namespace detail

inline bool ends_decay(const GridWaveFunction& psi, double tol = boundary_tol) {
    return std::abs(psi.amp[0]) <= tol && std::abs(psi.amp[psi.amp.size() - 1]) <= tol;
}

inline GridWaveFunction differentiate(const GridWaveFunction& psi, int order = 1,
                                      DiffMode mode = DiffMode::automatic) {
    if (order != 1 && order != 2) throw ValidationError("differentiation order must be 1 or 2");
    const double h = psi.grid.step();
    bool decays = ends_decay(psi);
    bool correct = mode == DiffMode::boundary_corrected || (mode == DiffMode::automatic && !decays);
    VectorXcd out = correct ? detail::corrected_derivative(psi.amp, h, order)
                            : detail::fft_derivative(psi.amp, h, order, mode != DiffMode::periodic);
    return psi.with(std::move(out), mode == DiffMode::automatic && !decays);
}

inline GridWaveFunction multiply(const GridWaveFunction& psi, const VectorXd& f) {
    return psi.with(psi.amp.cwiseProduct(f.cast<cplx>()));
}

template <class Apply>
cplx expectation(const GridWaveFunction& psi, Apply&& apply) {
    return inner_product(psi, apply(psi));
}

// sqrt(<A^2> - <A>^2) with A^2 applied as A twice
template <class Apply>
double uncertainty(const GridWaveFunction& psi, Apply&& apply) {
    GridWaveFunction a1 = apply(psi);
    cplx m1 = inner_product(psi, a1);
    if (std::abs(m1.imag()) > 1e-8 * std::abs(m1) + 1e-10)
        throw NumericalError("non-symmetric operator: Im<A> = " + std::to_string(m1.imag()));
    cplx m2 = inner_product(psi, apply(a1));
    double var = m2.real() - m1.real() * m1.real();
    if (var < -1e-10) throw NumericalError("non-symmetric operator or numerical breakdown (negative variance)");
    return std::sqrt(std::max(var, 0.0));
}

// (2 pi hbar)^(-1/2) sum_p w e^{i p x/hbar} psi(p)
inline VectorXcd position_amplitude(const GridWaveFunction& psi, std::span<const double> xs, double hbar = 1.0) {
    if (xs.empty()) throw ValidationError("position grid is empty");
    const VectorXd& p = psi.grid.points();
    const VectorXd& w = psi.grid.weights();
    const double pref = 1.0 / std::sqrt(2.0 * std::numbers::pi * hbar);
    VectorXcd out(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t j = 0; j < xs.size(); ++j) {
        cplx acc = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) acc += w[i] * std::polar(1.0, p[i] * xs[j] / hbar) * psi.amp[i];
        out[static_cast<Eigen::Index>(j)] = pref * acc;
    }
    return out;
}

struct SchwartzReport {
    double max_psi = 0, max_d1 = 0, max_d2 = 0;
    bool passed = false;
};

// |psi|, |psi'|, |psi''| below tol over the outer 5% of the grid. The derivatives there are
// local finite differences: a spectral derivative would carry the round-off of the peak
// (eps max|psi| (pi/h)^2) into the tails and fail sharply squeezed states.
inline SchwartzReport schwartz_check(const GridWaveFunction& psi, double tol = 1e-10) {
    SchwartzReport r;
    const Eigen::Index n = psi.amp.size();
    const double h = psi.grid.step();
    const VectorXcd& v = psi.amp;
    const Eigen::Index edge = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(0.05 * double(n))));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i >= edge && i < n - edge) continue;
        cplx d1, d2;
        if (i == 0) {
            d1 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2 * h);
            d2 = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
        } else if (i == n - 1) {
            d1 = (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2 * h);
            d2 = (2.0 * v[i] - 5.0 * v[i - 1] + 4.0 * v[i - 2] - v[i - 3]) / (h * h);
        } else {
            d1 = (v[i + 1] - v[i - 1]) / (2 * h);
            d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
        }
        r.max_psi = std::max(r.max_psi, std::abs(v[i]));
        r.max_d1 = std::max(r.max_d1, std::abs(d1));
        r.max_d2 = std::max(r.max_d2, std::abs(d2));
    }
    r.passed = r.max_psi < tol && r.max_d1 < tol && r.max_d2 < tol;
    return r;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_wavefunction_csv(std::ostream& os, const GridWaveFunction& psi) {
    os << "p,re,im\n";
    for (std::size_t i = 0; i < psi.size(); ++i)
        os << fmt17(psi.grid[i]) << ',' << fmt17(psi[i].real()) << ',' << fmt17(psi[i].imag()) << '\n';
}

} // namespace guplab
