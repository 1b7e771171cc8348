#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "guplab/deformation.hpp"
#include "guplab/grid.hpp"
#include "guplab/operators.hpp"

namespace guplab {

// Dense operator on the truncated number basis |0> .. |dim-1>.
struct FockOperator {
    Eigen::MatrixXcd m;

    FockOperator() = default;
    explicit FockOperator(Eigen::MatrixXcd mat) : m(std::move(mat)) {
        if (m.rows() != m.cols() || m.rows() < 2) throw ValidationError("Fock operator must be square with dim >= 2");
    }
    Eigen::Index dim() const { return m.rows(); }
    FockOperator adjoint() const { return FockOperator(m.adjoint()); }
    double hermiticity_residual() const { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }
};

using FockVector = Eigen::VectorXcd;

// b|n> = sqrt(n)|n-1>
inline std::pair<FockOperator, FockOperator> build_ladder(Eigen::Index dim) {
    if (dim < 2) throw ValidationError("ladder dimension must be >= 2");
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index n = 1; n < dim; ++n) b(n - 1, n) = std::sqrt(double(n));
    return {FockOperator(b), FockOperator(b.adjoint())};
}

// ascending eigenvalues, never reaching into the top 10 of the truncated matrix
inline std::vector<double> spectrum(const FockOperator& H, Eigen::Index count) {
    if (count < 1 || count > H.dim() - 10)
        throw ValidationError("spectrum count must lie in [1, dim - 10] (truncation guard band)");
    const double scale = std::max(1.0, H.m.cwiseAbs().maxCoeff());
    if (H.hermiticity_residual() > 1e-10 * scale) throw ValidationError("spectrum requires a Hermitian operator");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigensolver failed to converge (dim " + std::to_string(H.dim()) + ")");
    std::vector<double> e(es.eigenvalues().data(), es.eigenvalues().data() + count);
    return e;
}

struct OscillatorSpec {
    PhysicalUnits units;
    double beta = 0.0;
    Eigen::Index N = 200;  // basis |0> .. |N>

    void validate() const {
        units.validate();
        if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be finite and >= 0");
        if (N < 1) throw ValidationError("truncation N must be >= 1");
    }
    // beta K0^2 (2N + 1) < 0.5 keeps every retained level perturbative
    bool perturbative() const { return beta * units.K0() * units.K0() * double(2 * N + 1) < 0.5; }
};

struct CanonicalXP {
    Eigen::MatrixXcd x, p;
};

// x = L0 (b^+ + b), p = i K0 (b^+ - b)
inline CanonicalXP canonical_xp(const PhysicalUnits& u, Eigen::Index dim) {
    auto [b, bd] = build_ladder(dim);
    return {u.L0() * (bd.m + b.m), cplx(0.0, u.K0()) * (bd.m - b.m)};
}

// H = hbar omega (p^2/4K0^2 + X^2/4L0^2), X = sqrt(f(p)) x sqrt(f(p)) with f = 1 + beta p^2
inline FockOperator build_H_gup(const OscillatorSpec& spec) {
    spec.validate();
    const auto& u = spec.units;
    // built two levels larger and cropped: squaring truncated x and p corrupts the last diagonal entry
    const Eigen::Index dim = spec.N + 3;
    CanonicalXP xp = canonical_xp(u, dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(xp.p);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of p failed");
    Eigen::VectorXd lam = es.eigenvalues();
    Eigen::VectorXd sf(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        double f = 1.0 + spec.beta * lam[i] * lam[i];
        if (!(f > 0.0)) throw ValidationError("deformation not positive on spectrum");
        sf[i] = std::sqrt(f);
    }
    const Eigen::MatrixXcd& V = es.eigenvectors();
    Eigen::MatrixXcd S = V * sf.cast<cplx>().asDiagonal() * V.adjoint();
    Eigen::MatrixXcd X = S * xp.x * S;
    const double K0 = u.K0(), L0 = u.L0();
    Eigen::MatrixXcd H = u.hbar * u.omega * (xp.p * xp.p / (4 * K0 * K0) + X * X / (4 * L0 * L0));
    Eigen::MatrixXcd Hc = H.topLeftCorner(spec.N + 1, spec.N + 1);
    Hc = 0.5 * (Hc + Hc.adjoint()).eval();
    return FockOperator(Hc);
}

inline FockOperator build_H0(const PhysicalUnits& u, Eigen::Index N) {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N + 1, N + 1);
    for (Eigen::Index n = 0; n <= N; ++n) H(n, n) = u.hbar * u.omega * (double(n) + 0.5);
    return FockOperator(H);
}

// (beta m hbar^2 omega^2 / 2)(n^2 + n + 1/2)
inline double delta_E_perturbative(const OscillatorSpec& spec, int n) {
    if (n < 0 || n > spec.N) throw ValidationError("level index out of range");
    const auto& u = spec.units;
    double nn = double(n);
    return 0.5 * spec.beta * u.mass * u.hbar * u.hbar * u.omega * u.omega * (nn * nn + nn + 0.5);
}

enum class VOrder { full, first };

// V psi = -(hbar^3 omega / 4 L0^2)[g(2+g) psi'' + 2(1+g) g' psi' + (g g'' + g'^2/2 + g'')/2 psi], g = beta p^2.
// VOrder::first keeps only the terms linear in g.
inline GridWaveFunction apply_V_momentum(const OscillatorSpec& spec, const GridWaveFunction& psi,
                                         VOrder order = VOrder::full) {
    const auto& u = spec.units;
    const double pref = -u.hbar * u.hbar * u.hbar * u.omega / (4.0 * u.L0() * u.L0());
    GridWaveFunction d1 = differentiate(psi, 1), d2 = differentiate(psi, 2);
    const VectorXd& p = psi.grid.points();
    VectorXcd out(p.size());
    const double b = spec.beta;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        double g = b * p[i] * p[i], g1 = 2.0 * b * p[i], g2 = 2.0 * b;
        cplx v;
        if (order == VOrder::full)
            v = g * (2.0 + g) * d2.amp[i] + 2.0 * (1.0 + g) * g1 * d1.amp[i] + 0.5 * (g * g2 + 0.5 * g1 * g1 + g2) * psi.amp[i];
        else
            v = 2.0 * g * d2.amp[i] + 2.0 * g1 * d1.amp[i] + 0.5 * g2 * psi.amp[i];
        out[i] = pref * v;
    }
    return psi.with(std::move(out), d1.boundary_warning || d2.boundary_warning);
}

// normalized Hermite functions of s = p / (sqrt(2) K0), by the three-term recurrence
inline GridWaveFunction hermite_eigenstate(const PhysicalUnits& u, int n, const MomentumGrid& grid) {
    if (n < 0) throw ValidationError("Hermite index must be >= 0");
    const double scale = std::sqrt(2.0) * u.K0();
    const double reach = (std::sqrt(2.0 * n + 1.0) + 6.0) * scale;
    if (grid.p_min() > -reach || grid.p_max() < reach) throw ValidationError("grid too narrow for Hermite state");
    const double pref = std::pow(1.0 / (2.0 * u.K0() * u.K0()), 0.25);
    return sample(grid, [&](double p) {
        double s = p / scale;
        double h0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * s * s);
        if (n == 0) return pref * h0;
        double h1 = std::sqrt(2.0) * s * h0;
        for (int k = 1; k < n; ++k) {
            double h2 = std::sqrt(2.0 / (k + 1)) * s * h1 - std::sqrt(double(k) / (k + 1)) * h0;
            h0 = h1;
            h1 = h2;
        }
        return pref * h1;
    });
}

// hbar omega (p^2/4K0^2 - hbar^2 psi''/4L0^2)
inline GridWaveFunction apply_H0(const PhysicalUnits& u, const GridWaveFunction& psi) {
    GridWaveFunction d2 = differentiate(psi, 2);
    const VectorXd& p = psi.grid.points();
    const double K0 = u.K0(), L0 = u.L0();
    VectorXcd out(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i)
        out[i] = u.hbar * u.omega * (p[i] * p[i] / (4 * K0 * K0) * psi.amp[i] - u.hbar * u.hbar * d2.amp[i] / (4 * L0 * L0));
    return psi.with(std::move(out), d2.boundary_warning);
}

// hbar omega (p^2/4K0^2 + X X/4L0^2) on the grid
inline GridWaveFunction apply_H_gup(const OscillatorSpec& spec, const GridWaveFunction& psi) {
    const auto& u = spec.units;
    DeformationSpec f = DeformationSpec::gup(spec.beta, u);
    GridWaveFunction xx = deformed_X(f, deformed_X(f, psi));
    const VectorXd& p = psi.grid.points();
    const double K0 = u.K0(), L0 = u.L0();
    VectorXcd out(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i)
        out[i] = u.hbar * u.omega * (p[i] * p[i] / (4 * K0 * K0) * psi.amp[i] + xx.amp[i] / (4 * L0 * L0));
    return psi.with(std::move(out), xx.boundary_warning);
}

// Fock |n> corresponds to (-i)^n psi_n(p) because b = i (s + d/ds)/sqrt(2).
inline FockVector fock_project(const GridWaveFunction& psi, const PhysicalUnits& u, Eigen::Index N) {
    FockVector c(N + 1);
    cplx phase = 1.0;
    for (Eigen::Index n = 0; n <= N; ++n) {
        GridWaveFunction h = hermite_eigenstate(u, int(n), psi.grid);
        c[n] = phase * inner_product(h, psi);
        phase *= iunit;
    }
    return c;
}

// first-order state correction sum_{m != n} <m|V|n>/(E_n - E_m) |m>
inline FockVector delta_psi(const OscillatorSpec& spec, int n) {
    if (n < 0 || n > spec.N) throw ValidationError("level index out of range");
    FockOperator H = build_H_gup(spec);
    FockOperator H0 = build_H0(spec.units, spec.N);
    Eigen::MatrixXcd V = H.m - H0.m;
    FockVector d = FockVector::Zero(spec.N + 1);
    for (Eigen::Index m = 0; m <= spec.N; ++m) {
        if (m == n) continue;
        d[m] = V(m, n) / (H0.m(n, n) - H0.m(m, m));
    }
    return d;
}

} // namespace guplab
