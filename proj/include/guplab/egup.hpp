#pragma once

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

#include "guplab/grid.hpp"
#include "guplab/operators.hpp"
#include "guplab/oscillator.hpp"
#include "guplab/states.hpp"

namespace guplab {

// [n] = (q^n - 1)/(q - 1); second-order series near q = 1
inline double q_number(double q, long n) {
    if (n < 0) throw ValidationError("q-number index must be >= 0");
    const double eps = q - 1.0, nn = double(n);
    if (std::abs(eps) < 1e-8) return nn + eps * nn * (nn - 1) / 2 + eps * eps * nn * (nn - 1) * (nn - 2) / 6;
    return (std::pow(q, nn) - 1.0) / eps;
}

struct QDeformation {
    enum class Mode { balanced, oscillator };
    double q = 1.0;
    double L = 1.0, K = 0.5;
    Eigen::Index N = 100;
    Mode mode = Mode::balanced;

    double epsilon() const { return q - 1.0; }

    // 4 K L = hbar (1 + q)
    static QDeformation balanced(double q, double L, Eigen::Index N, double hbar = 1.0) {
        QDeformation d{q, L, hbar * (1.0 + q) / (4.0 * L), N, Mode::balanced};
        d.validate(hbar);
        return d;
    }
    // L = L0, K = K0
    static QDeformation oscillator(double q, const PhysicalUnits& u, Eigen::Index N) {
        QDeformation d{q, u.L0(), u.K0(), N, Mode::oscillator};
        d.validate(u.hbar);
        return d;
    }

    void validate(double hbar = 1.0) const {
        if (!(q >= 1.0) || !std::isfinite(q)) throw ValidationError("q must be finite and >= 1");
        if (!(L > 0.0) || !(K > 0.0)) throw ValidationError("L and K must be positive");
        if (N < 2) throw ValidationError("Fock truncation N must be >= 2");
        if (mode == Mode::balanced && std::abs(4.0 * K * L - hbar * (1.0 + q)) > 1e-12 * hbar * (1.0 + q))
            throw ValidationError("balanced mode requires 4KL = hbar(1+q)");
    }
};

// a|n> = sqrt([n]) |n-1>, on |0> .. |dim-1>
inline std::pair<FockOperator, FockOperator> build_q_ladders(double q, Eigen::Index dim) {
    if (dim < 2) throw ValidationError("ladder dimension must be >= 2");
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(q_number(q, n));
    return {FockOperator(a), FockOperator(a.adjoint())};
}

inline std::pair<FockOperator, FockOperator> build_q_ladders(const QDeformation& d) {
    return build_q_ladders(d.q, d.N + 1);
}

// max over rows 0..N-1 of |(a a^+ - q a^+ a) - 1| entrywise, and the largest entry scale [N]
struct QCommutatorCheck {
    double residual = 0;
    double scale = 0;
};
inline QCommutatorCheck q_commutator_residual(const QDeformation& d) {
    auto [a, ad] = build_q_ladders(d);
    Eigen::MatrixXcd C = a.m * ad.m - d.q * (ad.m * a.m);
    const Eigen::Index n = d.N;  // interior rows 0..N-1
    Eigen::MatrixXcd R = C.topLeftCorner(n, n) - Eigen::MatrixXcd::Identity(n, n);
    return {R.cwiseAbs().maxCoeff(), q_number(d.q, d.N)};
}

struct EgupXP {
    FockOperator X, P;
};

// X = L (a^+ + a), P = i K (a^+ - a) on |0> .. |dim-1>
inline EgupXP build_egup_XP(const QDeformation& d, Eigen::Index dim) {
    auto [a, ad] = build_q_ladders(d.q, dim);
    return {FockOperator(d.L * (ad.m + a.m)), FockOperator(cplx(0.0, d.K) * (ad.m - a.m))};
}
inline EgupXP build_egup_XP(const QDeformation& d) { return build_egup_XP(d, d.N + 1); }

// [X, P]/i on the interior block fitted as c0 + c1 X^2 + c2 P^2
struct CommutatorFit {
    double c0 = 0, c1 = 0, c2 = 0;              // least squares
    double c0_exact = 0, c1_exact = 0, c2_exact = 0;  // from a a^+ - q a^+ a = 1
    double residual = 0;                        // max entry of [X,P]/i - fit
    double scale = 0;                           // max entry of [X,P]
    double dx_min = 0, dp_min = 0;              // implied floors of the fitted algebra
};

inline CommutatorFit fit_egup_commutator(const QDeformation& d) {
    EgupXP xp = build_egup_XP(d);
    const Eigen::Index n = d.N;  // rows and columns 0..N-1 are free of truncation
    Eigen::MatrixXcd C = (xp.X.m * xp.P.m - xp.P.m * xp.X.m).topLeftCorner(n, n) / cplx(0.0, 1.0);
    Eigen::MatrixXcd X2 = (xp.X.m * xp.X.m).topLeftCorner(n, n);
    Eigen::MatrixXcd P2 = (xp.P.m * xp.P.m).topLeftCorner(n, n);
    Eigen::MatrixXcd Id = Eigen::MatrixXcd::Identity(n, n);
    const Eigen::Index m = n * n;
    Eigen::MatrixXd A(2 * m, 3);
    Eigen::VectorXd b(2 * m);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index r = j * n + i;
            // entries grow like q^n; weighting by their size keeps the small-n diagonal in charge of c0
            const double w = 1.0 / std::max(1.0, std::abs(X2(i, j)) + std::abs(P2(i, j)));
            A(r, 0) = w * Id(i, j).real();
            A(r, 1) = w * X2(i, j).real();
            A(r, 2) = w * P2(i, j).real();
            A(m + r, 0) = w * Id(i, j).imag();
            A(m + r, 1) = w * X2(i, j).imag();
            A(m + r, 2) = w * P2(i, j).imag();
            b[r] = w * C(i, j).real();
            b[m + r] = w * C(i, j).imag();
        }
    Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
    CommutatorFit f;
    f.c0 = c[0];
    f.c1 = c[1];
    f.c2 = c[2];
    const double q = d.q, KL = d.K * d.L;
    f.c0_exact = 4.0 * KL / (1.0 + q);
    f.c1_exact = KL * (q - 1.0) / ((1.0 + q) * d.L * d.L);
    f.c2_exact = KL * (q - 1.0) / ((1.0 + q) * d.K * d.K);
    f.residual = (C - f.c0 * Id - f.c1 * X2 - f.c2 * P2).cwiseAbs().maxCoeff();
    f.scale = C.cwiseAbs().maxCoeff();
    // [x,p] = i h (1 + alpha x^2 + beta p^2): dx_min = h sqrt(beta / (1 - h^2 alpha beta))
    const double h = f.c0, al = f.c1 / f.c0, be = f.c2 / f.c0;
    const double denom = 1.0 - h * h * al * be;
    if (denom > 0) {
        f.dx_min = h * std::sqrt(be / denom);
        f.dp_min = h * std::sqrt(al / denom);
    }
    return f;
}

// L sqrt((q-1)/q), and the mirror K sqrt((q-1)/q)
inline double egup_dx_floor(const QDeformation& d) { return d.L * std::sqrt((d.q - 1.0) / d.q); }
inline double egup_dp_floor(const QDeformation& d) { return d.K * std::sqrt((d.q - 1.0) / d.q); }

struct MinUncertainty {
    double dx_min = 0, dp_min = 0;
    int iterations_x = 0, iterations_p = 0;
};

namespace detail {

// min over c in span{|0>..|N>} of the variance of O, O given on |0>..|N+1> so that
// O c is exact. For fixed mu the minimum of ||(O - mu) c|| is the smallest singular
// value of the (N+2) x (N+1) block; mu then moves to the new mean.
inline double min_variance_sqrt(const Eigen::MatrixXcd& O, Eigen::Index N, int& iterations) {
    const Eigen::Index rows = N + 2, cols = N + 1;
    Eigen::MatrixXcd A = O.topLeftCorner(rows, cols);
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Identity(rows, cols);
    Eigen::MatrixXcd Osq = O.topLeftCorner(cols, cols);
    double mu = std::real(O(0, 0));  // <0|O|0>
    for (iterations = 1; iterations <= 500; ++iterations) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A - mu * E, Eigen::ComputeThinV);
        Eigen::VectorXcd c = svd.matrixV().col(cols - 1);
        double sigma = svd.singularValues()[cols - 1];
        double next = (c.adjoint() * Osq * c)(0).real();
        if (std::abs(next - mu) < 1e-10) {
            // variance about the converged mean
            return std::sqrt(std::max(0.0, sigma * sigma - (next - mu) * (next - mu)));
        }
        mu = next;
    }
    throw NumericalError("uncertainty minimization did not converge in 500 iterations (mean " + std::to_string(mu) + ")");
}

} // namespace detail

inline MinUncertainty egup_min_uncertainty(const QDeformation& d) {
    d.validate(d.mode == QDeformation::Mode::balanced ? 4.0 * d.K * d.L / (1.0 + d.q) : 1.0);
    EgupXP xp = build_egup_XP(d, d.N + 2);
    MinUncertainty r;
    r.dx_min = detail::min_variance_sqrt(xp.X.m, d.N, r.iterations_x);
    r.dp_min = detail::min_variance_sqrt(xp.P.m, d.N, r.iterations_p);
    return r;
}

// first-order EGUP operators built from the canonical ladders:
// X = L[(1 - e/4) x/L0 + (e/16)(x^3/L0^3 + p x p/(K0^2 L0))], P likewise with x <-> p
inline EgupXP build_egup_XP_approx(const QDeformation& d, const PhysicalUnits& u, Eigen::Index dim) {
    const Eigen::Index big = dim + 4;
    CanonicalXP c = canonical_xp(u, big);
    const double e = d.epsilon(), L0 = u.L0(), K0 = u.K0();
    Eigen::MatrixXcd X = d.L * ((1.0 - e / 4.0) * c.x / L0 +
                                (e / 16.0) * (c.x * c.x * c.x / (L0 * L0 * L0) + c.p * c.x * c.p / (K0 * K0 * L0)));
    Eigen::MatrixXcd P = d.K * ((1.0 - e / 4.0) * c.p / K0 +
                                (e / 16.0) * (c.p * c.p * c.p / (K0 * K0 * K0) + c.x * c.p * c.x / (L0 * L0 * K0)));
    return {FockOperator(Eigen::MatrixXcd(X.topLeftCorner(dim, dim))), FockOperator(Eigen::MatrixXcd(P.topLeftCorner(dim, dim)))};
}
inline EgupXP build_egup_XP_approx(const QDeformation& d, const PhysicalUnits& u) {
    return build_egup_XP_approx(d, u, d.N + 1);
}

// max entry of X_approx - X_exact over the rows/columns 0..N-3, divided by eps^2
inline double egup_approx_constant(const QDeformation& d, const PhysicalUnits& u) {
    EgupXP ex = build_egup_XP(d), ap = build_egup_XP_approx(d, u);
    const Eigen::Index n = d.N - 2;
    double diff = (ex.X.m - ap.X.m).topLeftCorner(n, n).cwiseAbs().maxCoeff();
    double e = d.epsilon();
    return e > 0 ? diff / (e * e) : 0.0;
}

struct SqueezedUncertainty {
    double dX = 0, dP = 0;
    double tail = 0;  // 1 - sum |c_n|^2, Fock route only
};

namespace detail {
inline double fock_uncertainty(const Eigen::MatrixXcd& O, const FockVector& c) {
    Eigen::VectorXcd v = O.leftCols(c.size()) * c;
    double m1 = (c.adjoint() * v.head(c.size()))(0).real();
    double m2 = v.squaredNorm();
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}
} // namespace detail

// Fock route: psi_s projected on |0>..|N> by quadrature against the Hermite functions
inline SqueezedUncertainty egup_squeezed_uncertainties(const QDeformation& d, const PhysicalUnits& u,
                                                       const SqueezedParams& s) {
    const double K0 = u.K0();
    const double reach = (std::sqrt(2.0 * double(d.N) + 1.0) + 8.0) * std::sqrt(2.0) * K0;
    MomentumGrid sg = squeezed_grid(s, u.hbar, 512);
    double lo = std::min(sg.p_min(), -reach), hi = std::max(sg.p_max(), reach);
    double h = std::min(sg.step(), 0.05 * K0);
    std::size_t n = next_pow2(std::size_t(std::ceil((hi - lo) / h)) + 1);
    MomentumGrid grid(lo, hi, n);
    GridWaveFunction psi = squeezed_state(s, grid, u.hbar);
    FockVector c = fock_project(psi, u, d.N);
    SqueezedUncertainty r;
    r.tail = 1.0 - c.squaredNorm();
    if (std::abs(r.tail) > 1e-8) throw ValidationError("increase N or reduce squeezing");
    EgupXP op = build_egup_XP_approx(d, u, d.N + 4);
    r.dX = detail::fock_uncertainty(op.X.m, c);
    r.dP = detail::fock_uncertainty(op.P.m, c);
    return r;
}

// Grid route: the same first-order operators as polynomials in x = i hbar d/dp and p
inline GridWaveFunction apply_egup_X_approx(const QDeformation& d, const PhysicalUnits& u, const GridWaveFunction& psi) {
    const double e = d.epsilon(), L0 = u.L0(), K0 = u.K0(), hb = u.hbar;
    GridWaveFunction x1 = canonical_x(psi, hb);
    GridWaveFunction x3 = canonical_x(canonical_x(x1, hb), hb);
    GridWaveFunction pxp = canonical_p(canonical_x(canonical_p(psi), hb));
    VectorXcd out = d.L * ((1.0 - e / 4.0) * x1.amp / L0 + (e / 16.0) * (x3.amp / (L0 * L0 * L0) + pxp.amp / (K0 * K0 * L0)));
    return psi.with(std::move(out), x3.boundary_warning || pxp.boundary_warning);
}
inline GridWaveFunction apply_egup_P_approx(const QDeformation& d, const PhysicalUnits& u, const GridWaveFunction& psi) {
    const double e = d.epsilon(), L0 = u.L0(), K0 = u.K0(), hb = u.hbar;
    GridWaveFunction p1 = canonical_p(psi);
    GridWaveFunction p3 = canonical_p(canonical_p(p1));
    GridWaveFunction xpx = canonical_x(canonical_p(canonical_x(psi, hb)), hb);
    VectorXcd out = d.K * ((1.0 - e / 4.0) * p1.amp / K0 + (e / 16.0) * (p3.amp / (K0 * K0 * K0) + xpx.amp / (L0 * L0 * K0)));
    return psi.with(std::move(out), p3.boundary_warning || xpx.boundary_warning);
}

inline SqueezedUncertainty egup_squeezed_uncertainties_grid(const QDeformation& d, const PhysicalUnits& u,
                                                            const SqueezedParams& s) {
    MomentumGrid grid = squeezed_grid(s, u.hbar, 512);
    GridWaveFunction psi = squeezed_state(s, grid, u.hbar);
    SqueezedUncertainty r;
    r.dX = uncertainty(psi, [&](const GridWaveFunction& v) { return apply_egup_X_approx(d, u, v); });
    r.dP = uncertainty(psi, [&](const GridWaveFunction& v) { return apply_egup_P_approx(d, u, v); });
    return r;
}

struct EgupLevel {
    double E = 0, E0 = 0, delta_first_order = 0, delta_numeric = 0, closed_form = 0;
};

// H = hbar omega (P^2/4K0^2 + X^2/4L0^2) from the exact q-ladders, oscillator mode
inline std::vector<EgupLevel> egup_oscillator_spectrum(const QDeformation& d, const PhysicalUnits& u, Eigen::Index count) {
    if (d.mode != QDeformation::Mode::oscillator) throw ValidationError("oscillator spectrum requires oscillator mode (L = L0, K = K0)");
    if (d.N < count + 20) throw ValidationError("oscillator spectrum requires N >= count + 20");
    // products taken one level up so that the retained block is exact
    EgupXP xp = build_egup_XP(d, d.N + 2);
    const double K0 = u.K0(), L0 = u.L0();
    Eigen::MatrixXcd H = u.hbar * u.omega * (xp.P.m * xp.P.m / (4 * K0 * K0) + xp.X.m * xp.X.m / (4 * L0 * L0));
    Eigen::MatrixXcd Hc = H.topLeftCorner(d.N + 1, d.N + 1);
    Hc = 0.5 * (Hc + Hc.adjoint()).eval();
    std::vector<double> E = spectrum(FockOperator(Hc), count);
    std::vector<EgupLevel> out(static_cast<std::size_t>(count));
    const double eps = d.epsilon();
    for (Eigen::Index n = 0; n < count; ++n) {
        EgupLevel& l = out[std::size_t(n)];
        l.E = E[std::size_t(n)];
        l.E0 = u.hbar * u.omega * (double(n) + 0.5);
        l.delta_first_order = 0.5 * eps * u.hbar * u.omega * double(n * n);
        l.delta_numeric = l.E - l.E0;
        l.closed_form = 0.5 * u.hbar * u.omega * (q_number(d.q, n) + q_number(d.q, n + 1));
    }
    return out;
}

} // namespace guplab
