#include <gtest/gtest.h>

#include "guplab/egup.hpp"

using namespace guplab;

TEST(QNumber, Values) {
    EXPECT_DOUBLE_EQ(q_number(2.0, 3), 7.0);
    EXPECT_DOUBLE_EQ(q_number(1.0, 5), 5.0);
    EXPECT_NEAR(q_number(1.01, 4), 4.0 + 0.01 * 6, 1e-3);
    EXPECT_NEAR(q_number(1.01, 4), 4.060401, 1e-12);
    EXPECT_NEAR(q_number(1.0 + 1e-9, 4), 4.0 + 6e-9, 1e-15);
    EXPECT_EQ(q_number(1.3, 0), 0.0);
    EXPECT_THROW(q_number(1.1, -1), ValidationError);
}

TEST(QNumber, ShiftIdentity) {
    for (double q : {1.0, 1.05, 1.5, 2.0})
        for (long n = 0; n < 40; ++n) EXPECT_NEAR(q_number(q, n + 1) - q * q_number(q, n), 1.0, 1e-12 * q_number(q, n + 1));
}

TEST(QLadders, Commutator) {
    for (double q : {1.0, 1.1, 1.2, 1.5, 2.0}) {
        auto [a, ad] = build_q_ladders(q, 30);
        Eigen::MatrixXcd c = a.m * ad.m - q * ad.m * a.m;
        for (Eigen::Index n = 0; n < 29; ++n) EXPECT_NEAR(std::abs(c(n, n) - 1.0), 0.0, 1e-13 * std::pow(q, n)) << q;
        EXPECT_LT((c - Eigen::MatrixXcd(c.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
        FockVector v0 = FockVector::Zero(30);
        v0[0] = 1;
        EXPECT_EQ((a.m * v0).norm(), 0.0);
    }
    auto [a1, ad1] = build_q_ladders(1.0, 12);
    auto [b, bd] = build_ladder(12);
    EXPECT_EQ((a1.m - b.m).cwiseAbs().maxCoeff(), 0.0);
}

TEST(QLadders, ResidualRecord) {
    for (double q : {1.0, 1.1, 1.5, 2.0}) {
        auto r = q_commutator_residual(QDeformation::balanced(q, 1.0, 40));
        EXPECT_LT(r.residual, 1e-13 * r.scale) << q;
    }
}

TEST(QDeformation, ModesAndValidation) {
    auto d = QDeformation::balanced(1.2, 0.7, 50);
    EXPECT_NEAR(4 * d.K * d.L, 2.2, 1e-12);
    PhysicalUnits u;
    u.mass = 3;
    auto o = QDeformation::oscillator(1.2, u, 50);
    EXPECT_DOUBLE_EQ(o.L, u.L0());
    EXPECT_DOUBLE_EQ(o.K, u.K0());
    EXPECT_NEAR(o.epsilon(), 0.2, 1e-15);
    EXPECT_THROW(QDeformation::balanced(0.9, 1.0, 50), ValidationError);
    EXPECT_THROW(QDeformation::balanced(1.1, -1.0, 50), ValidationError);
    QDeformation bad{1.1, 1.0, 1.0, 50, QDeformation::Mode::balanced};
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(EgupXP, HermitianAndCanonicalLimit) {
    auto d = QDeformation::balanced(1.3, 1.0, 60);
    auto xp = build_egup_XP(d);
    EXPECT_LT(xp.X.hermiticity_residual(), 1e-12);
    EXPECT_LT(xp.P.hermiticity_residual(), 1e-12);
    auto c = QDeformation::balanced(1.0, 1.0, 60);
    auto xpc = build_egup_XP(c);
    Eigen::MatrixXcd comm = xpc.X.m * xpc.P.m - xpc.P.m * xpc.X.m;
    for (Eigen::Index n = 0; n < 60; ++n) EXPECT_NEAR(std::abs(comm(n, n) - cplx(0, 1)), 0.0, 1e-12);
    // ground state width: <0|X^2|0> = L^2 [1]
    Eigen::MatrixXcd X2 = xp.X.m * xp.X.m;
    EXPECT_NEAR(std::sqrt(X2(0, 0).real()), d.L, 1e-14);
}

TEST(EgupCommutator, QuadraticFitIsExact) {
    for (double q : {1.05, 1.1, 1.5}) {
        auto d = QDeformation::balanced(q, 1.3, 60);
        auto f = fit_egup_commutator(d);
        EXPECT_LT(f.residual, 1e-9 * f.scale) << q;
        EXPECT_NEAR(f.c0, f.c0_exact, 1e-9 * std::abs(f.c0_exact));
        EXPECT_NEAR(f.c1, f.c1_exact, 1e-9 * std::abs(f.c1_exact));
        EXPECT_NEAR(f.c2, f.c2_exact, 1e-9 * std::abs(f.c2_exact));
        EXPECT_NEAR(f.dx_min, egup_dx_floor(d), 1e-8 * egup_dx_floor(d));
    }
}

TEST(EgupFloor, WithinTwoPercent) {
    for (double q : {1.1, 1.2}) {
        auto d = QDeformation::balanced(q, 1.0, 100);
        auto m = egup_min_uncertainty(d);
        double fl = egup_dx_floor(d);
        EXPECT_GE(m.dx_min, fl - 1e-6);
        EXPECT_NEAR(m.dx_min / fl, 1.0, 0.02) << q;
        EXPECT_NEAR(m.dp_min / d.K, m.dx_min / d.L, 1e-10);
    }
    auto d = QDeformation::balanced(1.1, 1.0, 100);
    EXPECT_NEAR(egup_min_uncertainty(d).dx_min / d.L, std::sqrt(0.1 / 1.1), 0.02 * std::sqrt(0.1 / 1.1));
}

// q close to 1 pushes the minimizer beyond a 100-level basis; the floor is approached from above
TEST(EgupFloor, ConvergesFromAboveInN) {
    double prev = 1e9;
    for (Eigen::Index N : {60, 100, 160}) {
        auto d = QDeformation::balanced(1.05, 1.0, N);
        double dx = egup_min_uncertainty(d).dx_min;
        EXPECT_LT(dx, prev);
        EXPECT_GE(dx, egup_dx_floor(d) - 1e-6);
        prev = dx;
    }
}

TEST(EgupFloor, NoFloorAtQOne) {
    auto d = QDeformation::balanced(1.0, 1.0, 100);
    EXPECT_EQ(egup_dx_floor(d), 0.0);
    EXPECT_LT(egup_min_uncertainty(d).dx_min, 0.2);
}

TEST(EgupApprox, CanonicalAtZero) {
    PhysicalUnits u;
    auto d = QDeformation::oscillator(1.0, u, 30);
    auto ap = build_egup_XP_approx(d, u);
    auto c = canonical_xp(u, 31);
    EXPECT_LT((ap.X.m - c.x).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((ap.P.m - c.p).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(egup_approx_constant(d, u), 0.0);
}

TEST(EgupApprox, SecondOrderAgreement) {
    PhysicalUnits u;
    double c1 = egup_approx_constant(QDeformation::oscillator(1.01, u, 30), u);
    double c2 = egup_approx_constant(QDeformation::oscillator(1.005, u, 30), u);
    // differences scale as eps^2 so the constant is stable under halving
    EXPECT_NEAR(c1 / c2, 1.0, 0.125);
    auto d = QDeformation::oscillator(1.01, u, 30);
    auto ap = build_egup_XP_approx(d, u);
    Eigen::MatrixXcd X2 = ap.X.m * ap.X.m;
    EXPECT_NEAR(X2(0, 0).real() / (u.L0() * u.L0()), 1.0, 0.01);
}

TEST(EgupSqueezed, CanonicalAtZeroAndRoutesAgree) {
    PhysicalUnits u;
    auto d0 = QDeformation::oscillator(1.0, u, 60);
    auto r0 = egup_squeezed_uncertainties(d0, u, {1, 0, 0});
    EXPECT_NEAR(r0.dX, std::sqrt(0.5), 1e-9);
    EXPECT_NEAR(r0.dP, std::sqrt(0.5), 1e-9);
    auto d = QDeformation::oscillator(1.01, u, 80);
    for (double a : {0.5, 1.0, 2.0}) {
        auto f = egup_squeezed_uncertainties(d, u, {a, 1, 1});
        auto g = egup_squeezed_uncertainties_grid(d, u, {a, 1, 1});
        EXPECT_NEAR(f.dX, g.dX, 1e-7) << a;
        EXPECT_NEAR(f.dP, g.dP, 1e-7) << a;
    }
}

TEST(EgupSqueezed, TruncationGuard) {
    PhysicalUnits u;
    auto d = QDeformation::oscillator(1.01, u, 20);
    try {
        egup_squeezed_uncertainties(d, u, {1e-3, 1, 1});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("increase N or reduce squeezing"), std::string::npos);
    }
}

TEST(EgupSqueezed, DivergesAtBothEnds) {
    PhysicalUnits u;
    auto d = QDeformation::oscillator(1.01, u, 60);
    auto lo = egup_squeezed_uncertainties_grid(d, u, {1e-3, 1, 1});
    auto mid = egup_squeezed_uncertainties_grid(d, u, {1.0, 1, 1});
    auto hi = egup_squeezed_uncertainties_grid(d, u, {1e3, 1, 1});
    EXPECT_GT(lo.dX, mid.dX);
    EXPECT_GT(hi.dX, mid.dX);
    EXPECT_GT(lo.dP, mid.dP);
    EXPECT_GT(hi.dP, mid.dP);
}

TEST(EgupSpectrum, ClosedFormAndFirstOrder) {
    PhysicalUnits u;
    for (double eps : {1e-3, 1e-2}) {
        auto d = QDeformation::oscillator(1.0 + eps, u, 60);
        auto lv = egup_oscillator_spectrum(d, u, 40);
        for (std::size_t n = 0; n < lv.size(); ++n) EXPECT_NEAR(lv[n].E, lv[n].closed_form, 1e-10 * lv[n].closed_form);
        for (std::size_t n = 1; n <= 10; ++n) {
            double r = lv[n].delta_numeric / lv[n].delta_first_order;
            EXPECT_GE(r, 0.95) << eps << ' ' << n;
            EXPECT_LE(r, 1.05) << eps << ' ' << n;
        }
    }
    auto d = QDeformation::oscillator(1.001, u, 40);
    EXPECT_NEAR(egup_oscillator_spectrum(d, u, 10)[4].delta_first_order, 0.008, 1e-15);
}

TEST(EgupSpectrum, CanonicalAndGuards) {
    PhysicalUnits u;
    auto d = QDeformation::oscillator(1.0, u, 40);
    auto lv = egup_oscillator_spectrum(d, u, 20);
    for (std::size_t n = 0; n < lv.size(); ++n) EXPECT_NEAR(lv[n].E, n + 0.5, 1e-12);
    EXPECT_THROW(egup_oscillator_spectrum(d, u, 21), ValidationError);
    EXPECT_THROW(egup_oscillator_spectrum(QDeformation::balanced(1.1, 1.0, 60), u, 10), ValidationError);
}
