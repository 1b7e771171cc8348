#include <gtest/gtest.h>

#include <random>

#include "guplab/oscillator.hpp"
#include "guplab/states.hpp"

using namespace guplab;

namespace {

OscillatorSpec osc(double beta, Eigen::Index N = 200) {
    OscillatorSpec s;
    s.beta = beta;
    s.N = N;
    return s;
}

MomentumGrid osc_grid() { return MomentumGrid::centered(0.0, 16.0, 1024); }

} // namespace

TEST(Ladder, ActionAndCommutator) {
    auto [b, bd] = build_ladder(6);
    FockVector v0 = FockVector::Zero(6), v1 = FockVector::Zero(6);
    v0[0] = 1;
    v1[1] = 1;
    EXPECT_EQ((b.m * v0).cwiseAbs().maxCoeff(), 0.0);
    FockVector w = bd.m * v1;
    EXPECT_DOUBLE_EQ(w[2].real(), std::sqrt(2.0));
    Eigen::MatrixXcd c = b.m * bd.m - bd.m * b.m;
    for (Eigen::Index n = 0; n < 5; ++n) EXPECT_LT(std::abs(c(n, n) - 1.0), 1e-14);
    EXPECT_LT(std::abs(c(5, 5) + 5.0), 1e-14);
    EXPECT_THROW(build_ladder(1), ValidationError);
}

TEST(HGup, CanonicalSpectrum) {
    auto e = spectrum(build_H_gup(osc(0.0, 60)), 50);
    for (std::size_t n = 0; n < e.size(); ++n) EXPECT_NEAR(e[n], n + 0.5, 1e-10);
}

TEST(HGup, Hermitian) {
    EXPECT_LT(build_H_gup(osc(1e-3)).hermiticity_residual(), 1e-10);
}

TEST(HGup, FirstLevelCorrection) {
    auto e = spectrum(build_H_gup(osc(1e-3)), 11);
    EXPECT_NEAR((e[1] - 1.5) / 1.25e-3, 1.0, 0.05);
    for (std::size_t n = 1; n < e.size(); ++n) EXPECT_GE(e[n], e[n - 1]);
}

TEST(HGup, PerturbativeRatios) {
    for (double beta : {1e-4, 1e-3}) {
        auto s = osc(beta);
        EXPECT_TRUE(s.perturbative());
        auto e = spectrum(build_H_gup(s), 11);
        for (int n = 0; n <= 10; ++n) {
            double r = (e[std::size_t(n)] - (n + 0.5)) / delta_E_perturbative(s, n);
            EXPECT_GE(r, 0.95) << beta << ' ' << n;
            EXPECT_LE(r, 1.05) << beta << ' ' << n;
        }
        EXPECT_GE(e[0], 0.5);
    }
}

TEST(HGup, TruncationStable) {
    auto a = spectrum(build_H_gup(osc(1e-4, 100)), 11);
    auto b = spectrum(build_H_gup(osc(1e-4, 200)), 11);
    for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(a[n], b[n], 1e-8 * b[n]);
}

TEST(HGup, NonPositiveDeformationRejected) {
    auto s = osc(0.0);
    s.beta = -1.0;
    EXPECT_THROW(build_H_gup(s), ValidationError);
}

TEST(Spectrum, GuardBand) {
    auto H = build_H_gup(osc(0.0, 30));
    EXPECT_THROW(spectrum(H, 22), ValidationError);
    EXPECT_NO_THROW(spectrum(H, 21));
}

TEST(DeltaE, ClosedForm) {
    EXPECT_DOUBLE_EQ(delta_E_perturbative(osc(1e-3), 0), 2.5e-4);
    EXPECT_DOUBLE_EQ(delta_E_perturbative(osc(1e-3), 2), 3.25e-3);
    EXPECT_EQ(delta_E_perturbative(osc(0.0), 7), 0.0);
    EXPECT_THROW(delta_E_perturbative(osc(1e-3, 20), 21), ValidationError);
}

TEST(HermiteStates, NormOrthogonalityAndWidth) {
    PhysicalUnits u;
    auto g = osc_grid();
    std::vector<GridWaveFunction> h;
    for (int n = 0; n <= 6; ++n) h.push_back(hermite_eigenstate(u, n, g));
    for (int n = 0; n <= 6; ++n) {
        EXPECT_NEAR(norm(h[std::size_t(n)]), 1.0, 1e-9);
        for (int m = 0; m < n; ++m) EXPECT_LT(std::abs(inner_product(h[std::size_t(m)], h[std::size_t(n)])), 1e-9);
    }
    EXPECT_NEAR(uncertainty(h[0], P_action()), u.K0(), 1e-10);
    EXPECT_THROW(hermite_eigenstate(u, 40, MomentumGrid::centered(0.0, 5.0, 256)), ValidationError);
}

TEST(HermiteStates, EigenfunctionsOfH0) {
    PhysicalUnits u;
    u.mass = 2.0;
    u.omega = 0.5;
    auto g = osc_grid();
    for (int n = 0; n <= 8; ++n) {
        auto psi = hermite_eigenstate(u, n, g);
        auto Hpsi = apply_H0(u, psi);
        EXPECT_LT(norm(psi.with(Hpsi.amp - u.hbar * u.omega * (n + 0.5) * psi.amp)), 1e-7) << n;
    }
}

TEST(VMomentum, ZeroAtBetaZero) {
    auto g = osc_grid();
    auto v = apply_V_momentum(osc(0.0), hermite_eigenstate({}, 2, g));
    EXPECT_EQ(v.amp.cwiseAbs().maxCoeff(), 0.0);
}

// The full V carries g^2 terms; its diagonal exceeds the first-order value by O(beta^2).
TEST(VMomentum, FirstOrderPartMatchesClosedForm) {
    auto g = osc_grid();
    auto s = osc(1e-3);
    for (int n = 0; n <= 5; ++n) {
        auto psi = hermite_eigenstate(s.units, n, g);
        double v1 = inner_product(psi, apply_V_momentum(s, psi, VOrder::first)).real();
        EXPECT_NEAR(v1 / delta_E_perturbative(s, n), 1.0, 1e-10) << n;
        double vf = inner_product(psi, apply_V_momentum(s, psi)).real();
        EXPECT_NEAR(vf / delta_E_perturbative(s, n), 1.0, 1e-2) << n;
    }
    auto psi0 = hermite_eigenstate(s.units, 0, g);
    double excess = inner_product(psi0, apply_V_momentum(s, psi0)).real() - delta_E_perturbative(s, 0);
    EXPECT_NEAR(excess, 7.0 / 16.0 * s.beta * s.beta, 1e-12);
}

TEST(VMomentum, Hermitian) {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> c(-1, 1);
    auto g = osc_grid();
    auto s = osc(1e-2);
    for (int k = 0; k < 5; ++k) {
        auto mk = [&] {
            auto v = sample(g, [](double) { return cplx(0); });
            for (int n = 0; n < 4; ++n) v.amp += cplx(c(rng), c(rng)) * hermite_eigenstate({}, n, g).amp;
            return v;
        };
        auto phi = mk(), psi = mk();
        EXPECT_LT(std::abs(inner_product(phi, apply_V_momentum(s, psi)) - inner_product(apply_V_momentum(s, phi), psi)), 1e-8);
    }
}

TEST(CrossCheck, GridExpectationMatchesFockForm) {
    auto s = osc(1e-3);
    auto H = build_H_gup(s);
    auto g = osc_grid();
    for (int n = 0; n <= 5; ++n) {
        auto psi = hermite_eigenstate(s.units, n, g);
        double grid = inner_product(psi, apply_H_gup(s, psi)).real();
        EXPECT_NEAR(grid / H.m(n, n).real(), 1.0, 1e-6) << n;
    }
}

TEST(FockProjection, HermiteStatesMapToBasisVectors) {
    PhysicalUnits u;
    auto g = osc_grid();
    for (int n = 0; n <= 4; ++n) {
        auto c = fock_project(hermite_eigenstate(u, n, g), u, 10);
        EXPECT_NEAR(std::abs(c[n]), 1.0, 1e-9);
        EXPECT_NEAR(c.norm(), 1.0, 1e-9);
    }
}

TEST(DeltaPsi, FirstOrderStateCorrection) {
    auto s = osc(1e-4, 60);
    auto d = delta_psi(s, 2);
    EXPECT_EQ(d[2], cplx(0.0));
    // exact eigenvector of H minus |2>, to first order
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(build_H_gup(s).m);
    FockVector v = es.eigenvectors().col(2);
    v /= v[2];
    FockVector r = v;
    r[2] = 0;
    EXPECT_LT((r - d).norm(), 1e-2 * d.norm());
}
