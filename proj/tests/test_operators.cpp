#include <gtest/gtest.h>

#include <random>

#include "guplab/operators.hpp"
#include "guplab/states.hpp"

using namespace guplab;

namespace {

MomentumGrid grid512() { return MomentumGrid::centered(0.0, 20.0, 512); }

GridWaveFunction random_state(const MomentumGrid& g, std::mt19937& rng) {
    std::uniform_real_distribution<double> c(-3, 3), w(0.5, 2.0), ph(-2, 2);
    GridWaveFunction psi = sample(g, [](double) { return cplx(0.0); });
    for (int k = 0; k < 3; ++k) {
        double a = w(rng), p0 = c(rng), x0 = ph(rng);
        cplx amp(ph(rng), ph(rng));
        psi.amp += amp * squeezed_state({a, x0, p0}, g).amp;
    }
    return normalize(psi);
}

double max_diff(const GridWaveFunction& a, const GridWaveFunction& b) { return (a.amp - b.amp).cwiseAbs().maxCoeff(); }

} // namespace

TEST(CanonicalOperators, MeansAndCommutator) {
    auto g = grid512();
    EXPECT_NEAR(expectation(squeezed_state({1.0, 0.0, 0.0}, g), P_action()).real(), 0.0, 1e-14);
    EXPECT_NEAR(expectation(squeezed_state({1.0, 1.0, 0.0}, g), x_action()).real(), 1.0, 1e-8);
    auto psi = squeezed_state({0.7, 0.4, -0.3}, g);
    auto xp = canonical_x(canonical_p(psi)), px = canonical_p(canonical_x(psi));
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_LT(std::abs(xp[i] - px[i] - iunit * psi[i]), 1e-8);
}

TEST(DeformedX, CanonicalLimit) {
    std::mt19937 rng(1);
    auto g = grid512();
    auto spec = DeformationSpec::gup(0.0);
    for (int k = 0; k < 5; ++k) {
        auto psi = random_state(g, rng);
        EXPECT_LT(max_diff(deformed_X(spec, psi), canonical_x(psi)), 1e-12);
        EXPECT_LT(max_diff(deformed_X_via_g(spec, psi), canonical_x(psi)), 1e-12);
    }
}

TEST(DeformedX, RealExpectation) {
    auto g = grid512();
    auto spec = DeformationSpec::gup(0.1);
    for (double a : {0.3, 1.0, 4.0}) {
        cplx m = expectation(squeezed_state({a, 0.8, 0.5}, g), X_action(spec));
        EXPECT_LT(std::abs(m.imag()), 1e-9) << a;
    }
}

// <X> = x0 <f(p)> for a squeezed state, since <psi, f' psi> cancels the real part of the derivative term
TEST(DeformedX, MeanOfShiftedGaussian) {
    auto g = grid512();
    auto spec = DeformationSpec::gup(0.1);
    cplx m = expectation(squeezed_state({1.0, 1.0, 0.0}, g), X_action(spec));
    EXPECT_NEAR(m.real(), 1.05, 1e-9);
}

TEST(DeformedX, ViaGAgreesOnRandomStates) {
    std::mt19937 rng(4);
    auto g = grid512();
    auto spec = DeformationSpec::gup(0.1);
    for (int k = 0; k < 50; ++k) {
        auto psi = random_state(g, rng);
        double r = norm(psi.with(deformed_X(spec, psi).amp - deformed_X_via_g(spec, psi).amp));
        EXPECT_LT(r, 1e-8);
    }
}

TEST(DeformedX, SecondMomentTwoWays) {
    auto g = grid512();
    auto spec = DeformationSpec::gup(0.1);
    auto psi = squeezed_state({1.0, 0.5, 0.5}, g);
    auto Xpsi = deformed_X(spec, psi);
    cplx viaTwice = inner_product(psi, deformed_X(spec, Xpsi));
    EXPECT_NEAR(viaTwice.real(), norm(Xpsi) * norm(Xpsi), 1e-8);
}

TEST(DeformedX, SymmetricUnderInnerProduct) {
    std::mt19937 rng(9);
    auto g = grid512();
    auto spec = parse_deformation("1 + beta*p^2 + alpha*p^4", {{"beta", 0.1}, {"alpha", 0.002}});
    for (int k = 0; k < 10; ++k) {
        auto a = random_state(g, rng), b = random_state(g, rng);
        EXPECT_LT(std::abs(inner_product(a, deformed_X(spec, b)) - inner_product(deformed_X(spec, a), b)), 1e-8);
    }
}

TEST(DeformedX, Linearity) {
    std::mt19937 rng(12);
    auto g = grid512();
    auto spec = DeformationSpec::gup(0.1);
    auto a = random_state(g, rng), b = random_state(g, rng);
    const cplx al(0.3, -1.2);
    auto lhs = deformed_X(spec, a.with(al * a.amp + b.amp));
    auto ra = deformed_X(spec, a), rb = deformed_X(spec, b);
    EXPECT_LT((lhs.amp - (al * ra.amp + rb.amp)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DeformedX, ViaGRejectsNegativeG) {
    auto g = grid512();
    auto spec = parse_deformation("1/(1 + beta*p^2)", {{"beta", 0.1}});
    try {
        deformed_X_via_g(spec, squeezed_state({1, 0, 0}, g));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("g not nonnegative"), std::string::npos);
    }
}

TEST(NonsymmetricX, ComplexExpectation) {
    auto g = grid512();
    // the imaginary part is -hbar beta p0, so a moving packet shows it
    auto psi = squeezed_state({1.0, 0.0, 1.0}, g);
    EXPECT_GT(std::abs(expectation(psi, [&](const GridWaveFunction& v) {
                  return nonsymmetric_X(DeformationSpec::gup(0.1), v);
              }).imag()),
              1e-3);
    EXPECT_LT(std::abs(expectation(psi, X_action(DeformationSpec::gup(0.1))).imag()), 1e-10);
    EXPECT_LT(std::abs(expectation(psi, [&](const GridWaveFunction& v) {
                  return nonsymmetric_X(DeformationSpec::gup(0.0), v);
              }).imag()),
              1e-10);
}

TEST(NonsymmetricX, DiffersByHalfDerivativeTerm) {
    auto g = grid512();
    auto spec = DeformationSpec::gup(0.1);
    auto psi = squeezed_state({1.3, -0.4, 0.6}, g);
    auto d = deformed_X(spec, psi);
    auto n = nonsymmetric_X(spec, psi);
    VectorXd df = spec.df_on(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_LT(std::abs(d[i] - n[i] - 0.5 * iunit * df[Eigen::Index(i)] * psi[i]), 1e-10);
}

TEST(Commutator, ResidualSmallOnFineGrid) {
    auto g = MomentumGrid::standard();
    auto psi = squeezed_state({1.0, 0.3, 0.2}, g);
    EXPECT_LT(commutator_residual(DeformationSpec::gup(0.1), psi), 1e-8);
    EXPECT_LT(commutator_residual(DeformationSpec::gup(0.0), psi), 1e-10);
}

TEST(Commutator, CoarseGridDiagnostic) {
    auto g = MomentumGrid::centered(0.0, 20.0, 64);
    auto psi = squeezed_state({1.0, 0.0, 0.0}, g);
    EXPECT_GT(commutator_residual(DeformationSpec::gup(0.1), psi), 1e-4);
}

TEST(CheckGup, SatisfiedAndSaturated) {
    auto g = grid512();
    auto c = check_gup(DeformationSpec::gup(0.01), squeezed_state({1.0, 0.0, 0.0}, g));
    EXPECT_TRUE(c.satisfied);
    EXPECT_GT(c.lhs, c.rhs);
    for (double a : {0.2, 1.0, 3.0}) {
        auto c0 = check_gup(DeformationSpec::gup(0.0), squeezed_state({a, 0.5, -0.5}, g));
        EXPECT_NEAR(c0.lhs, 0.5, 1e-8);
        EXPECT_NEAR(c0.rhs, 0.5, 1e-12);
    }
}

TEST(CheckGup, RejectsSlowlyDecayingState) {
    auto g = grid512();
    auto slow = normalize(sample(g, [](double p) { return 1.0 / (1.0 + p * p); }));
    try {
        check_gup(DeformationSpec::gup(0.01), slow);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("state outside physical domain heuristic"), std::string::npos);
    }
}

// Minimal-length states never pass the decay heuristic, so both sides are evaluated directly.
// Truncating the 1/p^2 tail at P shifts both sides alike; what remains is second order in it.
TEST(GupTerms, MinimalLengthStateSaturates) {
    for (double beta : {0.01, 0.04}) {
        auto g = ml_grid(beta, 0.0, 1.0, 600.0);
        auto c = gup_terms(DeformationSpec::gup(beta), ml_state({0.0, beta}, g));
        EXPECT_NEAR(c.lhs, c.rhs, 1e-6) << beta;
    }
}

TEST(GupTerms, SqueezedSweepSatisfied) {
    auto spec = DeformationSpec::gup(0.01);
    for (int i = 0; i <= 60; ++i) {
        double a = std::pow(10.0, -3.0 + 6.0 * i / 60.0);
        auto psi = squeezed_state({a, 0.0, 0.0}, squeezed_grid({a, 0.0, 0.0}));
        EXPECT_TRUE(check_gup(spec, psi).satisfied) << a;
    }
}
