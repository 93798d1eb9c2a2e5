#include "tubal/diagnostics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tubal/decomposition.hpp"
#include "tubal/solver.hpp"
#include "test_util.hpp"

using namespace tubal;
using test::random_tensor;
using test::rel_err;

namespace {

ProblemInstance small_problem(int n, int n3, int r_star, long m, double v, std::uint64_t seed) {
    return gen_problem(n, n3, r_star, m, v, seed);
}

}  // namespace

TEST(SubspaceBasis, CoordinateAlignedTarget) {
    // X = diag(I_r, 0) replicated on slice 1: U must span the first r axes.
    const int n = 6, r = 2, n3 = 3;
    Tensor3 x(n, n, n3);
    for (int i = 0; i < r; ++i) x(i, i, 0) = 1.0;
    SubspaceBasis b = subspace_basis(x, r);
    Tensor3 proj = t_product(b.u, conj_transpose(b.u));
    EXPECT_LT(rel_err(proj, x), 1e-10);  // projector equals the target here
}

TEST(SubspaceBasis, InvariantsOnRandomInstances) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        ProblemInstance p = small_problem(7, 3, 2, 60, 0.0, 600 + s);
        SubspaceBasis b = subspace_basis(p.x_star, 2);
        EXPECT_LT(rel_err(t_product(conj_transpose(b.u), b.u), identity_tensor(2, 3)), 1e-8);
        EXPECT_LT(rel_err(t_product(conj_transpose(b.v), b.v), identity_tensor(5, 3)), 1e-8);
        EXPECT_LT(fro_norm(t_product(conj_transpose(b.u), b.v)), 1e-8);
        Tensor3 recon = t_product(t_product(b.u, b.d_star), conj_transpose(b.u));
        EXPECT_LT(fro_norm(recon - p.x_star), 1e-8 * fro_norm(p.x_star));
    }
}

TEST(SubspaceBasis, RankMismatch) {
    ProblemInstance p = small_problem(7, 3, 3, 60, 0.0, 70);
    EXPECT_THROW(subspace_basis(p.x_star, 2), RankMismatch);
}

TEST(SubspaceSplit, ProjectionsAndEnergy) {
    ProblemInstance p = small_problem(8, 3, 2, 60, 0.0, 71);
    SubspaceBasis b = subspace_basis(p.x_star, 2);

    Tensor3 mcoef = random_tensor(2, 3, 3, 72);
    auto [s1, t1] = subspace_split(t_product(b.u, mcoef), b);
    EXPECT_LT(fro_norm(t1), 1e-10 * fro_norm(s1));

    Tensor3 ncoef = random_tensor(6, 3, 3, 73);
    auto [s2, t2] = subspace_split(t_product(b.v, ncoef), b);
    EXPECT_LT(fro_norm(s2), 1e-10 * fro_norm(t2));

    Tensor3 f = random_tensor(8, 4, 3, 74);
    auto [s, t] = subspace_split(f, b);
    const double f2 = fro_norm(f) * fro_norm(f);
    EXPECT_NEAR(fro_norm(s) * fro_norm(s) + fro_norm(t) * fro_norm(t), f2, 1e-10 * f2);
    // reconstruction
    EXPECT_LT(rel_err(t_product(b.u, s) + t_product(b.v, t), f), 1e-10);
}

TEST(ErrorTerms, FixedPointAndZeroFactor) {
    ProblemInstance p = small_problem(7, 3, 2, 60, 0.0, 75);
    SubspaceBasis b = subspace_basis(p.x_star, 2);

    ErrorTerms at_solution = error_terms(p.f_star, b, p.x_star);
    const double scale = spectral_norm(p.x_star);
    EXPECT_LT(at_solution.e_t, 1e-10 * scale);
    EXPECT_LT(at_solution.delta_norm, 1e-10 * scale);

    Tensor3 zero(7, 2, 3);
    ErrorTerms at_zero = error_terms(zero, b, p.x_star);
    EXPECT_NEAR(at_zero.d_ss, scale, 1e-8 * scale);
    EXPECT_EQ(at_zero.st, 0.0);
    EXPECT_EQ(at_zero.tt, 0.0);
}

TEST(ErrorTerms, SandwichOnRandomFactors) {
    ProblemInstance p = small_problem(8, 4, 3, 60, 0.0, 76);
    SubspaceBasis b = subspace_basis(p.x_star, 3);
    for (int trial = 0; trial < 30; ++trial) {
        Tensor3 f = random_tensor(8, 5, 4, 800 + trial);
        ErrorTerms et = error_terms(f, b, p.x_star);  // throws SandwichViolated on failure
        EXPECT_EQ(et.e_t, std::max({et.d_ss, et.st, et.tt}));
        EXPECT_LE(et.e_t, et.delta_norm + 1e-8);
        EXPECT_LE(et.delta_norm, 4 * et.e_t + 1e-8);
    }
}

TEST(TildeUpdate, FixedPointAndZeroEta) {
    ProblemInstance p = small_problem(7, 3, 2, 60, 0.0, 77);
    SubspaceBasis b = subspace_basis(p.x_star, 2);

    // S with S*S^* = D_star, T = 0 is stationary
    Tensor3 s = psd_factor(b.d_star, 2);
    Tensor3 t(5, 2, 3);
    auto [sn, tn] = tilde_update(s, t, b, 1e-2);
    EXPECT_LT(rel_err(sn, s), 1e-10);
    EXPECT_LT(fro_norm(tn), 1e-10);

    Tensor3 s2 = random_tensor(2, 4, 3, 78);
    Tensor3 t2 = random_tensor(5, 4, 3, 79);
    auto [s3, t3] = tilde_update(s2, t2, b, 0.0);
    EXPECT_LT(rel_err(s3, s2), 1e-15);
    EXPECT_LT(rel_err(t3, t2), 1e-15);
}

TEST(TildeUpdate, ConsistentWithPopulationStep) {
    ProblemInstance p = small_problem(8, 3, 2, 60, 0.0, 80);
    SubspaceBasis b = subspace_basis(p.x_star, 2);
    Tensor3 f = random_tensor(8, 4, 3, 81);
    auto [s, t] = subspace_split(f, b);
    const double eta = 2e-3;
    auto [sn, tn] = tilde_update(s, t, b, eta);
    Tensor3 lhs = t_product(b.u, sn) + t_product(b.v, tn);
    Tensor3 rhs = population_step(t_product(b.u, s) + t_product(b.v, t), p.x_star, eta);
    EXPECT_LT(rel_err(lhs, rhs), 1e-10);
}

TEST(SampleDeviation, VanishesAtTruthAndIsLinear) {
    ProblemInstance p = small_problem(7, 3, 2, 90, 0.0, 82);
    EXPECT_LT(fro_norm(sample_deviation(p.f_star, p)),
              1e-10 * fro_norm(p.x_star));

    // G as a function of Delta = FF^* - X_star is linear when v = 0
    Tensor3 f = random_tensor(7, 2, 3, 83);
    Tensor3 delta = t_product(f, conj_transpose(f)) - p.x_star;
    Tensor3 g = sample_deviation(f, p);
    Tensor3 g_manual = p.ensemble.adjoint(p.ensemble.measure(delta)) - delta;
    EXPECT_LT(rel_err(g, g_manual), 1e-10);
    Tensor3 g2 = p.ensemble.adjoint(p.ensemble.measure(delta * 2.0)) - delta * 2.0;
    EXPECT_LT(rel_err(g2, g_manual * 2.0), 1e-10);
}

TEST(SampleDeviation, SmallAtLargeSampleCount) {
    const int n = 6, n3 = 2, r = 2;
    const long m = 50L * n * n * n3;
    std::vector<double> ratios;
    for (std::uint64_t s = 0; s < 10; ++s) {
        ProblemInstance p = gen_problem(n, n3, r, m, 0.0, 900 + s);
        Tensor3 f = random_tensor(n, r, n3, 950 + s);
        Tensor3 delta = t_product(f, conj_transpose(f)) - p.x_star;
        ratios.push_back(fro_norm(sample_deviation(f, p)) / fro_norm(delta));
    }
    std::sort(ratios.begin(), ratios.end());
    EXPECT_LT(ratios[ratios.size() / 2], 0.25);
}

TEST(RateFit, ExactSyntheticModels) {
    std::vector<double> lin, sub;
    for (int t = 0; t < 200; ++t) {
        lin.push_back(0.5 * std::pow(0.9, t));
        sub.push_back(3.0 / (t + 10.0));
    }
    RateFit fl = rate_fit(lin);
    EXPECT_EQ(fl.kind, RateFit::Kind::linear);
    EXPECT_NEAR(fl.slope, std::log(0.9), 1e-6);

    RateFit fs = rate_fit(sub);
    EXPECT_EQ(fs.kind, RateFit::Kind::sublinear);
    EXPECT_NEAR(fs.c, 3.0, 1e-6);
    EXPECT_NEAR(fs.t0, 10.0, 1e-5);

    EXPECT_THROW(rate_fit(std::vector<double>(5, 1.0)), InsufficientData);
    EXPECT_THROW(rate_fit(std::vector<double>(30, 0.0)), InsufficientData);
}
