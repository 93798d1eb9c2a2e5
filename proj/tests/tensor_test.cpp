#include "tubal/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "tubal/decomposition.hpp"
#include "tubal/ref.hpp"
#include "test_util.hpp"

using namespace tubal;
using test::random_tensor;
using test::rel_err;

namespace {

double spec_diff(const SpectralTensor& a, const SpectralTensor& b) {
    double s = 0;
    for (int k = 0; k < a.n3(); ++k) s += (a.slice(k) - b.slice(k)).squaredNorm();
    return std::sqrt(s);
}

}  // namespace

TEST(Tensor3, LayoutAndConstruction) {
    Tensor3 t(2, 3, 2);
    t(1, 2, 1) = 7.0;
    // slice-major, row-major within slice
    EXPECT_EQ(t.data()[1 * 6 + 1 * 3 + 2], 7.0);
    EXPECT_THROW(Tensor3::from_data(2, 2, 1, {1, 2, 3}), ShapeMismatch);
    EXPECT_THROW(Tensor3::from_data(1, 1, 1, {std::nan("")}), InvalidArgument);
}

TEST(Fft3, TrivialLengthOne) {
    Tensor3 a = random_tensor(3, 2, 1, 11);
    SpectralTensor s = fft3(a);
    EXPECT_NEAR((s.slice(0).real() - Eigen::MatrixXd(a.slice(0))).norm(), 0.0, 1e-15);
    EXPECT_NEAR(s.slice(0).imag().norm(), 0.0, 1e-15);
}

TEST(Fft3, TwoPointTube) {
    // tube (1,2) -> (3,-1)
    Tensor3 a = Tensor3::from_data(1, 1, 2, {1.0, 2.0});
    SpectralTensor s = fft3(a);
    EXPECT_NEAR(s.slice(0)(0, 0).real(), 3.0, 1e-14);
    EXPECT_NEAR(s.slice(1)(0, 0).real(), -1.0, 1e-14);
    EXPECT_NEAR(s.slice(0)(0, 0).imag(), 0.0, 1e-14);
    EXPECT_NEAR(s.slice(1)(0, 0).imag(), 0.0, 1e-14);
}

TEST(Fft3, ParsevalAndDirectOracle) {
    Tensor3 a = random_tensor(3, 3, 4, 12);
    SpectralTensor s = fft3(a);
    double spec_sq = 0;
    for (int k = 0; k < 4; ++k) spec_sq += s.slice(k).squaredNorm();
    const double f2 = fro_norm(a) * fro_norm(a);
    EXPECT_NEAR(spec_sq / f2, 4.0, 1e-10);
    // fast FFT agrees with the direct DFT summation
    EXPECT_LT(spec_diff(s, ref::fft3_direct(a)), 1e-10 * (1 + s.fro_norm()));
}

TEST(Fft3, ConjugateSymmetry) {
    Tensor3 a = random_tensor(4, 3, 5, 13);
    SpectralTensor s = fft3(a);
    for (int k = 1; k < 5; ++k) {
        EXPECT_LT((s.slice(k) - s.slice(5 - k).conjugate()).norm(), 1e-12 * (1 + s.fro_norm()));
    }
}

TEST(Ifft3, RoundTrip) {
    Tensor3 a = random_tensor(4, 3, 5, 14);
    EXPECT_LT(rel_err(ifft3(fft3(a)), a), 1e-12);
}

TEST(Ifft3, NonRealSpectrum) {
    SpectralTensor s(1, 1, 2);
    s.slice(0)(0, 0) = {1.0, 0.0};
    s.slice(1)(0, 0) = {0.0, 2.0};  // violates conjugate symmetry
    EXPECT_THROW(ifft3(s), NonRealResult);
}

TEST(Ifft3, ZeroSpectrum) {
    SpectralTensor s(2, 2, 3);
    Tensor3 z = ifft3(s);
    EXPECT_EQ(fro_norm(z), 0.0);
}

TEST(Bcirc, PaperLayout) {
    Tensor3 a = Tensor3::from_data(1, 1, 2, {1.0, 2.0});
    Eigen::MatrixXd m = bcirc_matrix(a);
    Eigen::MatrixXd want(2, 2);
    want << 1, 2, 2, 1;
    EXPECT_NEAR((m - want).norm(), 0.0, 0.0);
}

TEST(Bcirc, TrivialAndIdentity) {
    Tensor3 a = random_tensor(3, 2, 1, 15);
    EXPECT_NEAR((bcirc_matrix(a) - Eigen::MatrixXd(a.slice(0))).norm(), 0.0, 0.0);
    Eigen::MatrixXd eye = bcirc_matrix(identity_tensor(2, 3));
    EXPECT_NEAR((eye - Eigen::MatrixXd::Identity(6, 6)).norm(), 0.0, 0.0);
}

TEST(Bcirc, SizeCap) {
    Tensor3 big(200, 2, 4);
    EXPECT_THROW(bcirc_matrix(big), OracleTooLarge);
}

TEST(FoldUnfold, RoundTripBitExact) {
    Tensor3 a = random_tensor(3, 4, 5, 16);
    Tensor3 b = fold(unfold(a), 5);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.data()[i], b.data()[i]);
    EXPECT_THROW(fold(Eigen::MatrixXd::Zero(7, 2), 3), ShapeMismatch);
}

TEST(FoldUnfold, TubeColumn) {
    Tensor3 a = Tensor3::from_data(1, 1, 3, {5, 6, 7});
    Eigen::MatrixXd m = unfold(a);
    ASSERT_EQ(m.rows(), 3);
    ASSERT_EQ(m.cols(), 1);
    EXPECT_EQ(m(0, 0), 5);
    EXPECT_EQ(m(1, 0), 6);
    EXPECT_EQ(m(2, 0), 7);
    Eigen::MatrixXd id = unfold(identity_tensor(2, 2));
    EXPECT_EQ(id.block(0, 0, 2, 2), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_EQ(id.block(2, 0, 2, 2).norm(), 0.0);
}

TEST(TProduct, SmallTubes) {
    // (1,2)*(3,4) -> (11,10) per the circulant oracle
    Tensor3 a = Tensor3::from_data(1, 1, 2, {1, 2});
    Tensor3 b = Tensor3::from_data(1, 1, 2, {3, 4});
    Tensor3 c = t_product(a, b);
    EXPECT_NEAR(c(0, 0, 0), 11.0, 1e-12);
    EXPECT_NEAR(c(0, 0, 1), 10.0, 1e-12);
}

TEST(TProduct, IdentityAndShapeErrors) {
    Tensor3 a = random_tensor(4, 3, 3, 17);
    EXPECT_LT(rel_err(t_product(identity_tensor(4, 3), a), a), 1e-12);
    Tensor3 i = identity_tensor(3, 4);
    EXPECT_LT(rel_err(t_product(i, i), i), 1e-12);
    EXPECT_THROW(t_product(a, random_tensor(4, 2, 3, 18)), ShapeMismatch);
    EXPECT_THROW(t_product(a, random_tensor(3, 2, 2, 18)), ShapeMismatch);
}

TEST(TProduct, OraclePropertySweep) {
    // fast path vs bcirc oracle, transpose compatibility, associativity
    for (int trial = 0; trial < 25; ++trial) {
        const int n1 = 2 + trial % 4, n2 = 2 + (trial / 2) % 4, q = 2 + (trial / 3) % 4;
        const int n3 = 1 + trial % 6;
        Tensor3 a = random_tensor(n1, n2, n3, 100 + trial);
        Tensor3 b = random_tensor(n2, q, n3, 200 + trial);
        Tensor3 c = random_tensor(q, n1, n3, 300 + trial);

        Tensor3 fast = t_product(a, b);
        EXPECT_LT(rel_err(fast, ref::t_product_bcirc(a, b)), 1e-10);
        EXPECT_LT(rel_err(conj_transpose(fast),
                          t_product(conj_transpose(b), conj_transpose(a))), 1e-10);
        EXPECT_LT(rel_err(t_product(fast, c), t_product(a, t_product(b, c))), 1e-9);
    }
}

TEST(ConjTranspose, InvolutionAndPaperStacking) {
    Tensor3 a = random_tensor(3, 4, 4, 19);
    Tensor3 att = conj_transpose(conj_transpose(a));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.data()[i], att.data()[i]);

    // n3 = 4: transposed slices stacked in order 1,4,3,2
    Tensor3 at = conj_transpose(a);
    EXPECT_EQ(Eigen::MatrixXd(at.slice(0)), Eigen::MatrixXd(a.slice(0).transpose()));
    EXPECT_EQ(Eigen::MatrixXd(at.slice(1)), Eigen::MatrixXd(a.slice(3).transpose()));
    EXPECT_EQ(Eigen::MatrixXd(at.slice(2)), Eigen::MatrixXd(a.slice(2).transpose()));
    EXPECT_EQ(Eigen::MatrixXd(at.slice(3)), Eigen::MatrixXd(a.slice(1).transpose()));

    Tensor3 m = random_tensor(3, 2, 1, 20);
    EXPECT_EQ(Eigen::MatrixXd(conj_transpose(m).slice(0)), Eigen::MatrixXd(m.slice(0).transpose()));
}

TEST(IdentityTensor, SpectrumIsIdentity) {
    EXPECT_EQ(identity_tensor(1, 1)(0, 0, 0), 1.0);
    SpectralTensor s = fft3(identity_tensor(3, 4));
    for (int k = 0; k < 4; ++k) {
        EXPECT_LT((s.slice(k) - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-14);
    }
}

TEST(Norms, BasicIdentities) {
    Tensor3 a = random_tensor(4, 3, 5, 21);
    EXPECT_NEAR(fro_norm(a) * fro_norm(a), inner(a, a), 1e-10 * inner(a, a));
    EXPECT_THROW(inner(a, random_tensor(3, 3, 5, 21)), ShapeMismatch);
    EXPECT_NEAR(spectral_norm(identity_tensor(5, 3)), 1.0, 1e-12);
    // Parseval under the unnormalized-forward convention
    SpectralTensor s = fft3(a);
    double acc = 0;
    for (int k = 0; k < 5; ++k) acc += s.slice(k).squaredNorm();
    EXPECT_NEAR(acc / 5.0, fro_norm(a) * fro_norm(a), 1e-10 * acc);
}

TEST(Norms, SpectralVsMatrixOracle) {
    Tensor3 a = random_tensor(6, 4, 1, 22);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(a.slice(0)));
    EXPECT_NEAR(spectral_norm(a), svd.singularValues()(0), 1e-10);
}

TEST(Norms, SpectralVsBcircAndOrdering) {
    // Note |A| <= |A|_F does not survive the move from matrices to tensors:
    // the tube (1,1) in R^{1x1x2} has |A| = 2 > sqrt(2) = |A|_F. The valid
    // ordering carries a sqrt(n3) factor on the left and rank on the right.
    for (int trial = 0; trial < 100; ++trial) {
        const int n3 = 1 + trial % 6;
        Tensor3 a = random_tensor(3 + trial % 3, 2 + trial % 4, n3, 400 + trial);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(bcirc_matrix(a));
        const double snorm = spectral_norm(a);
        EXPECT_NEAR(snorm, svd.singularValues()(0), 1e-8 * svd.singularValues()(0));
        EXPECT_LE(snorm, std::sqrt(static_cast<double>(n3)) * fro_norm(a) + 1e-12);
        const int rank = tubal_rank(a);
        EXPECT_LE(fro_norm(a), std::sqrt(static_cast<double>(rank) * n3) * snorm + 1e-12);
    }
}

TEST(Sym, HermitianSpectrum) {
    Tensor3 a = sym(random_tensor(5, 5, 4, 23));
    SpectralTensor s = fft3(a);
    for (int k = 0; k < 4; ++k) {
        EXPECT_LT((s.slice(k) - s.slice(k).adjoint()).norm(), 1e-10 * (1 + s.fro_norm()));
    }
    EXPECT_TRUE(is_symmetric(a, 1e-12));
    EXPECT_FALSE(is_symmetric(random_tensor(5, 5, 4, 24), 1e-8));
}

TEST(SerialReference, MatchesParallelPath) {
    Tensor3 a = random_tensor(12, 9, 5, 25);
    Tensor3 b = random_tensor(9, 7, 5, 26);
    EXPECT_LT(rel_err(ref::t_product_serial(a, b), t_product(a, b)), 1e-12);
}
