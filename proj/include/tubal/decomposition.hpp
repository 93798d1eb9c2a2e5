#pragma once

#include <vector>

#include "tubal/tensor.hpp"

namespace tubal {

// Default relative threshold separating factorization noise from signal.
constexpr double kRankTol = 1e-10;
constexpr double kSymTol = 1e-8;

struct TSvdFactors {
    Tensor3 u;  // n1 x n1 x n3, orthogonal
    Tensor3 s;  // n1 x n2 x n3, f-diagonal, nonnegative nonincreasing per spectral slice
    Tensor3 v;  // n2 x n2 x n3, orthogonal
};

struct TEigFactors {
    Tensor3 u;  // n x n x n3, orthogonal
    Tensor3 s;  // n x n x n3, f-diagonal; spectral diagonals are the T-eigenvalues
    // T-eigenvalues per spectral slice, sorted descending by algebraic value.
    std::vector<Eigen::VectorXd> eigenvalues;
};

struct SpectrumStats {
    double sigma1 = 0.0;
    double sigma_min = 0.0;
    double kappa = 1.0;
    double rank_tol = kRankTol;
};

// Per-slice Hermitian eigendecomposition of the spectrum of a symmetric
// tensor; eigenvalues descending, eigenvector phases normalized so the
// largest-magnitude component of each column is real positive. Slices are
// computed for the first half of the spectrum and mirrored by conjugation,
// which keeps degenerate eigenspaces consistent across conjugate slice pairs.
struct SliceEig {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
};
std::vector<SliceEig> hermitian_slice_eig(const Tensor3& a);

// Singular values of every spectrum slice, descending.
std::vector<Eigen::VectorXd> slice_singular_values(const Tensor3& a);

TSvdFactors t_svd(const Tensor3& a);

TEigFactors t_eig(const Tensor3& a, double sym_tol = kSymTol);

int tubal_rank(const Tensor3& a, double tol = kRankTol);

// Factor of a T-PSD tensor: returns F (n x r x n3) with F*F^* = X.
Tensor3 psd_factor(const Tensor3& x, int r, double tol = kRankTol, double sym_tol = kSymTol);

// Nearest rank-r PSD factor: eigenvalues clamped at zero, top r kept.
Tensor3 project_psd_rank_r(const Tensor3& a, int r, double sym_tol = kSymTol);

SpectrumStats condition_number(const Tensor3& x, int r_star = 0, double tol = kRankTol);

bool is_tpsd(const Tensor3& x, double tol = kRankTol, double sym_tol = kSymTol);

}  // namespace tubal
