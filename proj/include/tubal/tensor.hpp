#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "tubal/errors.hpp"

namespace tubal {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SliceMap = Eigen::Map<RowMat>;
using ConstSliceMap = Eigen::Map<const RowMat>;

// Dense real third-order tensor. Storage is frontal-slice-major (k outermost)
// and row-major within each slice; this layout is part of the T3R1 file
// format, so entry (i,j,k) always lives at data[k*n1*n2 + i*n2 + j].
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int n1, int n2, int n3);

    // Validates the layout size and that all entries are finite.
    static Tensor3 from_data(int n1, int n2, int n3, std::vector<double> data);

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int n3() const { return n3_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator()(int i, int j, int k) const {
        return data_[static_cast<std::size_t>(k) * n1_ * n2_ + static_cast<std::size_t>(i) * n2_ + j];
    }
    double& operator()(int i, int j, int k) {
        return data_[static_cast<std::size_t>(k) * n1_ * n2_ + static_cast<std::size_t>(i) * n2_ + j];
    }

    SliceMap slice(int k) {
        return SliceMap(data_.data() + static_cast<std::size_t>(k) * n1_ * n2_, n1_, n2_);
    }
    ConstSliceMap slice(int k) const {
        return ConstSliceMap(data_.data() + static_cast<std::size_t>(k) * n1_ * n2_, n1_, n2_);
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    Tensor3& operator+=(const Tensor3& o);
    Tensor3& operator-=(const Tensor3& o);
    Tensor3& operator*=(double c);

private:
    int n1_ = 0, n2_ = 0, n3_ = 0;
    std::vector<double> data_;
};

Tensor3 operator+(Tensor3 a, const Tensor3& b);
Tensor3 operator-(Tensor3 a, const Tensor3& b);
Tensor3 operator*(Tensor3 a, double c);
Tensor3 operator*(double c, Tensor3 a);

// Frequency-domain form: the n3 complex frontal slices of the tensor after a
// DFT along the third mode (unnormalized forward, 1/n3-scaled inverse).
class SpectralTensor {
public:
    SpectralTensor() = default;
    SpectralTensor(int n1, int n2, int n3);

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int n3() const { return n3_; }

    Eigen::MatrixXcd& slice(int k) { return slices_[k]; }
    const Eigen::MatrixXcd& slice(int k) const { return slices_[k]; }

    double fro_norm() const;

private:
    int n1_ = 0, n2_ = 0, n3_ = 0;
    std::vector<Eigen::MatrixXcd> slices_;
};

// --- transforms -------------------------------------------------------------

SpectralTensor fft3(const Tensor3& a);

// Throws NonRealResult if any imaginary residue exceeds 1e-8*(1+|S|_F).
Tensor3 ifft3(const SpectralTensor& s);

// --- block-circulant oracles (test-sized, capped) ---------------------------

// Cap on n1*n3 and n2*n3 for the dense oracles below.
constexpr int kOracleDimCap = 500;

Eigen::MatrixXd bcirc_matrix(const Tensor3& a);
Eigen::MatrixXd unfold(const Tensor3& a);
Tensor3 fold(const Eigen::MatrixXd& m, int n3);

// --- t-product algebra -------------------------------------------------------

Tensor3 t_product(const Tensor3& a, const Tensor3& b);
Tensor3 conj_transpose(const Tensor3& a);
Tensor3 identity_tensor(int n, int n3);

double fro_norm(const Tensor3& a);
double inner(const Tensor3& a, const Tensor3& b);
double spectral_norm(const Tensor3& a);

// (A + A^*)/2; requires n1 == n2.
Tensor3 sym(const Tensor3& a);

bool is_symmetric(const Tensor3& a, double tol);

// --- spectral-domain kernels -------------------------------------------------
// Per-slice complex products, OpenMP-parallel over slices. These are the fast
// paths behind t_product and the solver's inner loop.

enum class SpecOp { none, adjoint };

// C(k) = op(A(k)) * op(B(k)) for every slice k.
SpectralTensor spec_mul(const SpectralTensor& a, SpecOp opa,
                        const SpectralTensor& b, SpecOp opb);

// Largest singular value per slice, maximized over slices.
double spec_norm(const SpectralTensor& a);

}  // namespace tubal
