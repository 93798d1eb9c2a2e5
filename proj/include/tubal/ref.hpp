#pragma once

#include "tubal/tensor.hpp"

// Serial reference implementations. They trade speed for obviousness and are
// kept as oracles for the OpenMP kernels; the bench command times both.
namespace tubal::ref {

// Direct DFT summation along every tube, O(n3^2) per tube.
SpectralTensor fft3_direct(const Tensor3& a);

// fold(bcirc(A) * unfold(B)); capped like bcirc_matrix.
Tensor3 t_product_bcirc(const Tensor3& a, const Tensor3& b);

// Spectral-domain product with plain single-threaded loops.
Tensor3 t_product_serial(const Tensor3& a, const Tensor3& b);

}  // namespace tubal::ref
