#include "tubal/ref.hpp"

#include <cmath>
#include <complex>

namespace tubal::ref {

SpectralTensor fft3_direct(const Tensor3& a) {
    const int n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    SpectralTensor out(n1, n2, n3);
    const double w = -2.0 * M_PI / n3;
    for (int k = 0; k < n3; ++k) {
        auto& m = out.slice(k);
        for (int i = 0; i < n1; ++i) {
            for (int j = 0; j < n2; ++j) {
                std::complex<double> s(0.0, 0.0);
                for (int t = 0; t < n3; ++t) {
                    const double ang = w * k * t;
                    s += a(i, j, t) * std::complex<double>(std::cos(ang), std::sin(ang));
                }
                m(i, j) = s;
            }
        }
    }
    return out;
}

Tensor3 t_product_bcirc(const Tensor3& a, const Tensor3& b) {
    if (a.n2() != b.n1() || a.n3() != b.n3()) throw ShapeMismatch("t_product_bcirc");
    return fold(bcirc_matrix(a) * unfold(b), a.n3());
}

Tensor3 t_product_serial(const Tensor3& a, const Tensor3& b) {
    if (a.n2() != b.n1() || a.n3() != b.n3()) throw ShapeMismatch("t_product_serial");
    const SpectralTensor fa = fft3(a);
    const SpectralTensor fb = fft3(b);
    SpectralTensor out(a.n1(), b.n2(), a.n3());
    for (int k = 0; k < a.n3(); ++k) out.slice(k).noalias() = fa.slice(k) * fb.slice(k);
    return ifft3(out);
}

}  // namespace tubal::ref
