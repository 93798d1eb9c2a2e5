#include "tubal/tensor.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

#include "tubal/parallel.hpp"

namespace tubal {

namespace {

void check_dims(int n1, int n2, int n3) {
    if (n1 < 1 || n2 < 1 || n3 < 1) {
        std::ostringstream os;
        os << "tensor dims must be positive, got " << n1 << "x" << n2 << "x" << n3;
        throw InvalidArgument(os.str());
    }
}

void check_same_shape(const Tensor3& a, const Tensor3& b, const char* what) {
    if (a.n1() != b.n1() || a.n2() != b.n2() || a.n3() != b.n3()) {
        std::ostringstream os;
        os << what << ": " << a.n1() << "x" << a.n2() << "x" << a.n3() << " vs " << b.n1()
           << "x" << b.n2() << "x" << b.n3();
        throw ShapeMismatch(os.str());
    }
}

// FFTW plan creation is not thread-safe; execution via the new-array API is.
// Plans are keyed by (n3, tube count, direction) and created with
// FFTW_UNALIGNED so they can run on any buffer.
class PlanCache {
public:
    fftw_plan get(int n3, int howmany, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(n3, howmany, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> buf(static_cast<std::size_t>(n3) * howmany);
        int n[] = {n3};
        fftw_complex* p = reinterpret_cast<fftw_complex*>(buf.data());
        fftw_plan plan = fftw_plan_many_dft(1, n, howmany, p, nullptr, howmany, 1, p, nullptr,
                                            howmany, 1, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void run_tube_dft(std::complex<double>* buf, int n3, int howmany, int sign) {
    if (n3 == 1) return;  // length-1 DFT is the identity
    fftw_plan plan = plan_cache().get(n3, howmany, sign);
    fftw_complex* p = reinterpret_cast<fftw_complex*>(buf);
    fftw_execute_dft(plan, p, p);
}

}  // namespace

Tensor3::Tensor3(int n1, int n2, int n3) : n1_(n1), n2_(n2), n3_(n3) {
    check_dims(n1, n2, n3);
    data_.assign(static_cast<std::size_t>(n1) * n2 * n3, 0.0);
}

Tensor3 Tensor3::from_data(int n1, int n2, int n3, std::vector<double> data) {
    check_dims(n1, n2, n3);
    if (data.size() != static_cast<std::size_t>(n1) * n2 * n3) {
        throw ShapeMismatch("data length does not match n1*n2*n3");
    }
    for (double v : data) {
        if (!std::isfinite(v)) throw InvalidArgument("tensor entries must be finite");
    }
    Tensor3 t;
    t.n1_ = n1;
    t.n2_ = n2;
    t.n3_ = n3;
    t.data_ = std::move(data);
    return t;
}

Tensor3& Tensor3::operator+=(const Tensor3& o) {
    check_same_shape(*this, o, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& o) {
    check_same_shape(*this, o, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

Tensor3& Tensor3::operator*=(double c) {
    for (double& v : data_) v *= c;
    return *this;
}

Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
Tensor3 operator*(Tensor3 a, double c) { return a *= c; }
Tensor3 operator*(double c, Tensor3 a) { return a *= c; }

SpectralTensor::SpectralTensor(int n1, int n2, int n3) : n1_(n1), n2_(n2), n3_(n3) {
    check_dims(n1, n2, n3);
    slices_.assign(n3, Eigen::MatrixXcd::Zero(n1, n2));
}

double SpectralTensor::fro_norm() const {
    double s = 0.0;
    for (const auto& m : slices_) s += m.squaredNorm();
    return std::sqrt(s);
}

SpectralTensor fft3(const Tensor3& a) {
    const int n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    const int tubes = n1 * n2;
    std::vector<std::complex<double>> buf(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) buf[i] = a.data()[i];
    run_tube_dft(buf.data(), n3, tubes, FFTW_FORWARD);
    SpectralTensor out(n1, n2, n3);
    for (int k = 0; k < n3; ++k) {
        auto& m = out.slice(k);
        const std::complex<double>* src = buf.data() + static_cast<std::size_t>(k) * tubes;
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) m(i, j) = src[i * n2 + j];
    }
    return out;
}

Tensor3 ifft3(const SpectralTensor& s) {
    const int n1 = s.n1(), n2 = s.n2(), n3 = s.n3();
    const int tubes = n1 * n2;
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(tubes) * n3);
    for (int k = 0; k < n3; ++k) {
        const auto& m = s.slice(k);
        std::complex<double>* dst = buf.data() + static_cast<std::size_t>(k) * tubes;
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) dst[i * n2 + j] = m(i, j);
    }
    run_tube_dft(buf.data(), n3, tubes, FFTW_BACKWARD);
    const double scale = 1.0 / n3;
    const double tol = 1e-8 * (1.0 + s.fro_norm());
    Tensor3 out(n1, n2, n3);
    for (std::size_t i = 0; i < buf.size(); ++i) {
        const std::complex<double> v = buf[i] * scale;
        if (std::abs(v.imag()) > tol) {
            std::ostringstream os;
            os << "imaginary residue " << std::abs(v.imag()) << " exceeds " << tol;
            throw NonRealResult(os.str());
        }
        out.data()[i] = v.real();
    }
    return out;
}

Eigen::MatrixXd bcirc_matrix(const Tensor3& a) {
    const int n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    if (n1 * n3 > kOracleDimCap || n2 * n3 > kOracleDimCap) {
        throw OracleTooLarge("bcirc_matrix is a test oracle; dims exceed cap");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n1) * n3,
                                              static_cast<Eigen::Index>(n2) * n3);
    for (int p = 0; p < n3; ++p) {
        for (int q = 0; q < n3; ++q) {
            const int k = ((p - q) % n3 + n3) % n3;  // block (p,q) holds slice 1 + mod(p-q, n3)
            m.block(static_cast<Eigen::Index>(p) * n1, static_cast<Eigen::Index>(q) * n2, n1, n2) =
                a.slice(k);
        }
    }
    return m;
}

Eigen::MatrixXd unfold(const Tensor3& a) {
    const int n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n1) * n3, n2);
    for (int k = 0; k < n3; ++k) m.block(static_cast<Eigen::Index>(k) * n1, 0, n1, n2) = a.slice(k);
    return m;
}

Tensor3 fold(const Eigen::MatrixXd& m, int n3) {
    if (n3 < 1 || m.rows() % n3 != 0) {
        throw ShapeMismatch("fold: row count not divisible by n3");
    }
    const int n1 = static_cast<int>(m.rows()) / n3;
    const int n2 = static_cast<int>(m.cols());
    Tensor3 out(n1, n2, n3);
    for (int k = 0; k < n3; ++k) out.slice(k) = m.block(static_cast<Eigen::Index>(k) * n1, 0, n1, n2);
    return out;
}

SpectralTensor spec_mul(const SpectralTensor& a, SpecOp opa, const SpectralTensor& b, SpecOp opb) {
    const int ra = (opa == SpecOp::none) ? a.n1() : a.n2();
    const int ca = (opa == SpecOp::none) ? a.n2() : a.n1();
    const int rb = (opb == SpecOp::none) ? b.n1() : b.n2();
    const int cb = (opb == SpecOp::none) ? b.n2() : b.n1();
    if (ca != rb || a.n3() != b.n3()) {
        std::ostringstream os;
        os << "spec_mul: inner dims " << ca << " vs " << rb << ", n3 " << a.n3() << " vs " << b.n3();
        throw ShapeMismatch(os.str());
    }
    SpectralTensor out(ra, cb, a.n3());
    const int nt = parallel::thread_count();
#pragma omp parallel for num_threads(nt) if (nt > 1 && a.n3() > 1) schedule(static)
    for (int k = 0; k < a.n3(); ++k) {
        const auto& ak = a.slice(k);
        const auto& bk = b.slice(k);
        if (opa == SpecOp::none && opb == SpecOp::none)
            out.slice(k).noalias() = ak * bk;
        else if (opa == SpecOp::none)
            out.slice(k).noalias() = ak * bk.adjoint();
        else if (opb == SpecOp::none)
            out.slice(k).noalias() = ak.adjoint() * bk;
        else
            out.slice(k).noalias() = ak.adjoint() * bk.adjoint();
    }
    return out;
}

Tensor3 t_product(const Tensor3& a, const Tensor3& b) {
    if (a.n2() != b.n1() || a.n3() != b.n3()) {
        std::ostringstream os;
        os << "t_product: " << a.n1() << "x" << a.n2() << "x" << a.n3() << " * " << b.n1() << "x"
           << b.n2() << "x" << b.n3();
        throw ShapeMismatch(os.str());
    }
    return ifft3(spec_mul(fft3(a), SpecOp::none, fft3(b), SpecOp::none));
}

Tensor3 conj_transpose(const Tensor3& a) {
    const int n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    Tensor3 out(n2, n1, n3);
    out.slice(0) = a.slice(0).transpose();
    for (int k = 1; k < n3; ++k) out.slice(k) = a.slice(n3 - k).transpose();
    return out;
}

Tensor3 identity_tensor(int n, int n3) {
    check_dims(n, n, n3);
    Tensor3 out(n, n, n3);
    for (int i = 0; i < n; ++i) out(i, i, 0) = 1.0;
    return out;
}

double fro_norm(const Tensor3& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
    return std::sqrt(s);
}

double inner(const Tensor3& a, const Tensor3& b) {
    check_same_shape(a, b, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

double spec_norm(const SpectralTensor& a) {
    const int n3 = a.n3();
    std::vector<double> per_slice(n3, 0.0);
    const int nt = parallel::thread_count();
#pragma omp parallel for num_threads(nt) if (nt > 1 && n3 > 1) schedule(static)
    for (int k = 0; k < n3; ++k) {
        const auto& m = a.slice(k);
        // sigma_max via the smaller Gram matrix; the square root halves the
        // relative error, so this is as accurate as an SVD for the top value.
        Eigen::MatrixXcd g;
        if (m.rows() <= m.cols())
            g = m * m.adjoint();
        else
            g = m.adjoint() * m;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(g, Eigen::EigenvaluesOnly);
        const double lmax = eig.eigenvalues().maxCoeff();
        per_slice[k] = lmax > 0 ? std::sqrt(lmax) : 0.0;
    }
    double best = 0.0;
    for (double v : per_slice) best = std::max(best, v);
    return best;
}

double spectral_norm(const Tensor3& a) { return spec_norm(fft3(a)); }

Tensor3 sym(const Tensor3& a) {
    if (a.n1() != a.n2()) throw ShapeMismatch("sym requires a square tensor");
    return (a + conj_transpose(a)) * 0.5;
}

bool is_symmetric(const Tensor3& a, double tol) {
    if (a.n1() != a.n2()) return false;
    const double nrm = fro_norm(a);
    return fro_norm(a - conj_transpose(a)) <= tol * std::max(1.0, nrm);
}

}  // namespace tubal
