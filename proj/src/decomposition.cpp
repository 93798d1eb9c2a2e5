#include "tubal/decomposition.hpp"

#include <algorithm>
#include <cmath>

#include "tubal/parallel.hpp"

namespace tubal {

namespace {

// Make the largest-magnitude component of each column real positive.
void normalize_phases(Eigen::MatrixXcd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double a = std::abs(m(i, j));
            if (a > best) {
                best = a;
                imax = i;
            }
        }
        if (best > 0) {
            const std::complex<double> phase = m(imax, j) / best;
            m.col(j) *= std::conj(phase);
        }
    }
}

// Indices of the spectrum slices that have to be computed; the rest are
// conjugate mirrors. Slice 0 (and n3/2 for even n3) are self-conjugate and
// real-valued for real input tensors.
inline int half_count(int n3) { return n3 / 2 + 1; }
inline bool self_conjugate(int k, int n3) { return k == 0 || (n3 % 2 == 0 && k == n3 / 2); }

}  // namespace

std::vector<SliceEig> hermitian_slice_eig(const Tensor3& a) {
    const int n3 = a.n3();
    const SpectralTensor spec = fft3(a);
    std::vector<SliceEig> out(n3);
    const int h = half_count(n3);
    const int nt = parallel::thread_count();
#pragma omp parallel for num_threads(nt) if (nt > 1 && h > 1) schedule(static)
    for (int k = 0; k < h; ++k) {
        if (self_conjugate(k, n3)) {
            Eigen::MatrixXd hre = spec.slice(k).real();
            hre = 0.5 * (hre + hre.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hre);
            const Eigen::VectorXd vals = eig.eigenvalues().reverse();
            Eigen::MatrixXcd vecs = eig.eigenvectors().rowwise().reverse().cast<std::complex<double>>();
            normalize_phases(vecs);
            out[k] = {vals, std::move(vecs)};
        } else {
            Eigen::MatrixXcd hk = spec.slice(k);
            hk = (0.5 * (hk + hk.adjoint())).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hk);
            const Eigen::VectorXd vals = eig.eigenvalues().reverse();
            Eigen::MatrixXcd vecs = eig.eigenvectors().rowwise().reverse().eval();
            normalize_phases(vecs);
            out[k] = {vals, std::move(vecs)};
        }
    }
    for (int k = h; k < n3; ++k) {
        out[k].values = out[n3 - k].values;
        out[k].vectors = out[n3 - k].vectors.conjugate();
    }
    return out;
}

std::vector<Eigen::VectorXd> slice_singular_values(const Tensor3& a) {
    const int n3 = a.n3();
    const SpectralTensor spec = fft3(a);
    std::vector<Eigen::VectorXd> out(n3);
    const int h = half_count(n3);
    const int nt = parallel::thread_count();
#pragma omp parallel for num_threads(nt) if (nt > 1 && h > 1) schedule(static)
    for (int k = 0; k < h; ++k) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(spec.slice(k));
        out[k] = svd.singularValues();
    }
    for (int k = h; k < n3; ++k) out[k] = out[n3 - k];
    return out;
}

TSvdFactors t_svd(const Tensor3& a) {
    const int n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    const SpectralTensor spec = fft3(a);
    SpectralTensor us(n1, n1, n3), ss(n1, n2, n3), vs(n2, n2, n3);
    const int h = half_count(n3);
    const int nt = parallel::thread_count();
#pragma omp parallel for num_threads(nt) if (nt > 1 && h > 1) schedule(static)
    for (int k = 0; k < h; ++k) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(spec.slice(k),
                                               Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::MatrixXcd u = svd.matrixU();
        Eigen::MatrixXcd v = svd.matrixV();
        const Eigen::VectorXd sv = svd.singularValues();
        // Phase gauge: rotate each singular pair so U's dominant component is
        // real positive; the extra columns of the larger factor get the same
        // treatment on their own.
        const int p = static_cast<int>(sv.size());
        for (int j = 0; j < p; ++j) {
            Eigen::Index imax;
            u.col(j).cwiseAbs().maxCoeff(&imax);
            const double mag = std::abs(u(imax, j));
            if (mag > 0) {
                const std::complex<double> ph = std::conj(u(imax, j) / mag);
                u.col(j) *= ph;
                v.col(j) *= ph;
            }
        }
        if (u.cols() > p) {
            Eigen::MatrixXcd tail = u.rightCols(u.cols() - p);
            normalize_phases(tail);
            u.rightCols(u.cols() - p) = tail;
        }
        if (v.cols() > p) {
            Eigen::MatrixXcd tail = v.rightCols(v.cols() - p);
            normalize_phases(tail);
            v.rightCols(v.cols() - p) = tail;
        }
        us.slice(k) = u;
        vs.slice(k) = v;
        ss.slice(k).setZero();
        for (int j = 0; j < p; ++j) ss.slice(k)(j, j) = sv(j);
    }
    for (int k = h; k < n3; ++k) {
        us.slice(k) = us.slice(n3 - k).conjugate();
        vs.slice(k) = vs.slice(n3 - k).conjugate();
        ss.slice(k) = ss.slice(n3 - k);
    }
    return {ifft3(us), ifft3(ss), ifft3(vs)};
}

TEigFactors t_eig(const Tensor3& a, double sym_tol) {
    if (a.n1() != a.n2()) throw NotSymmetric("t_eig requires a square tensor");
    if (fro_norm(a - conj_transpose(a)) > sym_tol * std::max(1.0, fro_norm(a))) {
        throw NotSymmetric("t_eig input exceeds symmetry tolerance");
    }
    const int n = a.n1(), n3 = a.n3();
    auto eigs = hermitian_slice_eig(a);
    SpectralTensor us(n, n, n3), ss(n, n, n3);
    for (int k = 0; k < n3; ++k) {
        us.slice(k) = eigs[k].vectors;
        ss.slice(k).setZero();
        for (int i = 0; i < n; ++i) ss.slice(k)(i, i) = eigs[k].values(i);
    }
    TEigFactors out;
    out.u = ifft3(us);
    out.s = ifft3(ss);
    out.eigenvalues.reserve(n3);
    for (int k = 0; k < n3; ++k) out.eigenvalues.push_back(eigs[k].values);
    return out;
}

int tubal_rank(const Tensor3& a, double tol) {
    const auto sv = slice_singular_values(a);
    double sigma1 = 0.0;
    for (const auto& s : sv)
        if (s.size() > 0) sigma1 = std::max(sigma1, s(0));
    if (sigma1 <= 0.0) return 0;
    const int p = static_cast<int>(sv[0].size());
    int rank = 0;
    for (int i = 0; i < p; ++i) {
        double tube_max = 0.0;
        for (const auto& s : sv) tube_max = std::max(tube_max, s(i));
        if (tube_max > tol * sigma1) ++rank;
    }
    return rank;
}

namespace {

// Shared by psd_factor and project_psd_rank_r: build F from the top-r
// eigenpairs with eigenvalues clamped at zero before the square root.
Tensor3 factor_from_eigs(const std::vector<SliceEig>& eigs, int n, int n3, int r) {
    SpectralTensor fs(n, r, n3);
    for (int k = 0; k < n3; ++k) {
        for (int j = 0; j < r; ++j) {
            const double lam = std::max(eigs[k].values(j), 0.0);
            fs.slice(k).col(j) = eigs[k].vectors.col(j) * std::sqrt(lam);
        }
    }
    return ifft3(fs);
}

}  // namespace

Tensor3 psd_factor(const Tensor3& x, int r, double tol, double sym_tol) {
    if (x.n1() != x.n2()) throw NotSymmetric("psd_factor requires a square tensor");
    if (r < 1 || r > x.n1()) throw InvalidArgument("psd_factor: r out of range");
    if (fro_norm(x - conj_transpose(x)) > sym_tol * std::max(1.0, fro_norm(x))) {
        throw NotSymmetric("psd_factor input exceeds symmetry tolerance");
    }
    const auto eigs = hermitian_slice_eig(x);
    double sigma1 = 0.0, lam_min = 0.0;
    for (const auto& e : eigs) {
        if (e.values.size() == 0) continue;
        sigma1 = std::max(sigma1, e.values.cwiseAbs().maxCoeff());
        lam_min = std::min(lam_min, e.values.minCoeff());
    }
    if (lam_min < -tol * sigma1) throw NotPsd("negative T-eigenvalue beyond tolerance");
    Tensor3 f = factor_from_eigs(eigs, x.n1(), x.n3(), r);
    const double resid = fro_norm(t_product(f, conj_transpose(f)) - x);
    if (resid > 1e-8 * std::max(1.0, fro_norm(x))) {
        throw RankTooSmall("psd_factor residual exceeds tolerance; tubal rank above r");
    }
    return f;
}

Tensor3 project_psd_rank_r(const Tensor3& a, int r, double sym_tol) {
    if (a.n1() != a.n2()) throw NotSymmetric("project_psd_rank_r requires a square tensor");
    if (r < 1 || r > a.n1()) throw InvalidArgument("project_psd_rank_r: r out of range");
    if (fro_norm(a - conj_transpose(a)) > sym_tol * std::max(1.0, fro_norm(a))) {
        throw NotSymmetric("project_psd_rank_r input exceeds symmetry tolerance");
    }
    return factor_from_eigs(hermitian_slice_eig(a), a.n1(), a.n3(), r);
}

SpectrumStats condition_number(const Tensor3& x, int r_star, double tol) {
    if (fro_norm(x) == 0.0) throw ZeroTensor("condition_number of the zero tensor");
    const auto sv = slice_singular_values(x);
    double sigma1 = 0.0;
    for (const auto& s : sv)
        if (s.size() > 0) sigma1 = std::max(sigma1, s(0));
    if (sigma1 <= 0.0) throw ZeroTensor("condition_number: no nonzero singular values");
    const double thresh = tol * sigma1;
    double sigma_min = sigma1;
    for (const auto& s : sv) {
        const int limit = (r_star > 0) ? std::min<int>(r_star, static_cast<int>(s.size()))
                                       : static_cast<int>(s.size());
        for (int i = limit - 1; i >= 0; --i) {
            if (s(i) > thresh) {
                sigma_min = std::min(sigma_min, s(i));
                break;
            }
        }
    }
    SpectrumStats out;
    out.sigma1 = sigma1;
    out.sigma_min = sigma_min;
    out.kappa = sigma1 / sigma_min;
    out.rank_tol = tol;
    return out;
}

bool is_tpsd(const Tensor3& x, double tol, double sym_tol) {
    if (x.n1() != x.n2()) throw NotSymmetric("is_tpsd requires a square tensor");
    if (fro_norm(x - conj_transpose(x)) > sym_tol * std::max(1.0, fro_norm(x))) {
        throw NotSymmetric("is_tpsd input exceeds symmetry tolerance");
    }
    const auto eigs = hermitian_slice_eig(x);
    double sigma1 = 0.0, lam_min = 0.0;
    for (const auto& e : eigs) {
        if (e.values.size() == 0) continue;
        sigma1 = std::max(sigma1, e.values.cwiseAbs().maxCoeff());
        lam_min = std::min(lam_min, e.values.minCoeff());
    }
    return lam_min >= -tol * sigma1;
}

}  // namespace tubal
