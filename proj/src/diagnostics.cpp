#include "tubal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tubal/decomposition.hpp"

namespace tubal {

namespace {

double max_abs_eig(const Eigen::MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h, Eigen::EigenvaluesOnly);
    return std::max(std::abs(eig.eigenvalues()(0)),
                    std::abs(eig.eigenvalues()(eig.eigenvalues().size() - 1)));
}

double max_eig_nonneg(const Eigen::MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h, Eigen::EigenvaluesOnly);
    const double v = eig.eigenvalues()(eig.eigenvalues().size() - 1);
    return v > 0 ? v : 0.0;
}

struct LinFit {
    double slope = 0.0, intercept = 0.0;
};

LinFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double d = n * sxx - sx * sx;
    LinFit f;
    f.slope = (n * sxy - sx * sy) / d;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

double log_space_r2(const std::vector<double>& t, const std::vector<double>& log_e,
                    const std::vector<double>& pred_log) {
    double mean = 0;
    for (double v : log_e) mean += v;
    mean /= static_cast<double>(log_e.size());
    double ss_tot = 0, ss_res = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        ss_tot += (log_e[i] - mean) * (log_e[i] - mean);
        ss_res += (log_e[i] - pred_log[i]) * (log_e[i] - pred_log[i]);
    }
    if (ss_tot <= 0) return ss_res <= 0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

}  // namespace

SubspaceBasis subspace_basis(const Tensor3& x_star, int r_star, double tol) {
    const int n = x_star.n1(), n3 = x_star.n3();
    if (r_star < 1 || r_star >= n) throw InvalidArgument("subspace_basis: need 1 <= r_star < n");
    const auto eigs = hermitian_slice_eig(x_star);
    double sigma1 = 0.0;
    for (const auto& e : eigs) sigma1 = std::max(sigma1, e.values.cwiseAbs().maxCoeff());
    for (const auto& e : eigs) {
        if (std::abs(e.values(r_star)) > tol * sigma1) {
            std::ostringstream os;
            os << "eigenvalue " << r_star + 1 << " is " << e.values(r_star)
               << ", above tolerance " << tol * sigma1;
            throw RankMismatch(os.str());
        }
    }
    SpectralTensor us(n, r_star, n3), vs(n, n - r_star, n3), ds(r_star, r_star, n3);
    for (int k = 0; k < n3; ++k) {
        us.slice(k) = eigs[k].vectors.leftCols(r_star);
        vs.slice(k) = eigs[k].vectors.rightCols(n - r_star);
        ds.slice(k).setZero();
        for (int i = 0; i < r_star; ++i) ds.slice(k)(i, i) = eigs[k].values(i);
    }
    SubspaceBasis b;
    b.u = ifft3(us);
    b.v = ifft3(vs);
    b.d_star = ifft3(ds);
    b.r_star = r_star;
    return b;
}

std::pair<Tensor3, Tensor3> subspace_split(const Tensor3& f, const SubspaceBasis& b) {
    if (f.n1() != b.u.n1() || f.n3() != b.u.n3()) {
        throw ShapeMismatch("subspace_split: factor shape does not match basis");
    }
    return {t_product(conj_transpose(b.u), f), t_product(conj_transpose(b.v), f)};
}

ErrorTerms error_terms(const Tensor3& f, const SubspaceBasis& b, const Tensor3& x_star) {
    if (f.n1() != x_star.n1() || f.n3() != x_star.n3()) {
        throw ShapeMismatch("error_terms: shapes disagree");
    }
    const SpectralTensor fs = fft3(f);
    const SpectralTensor us = fft3(b.u);
    const SpectralTensor vs = fft3(b.v);
    const SpectralTensor ds = fft3(b.d_star);
    const SpectralTensor xs = fft3(x_star);

    ErrorTerms et;
    for (int k = 0; k < f.n3(); ++k) {
        const Eigen::MatrixXcd s = us.slice(k).adjoint() * fs.slice(k);
        const Eigen::MatrixXcd t = vs.slice(k).adjoint() * fs.slice(k);
        et.d_ss = std::max(et.d_ss, max_abs_eig(ds.slice(k) - s * s.adjoint()));
        const Eigen::MatrixXcd st = s * t.adjoint();
        et.st = std::max(et.st, std::sqrt(max_eig_nonneg(st * st.adjoint())));
        et.tt = std::max(et.tt, max_eig_nonneg(t.adjoint() * t));
        et.delta_norm = std::max(
            et.delta_norm, max_abs_eig(fs.slice(k) * fs.slice(k).adjoint() - xs.slice(k)));
    }
    et.e_t = std::max({et.d_ss, et.st, et.tt});
    // Deterministic sandwich; a violation beyond roundoff slack means the
    // split algebra is wrong, so fail loudly.
    constexpr double slack = 1e-8;
    if (et.e_t > et.delta_norm + slack || et.delta_norm > 4.0 * et.e_t + slack) {
        std::ostringstream os;
        os << "E_t=" << et.e_t << " delta=" << et.delta_norm;
        throw SandwichViolated(os.str());
    }
    return et;
}

std::pair<Tensor3, Tensor3> tilde_update(const Tensor3& s, const Tensor3& t,
                                         const SubspaceBasis& b, double eta) {
    if (s.n2() != t.n2() || s.n3() != t.n3()) throw ShapeMismatch("tilde_update: S/T disagree");
    const Tensor3 st_ct = conj_transpose(s);
    const Tensor3 tt_ct = conj_transpose(t);
    const Tensor3 ss = t_product(s, st_ct);   // r* x r*
    const Tensor3 tt = t_product(t, tt_ct);   // (n-r*) x (n-r*)
    Tensor3 s_new = s - eta * (t_product(ss, s) + t_product(t_product(s, tt_ct), t) -
                               t_product(b.d_star, s));
    Tensor3 t_new = t - eta * (t_product(tt, t) + t_product(t_product(t, st_ct), s));
    return {std::move(s_new), std::move(t_new)};
}

Tensor3 sample_deviation(const Tensor3& f, const ProblemInstance& p) {
    const Tensor3 x = t_product(f, conj_transpose(f));
    const Tensor3 delta = x - p.x_star;
    const Eigen::VectorXd resid = p.ensemble.measure(x) - p.y;
    return p.ensemble.adjoint(resid) - delta;
}

RateFit rate_fit(const std::vector<double>& errors) {
    std::vector<double> e;
    e.reserve(errors.size());
    double emax = 0.0;
    for (double v : errors) emax = std::max(emax, v);
    for (double v : errors) {
        if (!(v > 0) || v < 1e-13 * emax) break;  // stop at the numerical floor
        e.push_back(v);
    }
    if (e.size() < 20) throw InsufficientData("rate_fit: need >= 20 positive points");

    const std::size_t lo = e.size() / 2;
    std::vector<double> t, log_e, inv_e;
    for (std::size_t i = lo; i < e.size(); ++i) {
        t.push_back(static_cast<double>(i));
        log_e.push_back(std::log(e[i]));
        inv_e.push_back(1.0 / e[i]);
    }

    const LinFit lin = least_squares(t, log_e);
    std::vector<double> pred_lin(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) pred_lin[i] = lin.intercept + lin.slope * t[i];
    const double r2_lin = log_space_r2(t, log_e, pred_lin);

    // 1/e = (t + t0)/C is linear in t for the sublinear model.
    const LinFit sub = least_squares(t, inv_e);
    double r2_sub = -std::numeric_limits<double>::infinity();
    double c = 0.0, t0 = 0.0;
    if (sub.slope > 0) {
        c = 1.0 / sub.slope;
        t0 = sub.intercept * c;
        std::vector<double> pred_sub(t.size());
        bool ok = true;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double denom = sub.slope * t[i] + sub.intercept;
            if (denom <= 0) {
                ok = false;
                break;
            }
            pred_sub[i] = -std::log(denom);
        }
        if (ok) r2_sub = log_space_r2(t, log_e, pred_sub);
    }

    RateFit fit;
    fit.slope = lin.slope;
    fit.c = c;
    fit.t0 = t0;
    if (r2_sub > r2_lin) {
        fit.kind = RateFit::Kind::sublinear;
        fit.r2 = r2_sub;
    } else {
        fit.kind = RateFit::Kind::linear;
        fit.r2 = r2_lin;
    }
    return fit;
}

}  // namespace tubal
