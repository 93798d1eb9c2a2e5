#include "tubal/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tubal/parallel.hpp"
#include "tubal/rng.hpp"

namespace tubal {

namespace {

inline int tid() {
#ifdef _OPENMP
    return omp_get_thread_num();
#else
    return 0;
#endif
}

constexpr double kSqrtHalf = 0.70710678118654752440;

// Shared dot/axpy kernels. Streamed and dense paths must produce identical
// bits, so both go through the same non-inlined loops. The dot uses eight
// independent accumulator lanes combined in a fixed tree: that keeps the
// reduction order deterministic while letting the compiler vectorize it.
template <typename Scalar>
double lane_dot(const Scalar* a, const double* b, std::size_t nelem) {
    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t e = 0;
    for (; e + 8 <= nelem; e += 8) {
        for (int l = 0; l < 8; ++l) acc[l] += static_cast<double>(a[e + l]) * b[e + l];
    }
    double tail = 0.0;
    for (; e < nelem; ++e) tail += static_cast<double>(a[e]) * b[e];
    return (((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))) +
           tail;
}

__attribute__((noinline)) double dot_kernel(const double* a, const double* b, std::size_t nelem) {
    return lane_dot(a, b, nelem);
}

__attribute__((noinline)) void axpy_kernel(double c, const double* a, double* acc,
                                           std::size_t nelem) {
    for (std::size_t e = 0; e < nelem; ++e) acc[e] += c * a[e];
}

}  // namespace

MeasurementEnsemble MeasurementEnsemble::make(int n, int n3, long m, std::uint64_t seed,
                                              MeasureMode mode, Materialization mat, int chunk,
                                              double entry_std, std::size_t dense_budget) {
    if (n < 1 || n3 < 1 || m < 1) throw InvalidArgument("make_ensemble: n, n3, m must be >= 1");
    if (chunk < 1) throw InvalidArgument("make_ensemble: chunk must be >= 1");
    MeasurementEnsemble e;
    e.n_ = n;
    e.n3_ = n3;
    e.m_ = m;
    e.seed_ = seed;
    e.mode_ = mode;
    e.mat_ = mat;
    e.chunk_ = chunk;
    e.entry_std_ = entry_std > 0 ? entry_std : 1.0 / std::sqrt(static_cast<double>(m));
    if (mat == Materialization::dense) {
        const std::size_t bytes = static_cast<std::size_t>(m) * e.entry_count() * sizeof(double);
        if (bytes > dense_budget) {
            std::ostringstream os;
            os << "dense ensemble needs " << bytes << " bytes, budget " << dense_budget;
            throw OutOfBudget(os.str());
        }
        e.dense_.resize(m, static_cast<Eigen::Index>(e.entry_count()));
        const int nt = parallel::thread_count();
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
        for (long i = 0; i < m; ++i) e.generate_into(i, e.dense_.row(i).data());
    }
    return e;
}

MeasurementEnsemble make_ensemble(int n, int n3, long m, std::uint64_t seed, MeasureMode mode,
                                  Materialization mat, int chunk, double entry_std,
                                  std::size_t dense_budget) {
    return MeasurementEnsemble::make(n, n3, m, seed, mode, mat, chunk, entry_std, dense_budget);
}

void MeasurementEnsemble::generate_into(long i, double* dst) const {
    const std::size_t nelem = entry_count();
    rng::GaussianStream g(seed_, rng::ensemble_stream(static_cast<std::uint64_t>(i)));
    g.fill(0, dst, nelem);
    for (std::size_t e = 0; e < nelem; ++e) dst[e] *= entry_std_;
    if (mode_ == MeasureMode::symmetrized) {
        // (A + A^*) / sqrt(2): entry (i,j,k) pairs with (j,i,(n3-k) mod n3).
        const int nn = n_;
        const std::size_t ss = static_cast<std::size_t>(nn) * nn;
        for (int k = 0; k < n3_; ++k) {
            const int k2 = (n3_ - k) % n3_;
            if (k > k2) continue;
            double* a = dst + static_cast<std::size_t>(k) * ss;
            double* b = dst + static_cast<std::size_t>(k2) * ss;
            for (int r = 0; r < nn; ++r) {
                const int c0 = (k == k2) ? r : 0;
                for (int c = c0; c < nn; ++c) {
                    const std::size_t e1 = static_cast<std::size_t>(r) * nn + c;
                    const std::size_t e2 = static_cast<std::size_t>(c) * nn + r;
                    const double v = (a[e1] + b[e2]) * kSqrtHalf;
                    a[e1] = v;
                    b[e2] = v;
                }
            }
        }
    }
}

Tensor3 MeasurementEnsemble::tensor(long i) const {
    if (i < 0 || i >= m_) throw InvalidArgument("measurement index out of range");
    Tensor3 t(n_, n_, n3_);
    if (mat_ == Materialization::dense) {
        std::copy(dense_.row(i).data(), dense_.row(i).data() + entry_count(), t.data());
    } else {
        generate_into(i, t.data());
    }
    return t;
}

Eigen::VectorXd MeasurementEnsemble::measure(const Tensor3& x) const {
    if (x.n1() != n_ || x.n2() != n_ || x.n3() != n3_) {
        throw ShapeMismatch("measure: tensor shape does not match ensemble dims");
    }
    const std::size_t nelem = entry_count();
    Eigen::VectorXd y(m_);
    const int nt = parallel::thread_count();
    if (mat_ == Materialization::dense) {
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
        for (long i = 0; i < m_; ++i) y(i) = dot_kernel(dense_.row(i).data(), x.data(), nelem);
        return y;
    }
    std::vector<std::vector<double>> scratch(nt, std::vector<double>(nelem));
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(dynamic, 8)
    for (long i = 0; i < m_; ++i) {
        double* buf = scratch[tid()].data();
        generate_into(i, buf);
        y(i) = dot_kernel(buf, x.data(), nelem);
    }
    return y;
}

Tensor3 MeasurementEnsemble::adjoint(const Eigen::VectorXd& y) const {
    if (y.size() != m_) throw ShapeMismatch("adjoint: vector length does not match m");
    const std::size_t nelem = entry_count();
    const long nchunks = (m_ + chunk_ - 1) / chunk_;
    const int nt = parallel::thread_count();

    Tensor3 out(n_, n_, n3_);
    std::vector<std::vector<double>> partials(nt, std::vector<double>(nelem));
    std::vector<std::vector<double>> scratch(nt, std::vector<double>(nelem));

    // Rounds of nt chunks each: partial sums are computed in parallel but
    // always folded into the accumulator in chunk-index order.
    for (long base = 0; base < nchunks; base += nt) {
        const int round = static_cast<int>(std::min<long>(nt, nchunks - base));
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
        for (int c = 0; c < round; ++c) {
            const long chunk_idx = base + c;
            const long lo = chunk_idx * chunk_;
            const long hi = std::min<long>(lo + chunk_, m_);
            double* part = partials[c].data();
            std::fill(part, part + nelem, 0.0);
            if (mat_ == Materialization::dense) {
                for (long i = lo; i < hi; ++i) axpy_kernel(y(i), dense_.row(i).data(), part, nelem);
            } else {
                double* buf = scratch[c].data();
                for (long i = lo; i < hi; ++i) {
                    generate_into(i, buf);
                    axpy_kernel(y(i), buf, part, nelem);
                }
            }
        }
        for (int c = 0; c < round; ++c) {
            const double* part = partials[c].data();
            double* acc = out.data();
            for (std::size_t e = 0; e < nelem; ++e) acc[e] += part[e];
        }
    }
    return out;
}

ProblemInstance gen_problem(int n, int n3, int r_star, long m, double v, std::uint64_t seed,
                            MeasureMode mode, Materialization mat) {
    if (r_star < 1 || r_star > n) throw InvalidArgument("gen_problem: need 1 <= r_star <= n");
    if (m < 1) throw InvalidArgument("gen_problem: need m >= 1");
    if (v < 0) throw InvalidArgument("gen_problem: noise std must be >= 0");

    ProblemInstance p;
    p.r_star = r_star;
    p.seed = seed;
    p.noise_std = v;
    p.ensemble = make_ensemble(n, n3, m, rng::mix(seed, 0xE17), mode, mat);

    Tensor3 f(n, r_star, n3);
    rng::GaussianStream fg(rng::mix(seed, 0xFAC), rng::kFactorStream);
    fg.fill(0, f.data(), f.size());
    p.f_star = f;
    p.x_star = sym(t_product(f, conj_transpose(f)));
    p.spectrum = condition_number(p.x_star, r_star);

    p.y = p.ensemble.measure(p.x_star);
    if (v > 0) {
        rng::GaussianStream ng(rng::mix(seed, 0x501), rng::kNoiseStream);
        std::vector<double> s(static_cast<std::size_t>(m));
        ng.fill(0, s.data(), s.size());
        for (long i = 0; i < m; ++i) p.y(i) += v * s[static_cast<std::size_t>(i)];
    }
    return p;
}

RipEstimate empirical_rip(int n, int n3, int r, long m, int trials, std::uint64_t seed,
                          MeasureMode mode) {
    if (trials < 1) throw InvalidArgument("empirical_rip: trials must be >= 1");
    if (r < 1 || r > n) throw InvalidArgument("empirical_rip: need 1 <= r <= n");
    const MeasurementEnsemble ens = make_ensemble(n, n3, m, rng::mix(seed, 0xE17), mode);

    RipEstimate est;
    est.r = r;
    est.trials = trials;
    est.ratio_samples.reserve(trials);
    for (int t = 0; t < trials; ++t) {
        Tensor3 f(n, r, n3), g(n, r, n3);
        rng::GaussianStream fs(rng::mix(seed, 0xF1), rng::trial_stream(4, t));
        rng::GaussianStream gs(rng::mix(seed, 0xF2), rng::trial_stream(5, t));
        fs.fill(0, f.data(), f.size());
        gs.fill(0, g.data(), g.size());
        Tensor3 x = t_product(f, conj_transpose(g));
        x *= 1.0 / fro_norm(x);
        const double ratio = ens.measure(x).squaredNorm();
        est.ratio_samples.push_back(ratio);
        est.delta_hat = std::max(est.delta_hat, std::abs(ratio - 1.0));
    }
    return est;
}

SymPackLayout SymPackLayout::make(int n, int n3) {
    SymPackLayout lay;
    lay.n = n;
    lay.n3 = n3;
    const std::size_t ss = static_cast<std::size_t>(n) * n;
    auto lin = [&](int i, int j, int k) {
        return static_cast<std::int32_t>(static_cast<std::size_t>(k) * ss +
                                         static_cast<std::size_t>(i) * n + j);
    };
    const double rt2 = std::sqrt(2.0);
    for (int k = 0; k < n3; ++k) {
        const int k2 = (n3 - k) % n3;
        if (k > k2) continue;
        if (k == k2) {
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) {
                    lay.rep.push_back(lin(i, j, k));
                    lay.mirror.push_back(lin(j, i, k));
                    lay.weight.push_back(i == j ? 1.0 : rt2);
                }
            }
        } else {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    lay.rep.push_back(lin(i, j, k));
                    lay.mirror.push_back(lin(j, i, k2));
                    lay.weight.push_back(rt2);
                }
            }
        }
    }
    return lay;
}

Eigen::VectorXd SymPackLayout::pack(const Tensor3& x) const {
    if (x.n1() != n || x.n2() != n || x.n3() != n3) throw ShapeMismatch("pack: wrong shape");
    Eigen::VectorXd p(static_cast<Eigen::Index>(len()));
    const double* d = x.data();
    for (std::size_t e = 0; e < len(); ++e) p(static_cast<Eigen::Index>(e)) = weight[e] * d[rep[e]];
    return p;
}

Tensor3 SymPackLayout::unpack(const Eigen::VectorXd& p) const {
    if (p.size() != static_cast<Eigen::Index>(len())) throw ShapeMismatch("unpack: wrong length");
    Tensor3 x(n, n, n3);
    double* d = x.data();
    for (std::size_t e = 0; e < len(); ++e) {
        const double v = p(static_cast<Eigen::Index>(e)) / weight[e];
        d[rep[e]] = v;
        d[mirror[e]] = v;
    }
    return x;
}

std::optional<PackedSymOperator> PackedSymOperator::build(const MeasurementEnsemble& ens,
                                                          std::size_t budget_bytes,
                                                          bool prefer_f32) {
    PackedSymOperator op;
    op.layout_ = SymPackLayout::make(ens.n(), ens.n3());
    op.m_ = ens.m();
    const std::size_t total = static_cast<std::size_t>(op.m_) * op.layout_.len();
    if (!prefer_f32 && total * sizeof(double) <= budget_bytes) {
        op.use32_ = false;
        op.rows64_.resize(total);
    } else if (total * sizeof(float) <= budget_bytes) {
        op.use32_ = true;
        op.rows32_.resize(total);
    } else {
        return std::nullopt;
    }

    const std::size_t nelem = ens.entry_count();
    const std::size_t len = op.layout_.len();
    const int nt = parallel::thread_count();
    std::vector<std::vector<double>> scratch(nt, std::vector<double>(nelem));
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(dynamic, 8)
    for (long i = 0; i < op.m_; ++i) {
        double* buf = scratch[tid()].data();
        ens.generate_into(i, buf);
        const std::size_t off = static_cast<std::size_t>(i) * len;
        for (std::size_t e = 0; e < len; ++e) {
            const double v =
                op.layout_.weight[e] * 0.5 * (buf[op.layout_.rep[e]] + buf[op.layout_.mirror[e]]);
            if (op.use32_)
                op.rows32_[off + e] = static_cast<float>(v);
            else
                op.rows64_[off + e] = v;
        }
    }
    return op;
}

namespace {

template <typename Scalar>
double packed_dot(const Scalar* row, const double* x, std::size_t len) {
    return lane_dot(row, x, len);
}

template <typename Scalar>
void packed_axpy(double c, const Scalar* row, double* acc, std::size_t len) {
    for (std::size_t e = 0; e < len; ++e) acc[e] += c * static_cast<double>(row[e]);
}

}  // namespace

Eigen::VectorXd PackedSymOperator::measure(const Eigen::VectorXd& x_packed) const {
    const std::size_t len = layout_.len();
    if (x_packed.size() != static_cast<Eigen::Index>(len)) {
        throw ShapeMismatch("PackedSymOperator::measure: wrong packed length");
    }
    Eigen::VectorXd y(m_);
    const double* x = x_packed.data();
    const int nt = parallel::thread_count();
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
    for (long i = 0; i < m_; ++i) {
        const std::size_t off = static_cast<std::size_t>(i) * len;
        y(i) = use32_ ? packed_dot(rows32_.data() + off, x, len)
                      : packed_dot(rows64_.data() + off, x, len);
    }
    return y;
}

Eigen::VectorXd PackedSymOperator::adjoint(const Eigen::VectorXd& w) const {
    if (w.size() != m_) throw ShapeMismatch("PackedSymOperator::adjoint: wrong length");
    const std::size_t len = layout_.len();
    const long chunk = kDefaultChunk;
    const long nchunks = (m_ + chunk - 1) / chunk;
    const int nt = parallel::thread_count();

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(len));
    std::vector<std::vector<double>> partials(nt, std::vector<double>(len));
    for (long base = 0; base < nchunks; base += nt) {
        const int round = static_cast<int>(std::min<long>(nt, nchunks - base));
#pragma omp parallel for num_threads(nt) if (nt > 1) schedule(static)
        for (int c = 0; c < round; ++c) {
            const long lo = (base + c) * chunk;
            const long hi = std::min<long>(lo + chunk, m_);
            double* part = partials[c].data();
            std::fill(part, part + len, 0.0);
            for (long i = lo; i < hi; ++i) {
                const std::size_t off = static_cast<std::size_t>(i) * len;
                if (use32_)
                    packed_axpy(w(i), rows32_.data() + off, part, len);
                else
                    packed_axpy(w(i), rows64_.data() + off, part, len);
            }
        }
        for (int c = 0; c < round; ++c) {
            const double* part = partials[c].data();
            for (std::size_t e = 0; e < len; ++e) acc(static_cast<Eigen::Index>(e)) += part[e];
        }
    }
    return acc;
}

std::size_t default_pack_budget_bytes() {
    const char* s = std::getenv("TUBAL_FGD_PACK_BUDGET_MB");
    if (s) {
        const long mb = std::atol(s);
        if (mb > 0) return static_cast<std::size_t>(mb) << 20;
    }
    return 3000ull << 20;  // 3000 MiB
}

}  // namespace tubal
