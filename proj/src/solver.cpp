#include "tubal/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "tubal/decomposition.hpp"

namespace tubal {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// X = F * F^* computed from the cached spectrum of F.
Tensor3 gram_from_spec(const SpectralTensor& fs) {
    return ifft3(spec_mul(fs, SpecOp::none, fs, SpecOp::adjoint));
}

}  // namespace

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::rel_change_tol: return "rel_change_tol";
        case StopReason::rel_error_tol: return "rel_error_tol";
        case StopReason::max_iters: return "max_iters";
        case StopReason::init_only: return "init_only";
    }
    return "unknown";
}

Tensor3 spectral_init(const ProblemInstance& p, int r) {
    if (r < 1 || r > p.ensemble.n()) throw InvalidArgument("spectral_init: need 1 <= r <= n");
    return project_psd_rank_r(sym(p.ensemble.adjoint(p.y)), r);
}

Tensor3 fgd_step(const Tensor3& f, const ProblemInstance& p, double eta, bool raw_eq6) {
    const Tensor3 x = t_product(f, conj_transpose(f));
    const Eigen::VectorXd resid = p.ensemble.measure(x) - p.y;
    Tensor3 g = p.ensemble.adjoint(resid);
    if (!raw_eq6) g = sym(g);
    Tensor3 next = f - eta * t_product(g, f);
    const double nrm = fro_norm(next);
    if (!std::isfinite(nrm) || nrm > 1e8 * std::max(1.0, fro_norm(f))) {
        throw Diverged("fgd_step produced an exploding factor; reduce eta");
    }
    return next;
}

Tensor3 population_step(const Tensor3& f, const Tensor3& x_star, double eta) {
    const Tensor3 x = t_product(f, conj_transpose(f));
    return f - eta * t_product(x - x_star, f);
}

StopDecision stop_check(const ConvergenceTrace& trace, const FgdConfig& cfg) {
    StopDecision d;
    if (trace.points.empty()) return d;
    const TracePoint& last = trace.points.back();
    switch (cfg.stop) {
        case StopRule::iters_only:
            break;
        case StopRule::rel_change:
            if (last.t >= 1 && std::isfinite(last.rel_change) && last.rel_change <= cfg.stop_tol) {
                d.stop = true;
                d.reason = StopReason::rel_change_tol;
            }
            break;
        case StopRule::rel_error:
            if (last.rel_error <= cfg.stop_tol) {
                d.stop = true;
                d.reason = StopReason::rel_error_tol;
            }
            break;
    }
    return d;
}

SolveResult fgd_solve(const ProblemInstance& p, const FgdConfig& cfg) {
    const int n = p.ensemble.n();
    if (cfg.r < 1 || cfg.r > n) throw InvalidArgument("fgd_solve: need 1 <= r <= n");
    if (cfg.max_iters < 0) throw InvalidArgument("fgd_solve: max_iters must be >= 0");
    if (cfg.trace_every < 1) throw InvalidArgument("fgd_solve: trace_every must be >= 1");
    if (cfg.eta_mode == EtaMode::fixed && !(cfg.eta > 0)) {
        throw InvalidArgument("fgd_solve: eta must be positive");
    }
    if (cfg.eta_mode == EtaMode::auto_rho && !(cfg.rho >= 10)) {
        throw InvalidArgument("fgd_solve: auto step size requires rho >= 10");
    }

    const auto t_start = Clock::now();

    // The packed cache halves memory traffic in the inner loop; it represents
    // sym(A_i), which is exact for everything the solver needs. The raw-update
    // toggle with plain measurements genuinely needs the unsymmetrized
    // adjoint, so it streams instead.
    const bool can_pack =
        !cfg.raw_eq6 || p.ensemble.mode() == MeasureMode::symmetrized;
    std::optional<PackedSymOperator> packed;
    if (can_pack && cfg.pack_budget > 0) {
        const std::size_t bytes64 = static_cast<std::size_t>(p.ensemble.m()) *
                                    SymPackLayout::make(n, p.ensemble.n3()).len() * sizeof(double);
        const bool prefer_f32 = p.noise_std > 0 && bytes64 > cfg.pack_f32_threshold;
        packed = PackedSymOperator::build(p.ensemble, cfg.pack_budget, prefer_f32);
    }

    // sym(M*(y)) seeds both the step size estimate and the initial factor.
    Tensor3 a0 = packed ? packed->layout().unpack(packed->adjoint(p.y))
                        : sym(p.ensemble.adjoint(p.y));
    double eta = cfg.eta;
    if (cfg.eta_mode == EtaMode::auto_rho) {
        const double sigma1_hat = spectral_norm(a0);
        if (!(sigma1_hat > 0)) throw NumericalError("auto step size: sym(M*(y)) is zero");
        eta = 1.0 / (cfg.rho * sigma1_hat);
    }

    Tensor3 f = project_psd_rank_r(a0, cfg.r);
    const double f0_norm = std::max(fro_norm(f), std::numeric_limits<double>::min());

    std::optional<SubspaceBasis> basis;
    if (cfg.record_error_terms) basis = subspace_basis(p.x_star, p.r_star);

    const SymPackLayout layout =
        packed ? packed->layout() : SymPackLayout::make(n, p.ensemble.n3());
    const Eigen::VectorXd xstar_packed = layout.pack(p.x_star);
    const double xstar_norm = xstar_packed.norm();

    SpectralTensor fs = fft3(f);
    Eigen::VectorXd xp = layout.pack(gram_from_spec(fs));
    Eigen::VectorXd xp_prev;

    SolveResult res;
    res.eta_used = eta;
    auto record = [&](int t, double rel_err, double obj, double rel_change) {
        TracePoint pt;
        pt.t = t;
        pt.rel_error = rel_err;
        pt.objective = obj;
        pt.rel_change = rel_change;
        pt.wall_time_s = seconds_since(t_start);
        if (basis) pt.error_terms = error_terms(f, *basis, p.x_star);
        res.trace.points.push_back(std::move(pt));
    };

    int t = 0;
    StopReason reason = StopReason::max_iters;
    while (true) {
        const Eigen::VectorXd resid =
            (packed ? packed->measure(xp) : p.ensemble.measure(layout.unpack(xp))) - p.y;
        const double obj = 0.25 * resid.squaredNorm();
        const double rel_err = (xp - xstar_packed).norm() / xstar_norm;
        const double rel_change =
            t == 0 ? std::numeric_limits<double>::quiet_NaN() : (xp - xp_prev).norm() / xp_prev.norm();

        const bool cadence = (t % cfg.trace_every == 0);
        bool recorded = false;
        if (cadence) {
            record(t, rel_err, obj, rel_change);
            recorded = true;
        }

        StopDecision dec;
        if (t >= 1 || cfg.stop == StopRule::rel_error) {
            ConvergenceTrace probe;
            TracePoint pt;
            pt.t = t;
            pt.rel_error = rel_err;
            pt.rel_change = rel_change;
            probe.points.push_back(pt);
            dec = stop_check(probe, cfg);
        }
        if (dec.stop || t >= cfg.max_iters) {
            if (!recorded) record(t, rel_err, obj, rel_change);
            if (dec.stop) {
                reason = dec.reason;
            } else {
                reason = cfg.max_iters == 0 ? StopReason::init_only : StopReason::max_iters;
            }
            break;
        }

        // F <- F - eta * sym(M*(M(FF^*) - y)) * F
        Tensor3 g = packed ? layout.unpack(packed->adjoint(resid))
                           : (cfg.raw_eq6 ? p.ensemble.adjoint(resid)
                                          : sym(p.ensemble.adjoint(resid)));
        const SpectralTensor gs = fft3(g);
        f -= eta * ifft3(spec_mul(gs, SpecOp::none, fs, SpecOp::none));

        const double fn = fro_norm(f);
        if (!std::isfinite(fn) || fn > 1e8 * f0_norm) {
            throw Diverged("fgd_solve: factor norm exploded; reduce eta");
        }
        fs = fft3(f);
        xp_prev = std::move(xp);
        xp = layout.pack(gram_from_spec(fs));
        ++t;
    }

    res.f_final = f;
    res.x_final = layout.unpack(xp);
    res.iterations = t;
    res.stop_reason = reason;
    return res;
}

}  // namespace tubal
