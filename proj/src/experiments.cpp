#include "tubal/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <tuple>

#include "tubal/ref.hpp"
#include "tubal/rng.hpp"
#include "tubal/tensor_io.hpp"

namespace tubal {

namespace fs = std::filesystem;

namespace {

// --- CSV plumbing (RFC 4180) -------------------------------------------------

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path) : f_(path) {
        if (!f_) throw IoError("cannot open for writing: " + path.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) f_ << ',';
            f_ << csv_escape(cells[i]);
        }
        f_ << '\n';
    }

private:
    std::ofstream f_;
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

std::string num(long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream provenance(dir / "config.txt");
    provenance << cfg.serialize();
    return dir;
}

void write_trace_csv(const fs::path& path, const ConvergenceTrace& trace, bool with_terms) {
    CsvWriter w(path);
    std::vector<std::string> head = {"t", "rel_error", "objective", "rel_change", "wall_time_s"};
    if (with_terms) {
        head.insert(head.end(), {"d_ss", "st", "tt", "e_t"});
    }
    w.row(head);
    for (const auto& pt : trace.points) {
        std::vector<std::string> cells = {num(pt.t), num(pt.rel_error), num(pt.objective),
                                          num(pt.rel_change), num(pt.wall_time_s)};
        if (with_terms) {
            if (pt.error_terms) {
                cells.insert(cells.end(), {num(pt.error_terms->d_ss), num(pt.error_terms->st),
                                           num(pt.error_terms->tt), num(pt.error_terms->e_t)});
            } else {
                cells.insert(cells.end(), {"", "", "", ""});
            }
        }
        w.row(cells);
    }
}

std::vector<double> rel_error_series(const ConvergenceTrace& trace) {
    std::vector<double> out;
    out.reserve(trace.points.size());
    for (const auto& pt : trace.points) out.push_back(pt.rel_error);
    return out;
}

// Runs fn(0..count-1), on `workers` threads when asked; every task writes to
// its own slot, so the merged output is identical for any worker count.
void run_indexed(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    const int nw = std::min(workers, count);
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

std::string rate_kind(const RateFit& f) {
    return f.kind == RateFit::Kind::linear ? "linear" : "sublinear";
}

}  // namespace

RunRecord cmd_convergence(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    const int r = cfg.resolved_r();
    const long m = cfg.resolved_m(cfg.r_star);

    RunRecord rec;
    CsvWriter runs(dir / "runs.csv");
    runs.row({"seed", "final_rel_error", "iterations", "wall_time_s", "stop_reason"});

    for (int s = 0; s < cfg.seeds; ++s) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
        const ProblemInstance prob =
            gen_problem(cfg.n, cfg.n3, cfg.r_star, m, cfg.v, seed, cfg.measure_mode());
        const SolveResult sol = fgd_solve(prob, cfg.fgd(r));

        SeedRunRow row;
        row.seed = seed;
        row.final_rel_error = sol.trace.points.back().rel_error;
        row.iterations = sol.iterations;
        row.wall_s = sol.trace.points.back().wall_time_s;
        row.stop_reason = to_string(sol.stop_reason);
        rec.rows.push_back(row);
        runs.row({num(seed), num(row.final_rel_error), num(row.iterations), num(row.wall_s),
                  row.stop_reason});

        std::ostringstream name;
        name << "trace_" << seed << ".csv";
        const fs::path tpath = dir / name.str();
        write_trace_csv(tpath, sol.trace, cfg.error_terms);
        rec.trace_paths.push_back(tpath.string());

        if (s == 0) {
            rec.first_rel_error = rel_error_series(sol.trace);
            for (const auto& pt : sol.trace.points) rec.first_objective.push_back(pt.objective);
            if (sol.trace.points.size() >= 20) rec.rate = rate_fit(rec.first_rel_error);
        }
        if (cfg.save_tensors) {
            std::ostringstream tn;
            tn << "x_final_" << seed << ".t3r";
            write_tensor((dir / tn.str()).string(), sol.x_final);
        }
    }

    double sum = 0, sum2 = 0, wall = 0;
    for (const auto& r2 : rec.rows) {
        sum += r2.final_rel_error;
        sum2 += r2.final_rel_error * r2.final_rel_error;
        wall += r2.wall_s;
    }
    const double k = static_cast<double>(rec.rows.size());
    rec.mean_rel_error = sum / k;
    rec.std_rel_error = k > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / k) / (k - 1))) : 0.0;
    rec.mean_wall_s = wall / k;

    CsvWriter agg(dir / "aggregate.csv");
    agg.row({"mean_rel_error", "std_rel_error", "mean_wall_time_s", "rate_kind", "rate_r2"});
    agg.row({num(rec.mean_rel_error), num(rec.std_rel_error), num(rec.mean_wall_s),
             rate_kind(rec.rate), num(rec.rate.r2)});
    return rec;
}

std::vector<PhaseCell> cmd_phase(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);

    std::vector<long> ms = cfg.m_list;
    if (ms.empty()) {
        const double lo = std::max(1.0, 0.01 * cfg.n * cfg.n * cfg.n3);
        const double hi = static_cast<double>(cfg.n) * cfg.n * cfg.n3;
        for (int j = 0; j < cfg.grid_m; ++j) {
            const double f = cfg.grid_m == 1 ? 1.0 : static_cast<double>(j) / (cfg.grid_m - 1);
            ms.push_back(std::lround(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))));
        }
    }
    std::vector<int> rs = cfg.r_star_list;
    if (rs.empty()) {
        for (int j = 0; j < cfg.grid_r; ++j) {
            const double f = cfg.grid_r == 1 ? 1.0 : static_cast<double>(j) / (cfg.grid_r - 1);
            rs.push_back(static_cast<int>(std::lround(1 + f * (cfg.n - 1))));
        }
    }

    std::vector<PhaseCell> cells;
    for (long mv : ms)
        for (int rv : rs) cells.push_back({mv, rv, 0, false});

    const int reps = cfg.seeds;
    run_indexed(static_cast<int>(cells.size()), cfg.threads, [&](int idx) {
        PhaseCell& cell = cells[static_cast<std::size_t>(idx)];
        int ok = 0;
        for (int rep = 0; rep < reps; ++rep) {
            const std::uint64_t seed = rng::mix(
                rng::mix(rng::mix(cfg.seed, static_cast<std::uint64_t>(cell.m)),
                         static_cast<std::uint64_t>(cell.r_star)),
                static_cast<std::uint64_t>(rep));
            const ProblemInstance prob =
                gen_problem(cfg.n, cfg.n3, cell.r_star, cell.m, 0.0, seed, cfg.measure_mode());
            FgdConfig fc = cfg.fgd(cell.r_star);
            fc.stop = StopRule::rel_error;
            fc.stop_tol = 1e-2;
            fc.max_iters = std::min(cfg.max_iters, 1000);
            fc.trace_every = std::max(cfg.trace_every, 25);
            // The grid deliberately sweeps regimes where the fixed step size
            // blows up; a diverged run is just an unsuccessful recovery.
            try {
                const SolveResult sol = fgd_solve(prob, fc);
                if (sol.trace.points.back().rel_error <= 1e-2) ++ok;
            } catch (const Diverged&) {
            }
        }
        cell.successes = ok;
        cell.recovered = ok >= (reps + 1) / 2;
    });

    CsvWriter w(dir / "phase.csv");
    w.row({"m", "r_star", "successes", "recovered"});
    for (const auto& c : cells) {
        w.row({num(c.m), num(c.r_star), num(c.successes), c.recovered ? "1" : "0"});
    }
    return cells;
}

std::vector<TableCell> cmd_tables(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    double factor = 0.3;
    if (cfg.table == 3) factor = 0.2;
    else if (cfg.table == 4) factor = 0.1;
    else if (cfg.table != 2) throw InvalidArgument("table must be 2, 3 or 4");

    std::vector<TableCell> cells;
    CsvWriter w(dir / "tables.csv");
    w.row({"n", "v", "r_star", "r", "m", "mean_rel_error", "std_rel_error", "mean_wall_time_s",
           "mean_iterations"});

    for (int nv : cfg.n_list) {
        for (double vv : cfg.v_list) {
            TableCell cell;
            cell.n = nv;
            cell.v = vv;
            cell.r_star = static_cast<int>(std::lround(factor * nv));
            cell.r = cell.r_star + 2;
            cell.m = 10L * cell.r_star * cfg.n3 * (2L * nv - cell.r_star);

            double sum = 0, sum2 = 0, wall = 0, iters = 0;
            for (int rep = 0; rep < cfg.seeds; ++rep) {
                const std::uint64_t seed = rng::mix(
                    rng::mix(rng::mix(cfg.seed, static_cast<std::uint64_t>(nv)),
                             static_cast<std::uint64_t>(std::lround(vv * 1000))),
                    static_cast<std::uint64_t>(rep));
                const ProblemInstance prob =
                    gen_problem(nv, cfg.n3, cell.r_star, cell.m, vv, seed, cfg.measure_mode());
                FgdConfig fc = cfg.fgd(cell.r);
                fc.stop = StopRule::rel_change;
                fc.stop_tol = 5e-4;
                fc.trace_every = std::max(cfg.trace_every, 10);
                const SolveResult sol = fgd_solve(prob, fc);
                const double err = sol.trace.points.back().rel_error;
                sum += err;
                sum2 += err * err;
                wall += sol.trace.points.back().wall_time_s;
                iters += sol.iterations;
            }
            const double k = cfg.seeds;
            cell.mean_rel_error = sum / k;
            cell.std_rel_error =
                k > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / k) / (k - 1))) : 0.0;
            cell.mean_wall_s = wall / k;
            cell.mean_iterations = iters / k;
            cells.push_back(cell);
            w.row({num(cell.n), num(cell.v), num(cell.r_star), num(cell.r), num(cell.m),
                   num(cell.mean_rel_error), num(cell.std_rel_error), num(cell.mean_wall_s),
                   num(cell.mean_iterations)});
        }
    }
    return cells;
}

namespace {

// The three block norms plus the Frobenius distance, computed directly from
// the split coordinates of the population iterate.
void split_norms(const Tensor3& s, const Tensor3& t, const SubspaceBasis& b,
                 const Tensor3& x_star, LemmaCurves& out) {
    const SpectralTensor ss = fft3(s);
    const SpectralTensor ts = fft3(t);
    const SpectralTensor ds = fft3(b.d_star);
    double d_ss = 0, st = 0, tt = 0;
    for (int k = 0; k < s.n3(); ++k) {
        const Eigen::MatrixXcd sk = ss.slice(k);
        const Eigen::MatrixXcd tk = ts.slice(k);
        {
            Eigen::MatrixXcd h = ds.slice(k) - sk * sk.adjoint();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h, Eigen::EigenvaluesOnly);
            d_ss = std::max(d_ss, std::max(std::abs(eig.eigenvalues()(0)),
                                           std::abs(eig.eigenvalues()(h.rows() - 1))));
        }
        {
            const Eigen::MatrixXcd m = sk * tk.adjoint();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m * m.adjoint(),
                                                                Eigen::EigenvaluesOnly);
            const double lmax = eig.eigenvalues().maxCoeff();
            st = std::max(st, lmax > 0 ? std::sqrt(lmax) : 0.0);
        }
        {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(tk.adjoint() * tk,
                                                                Eigen::EigenvaluesOnly);
            tt = std::max(tt, std::max(eig.eigenvalues().maxCoeff(), 0.0));
        }
    }
    const Tensor3 f = t_product(b.u, s) + t_product(b.v, t);
    out.d_ss.push_back(d_ss);
    out.st.push_back(st);
    out.tt.push_back(tt);
    out.delta.push_back(fro_norm(t_product(f, conj_transpose(f)) - x_star));
}

void write_curves_csv(const fs::path& path, const LemmaCurves& c) {
    CsvWriter w(path);
    w.row({"t", "d_ss", "st", "tt", "delta"});
    for (std::size_t i = 0; i < c.d_ss.size(); ++i) {
        w.row({num(static_cast<long>(i)), num(c.d_ss[i]), num(c.st[i]), num(c.tt[i]),
               num(c.delta[i])});
    }
}

LemmaCurves curves_from_trace(const ConvergenceTrace& trace) {
    LemmaCurves c;
    for (const auto& pt : trace.points) {
        if (!pt.error_terms) continue;
        c.d_ss.push_back(pt.error_terms->d_ss);
        c.st.push_back(pt.error_terms->st);
        c.tt.push_back(pt.error_terms->tt);
        c.delta.push_back(pt.rel_error);
    }
    return c;
}

void fit_all(const std::string& prefix, const LemmaCurves& c,
             std::map<std::string, RateFit>& fits) {
    fits[prefix + "/d_ss"] = rate_fit(c.d_ss);
    fits[prefix + "/st"] = rate_fit(c.st);
    fits[prefix + "/tt"] = rate_fit(c.tt);
    fits[prefix + "/delta"] = rate_fit(c.delta);
}

}  // namespace

LemmaCheckResult cmd_lemma_check(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    const long m = cfg.resolved_m(cfg.r_star);
    const int r_over = cfg.r_over > 0 ? cfg.r_over : cfg.r_star + 2;

    const ProblemInstance prob =
        gen_problem(cfg.n, cfg.n3, cfg.r_star, m, 0.0, cfg.seed, cfg.measure_mode());
    const SubspaceBasis basis = subspace_basis(prob.x_star, cfg.r_star);

    LemmaCheckResult res;

    // Population dynamics: iterate the split form of the population step.
    for (const bool over : {false, true}) {
        const int r = over ? r_over : cfg.r_star;
        Tensor3 f = spectral_init(prob, r);
        auto [s, t] = subspace_split(f, basis);
        LemmaCurves& curves = over ? res.pop_over : res.pop_exact;
        for (int it = 0; it < cfg.pop_iters; ++it) {
            split_norms(s, t, basis, prob.x_star, curves);
            std::tie(s, t) = tilde_update(s, t, basis, cfg.eta);
        }
        split_norms(s, t, basis, prob.x_star, curves);
    }

    // Sample dynamics: plain FGD with per-iteration error terms.
    for (const bool over : {false, true}) {
        FgdConfig fc = cfg.fgd(over ? r_over : cfg.r_star);
        fc.stop = StopRule::iters_only;
        fc.max_iters = over ? cfg.sample_iters_over : cfg.sample_iters_exact;
        fc.record_error_terms = true;
        fc.trace_every = 1;
        const SolveResult sol = fgd_solve(prob, fc);
        (over ? res.samp_over : res.samp_exact) = curves_from_trace(sol.trace);
    }

    write_curves_csv(dir / "lemma_pop_exact.csv", res.pop_exact);
    write_curves_csv(dir / "lemma_pop_over.csv", res.pop_over);
    write_curves_csv(dir / "lemma_sample_exact.csv", res.samp_exact);
    write_curves_csv(dir / "lemma_sample_over.csv", res.samp_over);

    fit_all("pop_exact", res.pop_exact, res.fits);
    fit_all("pop_over", res.pop_over, res.fits);
    fit_all("samp_exact", res.samp_exact, res.fits);
    fit_all("samp_over", res.samp_over, res.fits);

    CsvWriter w(dir / "lemma_rates.csv");
    w.row({"curve", "kind", "slope", "c", "r2"});
    for (const auto& [key, fit] : res.fits) {
        w.row({key, rate_kind(fit), num(fit.slope), num(fit.c), num(fit.r2)});
    }
    return res;
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

// One iteration worth of tensor work: spectra of the factor and of a
// gradient-shaped square tensor, both t-products, and the inverse transform.
template <typename ProductFn>
double time_kernel_ns(const Tensor3& a, const Tensor3& f, int reps, ProductFn&& product) {
    volatile double sink = 0.0;
    std::vector<double> times;
    times.reserve(reps);
    const Tensor3 fct = conj_transpose(f);
    for (int i = 0; i < reps + 3; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Tensor3 x = product(f, fct);
        const Tensor3 g = product(a, f);
        const auto t1 = std::chrono::steady_clock::now();
        sink = sink + x(0, 0, 0) + g(0, 0, 0);
        if (i >= 3) {
            times.push_back(
                std::chrono::duration<double, std::nano>(t1 - t0).count());
        }
    }
    (void)sink;
    return median(times);
}

}  // namespace

BenchResult cmd_bench(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    // Defaults chosen so the O(r n^2 n3) product term dominates the timing;
    // at small r the r-independent transform work hides the scaling.
    std::vector<std::array<int, 3>> shapes = cfg.bench_shapes;
    if (shapes.empty() && !cfg.bench_shapes_set) {
        shapes = {{80, 64, 4}, {160, 64, 4}, {80, 128, 4}};
    }

    BenchResult res;
    CsvWriter w(dir / "bench.csv");
    w.row({"n", "r", "n3", "median_ns_parallel", "median_ns_serial"});
    for (const auto& sh : shapes) {
        const int n = sh[0], r = sh[1], n3 = sh[2];
        Tensor3 a(n, n, n3), f(n, r, n3);
        rng::GaussianStream ga(rng::mix(cfg.seed, 0xBE1), 7);
        rng::GaussianStream gf(rng::mix(cfg.seed, 0xBE2), 8);
        ga.fill(0, a.data(), a.size());
        gf.fill(0, f.data(), f.size());
        a = sym(a);

        BenchRow row;
        row.n = n;
        row.r = r;
        row.n3 = n3;
        row.median_ns_parallel = time_kernel_ns(
            a, f, cfg.bench_reps, [](const Tensor3& x, const Tensor3& y) { return t_product(x, y); });
        row.median_ns_serial =
            time_kernel_ns(a, f, cfg.bench_reps, [](const Tensor3& x, const Tensor3& y) {
                return ref::t_product_serial(x, y);
            });
        res.rows.push_back(row);
        w.row({num(n), num(r), num(n3), num(row.median_ns_parallel), num(row.median_ns_serial)});
    }

    // Doubling ratios relative to the first shape.
    for (const auto& row : res.rows) {
        const auto& base = res.rows.front();
        if (row.n == 2 * base.n && row.r == base.r && row.n3 == base.n3) {
            res.n_doubling_ratio = row.median_ns_parallel / base.median_ns_parallel;
            res.n_scaling_exponent = std::log2(res.n_doubling_ratio);
        }
        if (row.r == 2 * base.r && row.n == base.n && row.n3 == base.n3) {
            res.r_doubling_ratio = row.median_ns_parallel / base.median_ns_parallel;
            res.r_scaling_exponent = std::log2(res.r_doubling_ratio);
        }
    }
    CsvWriter s(dir / "bench_scaling.csv");
    s.row({"axis", "doubling_ratio", "scaling_exponent"});
    if (res.n_doubling_ratio > 0) s.row({"n", num(res.n_doubling_ratio), num(res.n_scaling_exponent)});
    if (res.r_doubling_ratio > 0) s.row({"r", num(res.r_doubling_ratio), num(res.r_scaling_exponent)});
    return res;
}

std::vector<RipEstimate> cmd_rip(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    const long m = cfg.resolved_m(cfg.r_star);
    const int r = cfg.resolved_r();

    std::vector<RipEstimate> out;
    CsvWriter w(dir / "rip.csv");
    w.row({"run", "seed", "r", "m", "trials", "delta_hat"});
    CsvWriter wr(dir / "rip_ratios.csv");
    wr.row({"run", "trial", "ratio"});
    for (int run = 0; run < cfg.runs; ++run) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(run);
        RipEstimate est = empirical_rip(cfg.n, cfg.n3, r, m, cfg.trials, seed, cfg.measure_mode());
        w.row({num(run), num(seed), num(r), num(m), num(cfg.trials), num(est.delta_hat)});
        for (int t = 0; t < static_cast<int>(est.ratio_samples.size()); ++t) {
            wr.row({num(run), num(t), num(est.ratio_samples[static_cast<std::size_t>(t)])});
        }
        out.push_back(std::move(est));
    }
    return out;
}

}  // namespace tubal
