// Experiment driver for low-tubal-rank tensor recovery by factorized
// gradient descent. Subcommands reproduce the synthetic studies: convergence
// traces, phase transitions, noisy-recovery tables, dynamics checks of the
// split-coordinate analysis, kernel benchmarks, and empirical isometry
// estimates. Results land as CSV files plus a provenance config.txt.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "tubal/experiments.hpp"
#include "tubal/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"low-tubal-rank tensor recovery via factorized gradient descent"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;
    std::string measurement;
    app.add_option("--config", config_path, "key=value config file; flags override");
    app.add_option("--seed", seed, "base RNG seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "thread count (also TUBAL_FGD_THREADS)");
    app.add_option("--measurement", measurement, "gaussian | symmetrized")
        ->check(CLI::IsMember({"gaussian", "symmetrized"}));

    struct Local {
        int n = 0, n3 = 0, r_star = 0, r = 0, max_iters = 0, seeds = 0, trace_every = 0;
        long m = 0;
        double v = -1.0, eta = 0.0, stop_tol = 0.0;
        std::string stop, m_rule, eta_mode;
        int table = 0, trials = 0, runs = 0, bench_reps = 0, grid_m = 0, grid_r = 0;
        std::string m_list, r_star_list, n_list, v_list, bench_shapes;
        bool save_tensors = false, error_terms = false;
    } loc;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-n,--n", loc.n, "tensor side length");
        sub->add_option("--n3", loc.n3, "tube length");
        sub->add_option("--r-star", loc.r_star, "true tubal rank");
        sub->add_option("-r,--r", loc.r, "solver rank estimate");
        sub->add_option("-m,--m", loc.m, "measurement count (0: use m-rule)");
        sub->add_option("--m-rule", loc.m_rule, "fig | tables");
        sub->add_option("-v,--noise", loc.v, "noise standard deviation");
        sub->add_option("--eta", loc.eta, "step size");
        sub->add_option("--eta-mode", loc.eta_mode, "fixed | auto");
        sub->add_option("--max-iters", loc.max_iters, "iteration cap");
        sub->add_option("--stop", loc.stop, "rel_change | rel_error | iters");
        sub->add_option("--stop-tol", loc.stop_tol, "stopping tolerance");
        sub->add_option("--seeds", loc.seeds, "number of consecutive seeds");
        sub->add_option("--trace-every", loc.trace_every, "trace cadence");
        sub->add_flag("--save-tensors", loc.save_tensors, "write x_final_<seed>.t3r");
        sub->add_flag("--error-terms", loc.error_terms, "record split error terms per iteration");
    };

    CLI::App* conv = app.add_subcommand("convergence", "per-iteration error/objective traces");
    add_common(conv);
    CLI::App* phase = app.add_subcommand("phase", "recovery success over an (m, r_star) grid");
    add_common(phase);
    phase->add_option("--grid-m", loc.grid_m, "grid points along m");
    phase->add_option("--grid-r", loc.grid_r, "grid points along r_star");
    phase->add_option("--m-list", loc.m_list, "explicit m values, comma separated");
    phase->add_option("--r-star-list", loc.r_star_list, "explicit r_star values");
    CLI::App* tables = app.add_subcommand("tables", "mean noisy-recovery error per (n, v) cell");
    add_common(tables);
    tables->add_option("--table", loc.table, "2 (r*=0.3n), 3 (0.2n) or 4 (0.1n)");
    tables->add_option("--n-list", loc.n_list, "n values, comma separated");
    tables->add_option("--v-list", loc.v_list, "noise levels, comma separated");
    CLI::App* lemma = app.add_subcommand("lemma-check", "population/sample dynamics and rates");
    add_common(lemma);
    CLI::App* bench = app.add_subcommand("bench", "kernel timings and scaling exponents");
    add_common(bench);
    bench->add_option("--shapes", loc.bench_shapes, "n:r:n3 triples, comma separated");
    bench->add_option("--reps", loc.bench_reps, "timed repetitions per shape");
    CLI::App* rip = app.add_subcommand("rip", "empirical isometry constant estimate");
    add_common(rip);
    rip->add_option("--trials", loc.trials, "random low-rank tensors per run");
    rip->add_option("--runs", loc.runs, "independent seeded runs");

    CLI11_PARSE(app, argc, argv);

    try {
        tubal::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = tubal::ExperimentConfig::load(config_path);
        CLI::App* sub = app.get_subcommands().front();
        cfg.command = sub->get_name();

        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--out")) cfg.out_dir = out_dir;
        if (app.count("--threads")) cfg.threads = threads;
        if (app.count("--measurement")) cfg.measurement = measurement;
        if (cfg.threads > 0) tubal::parallel::set_thread_count(cfg.threads);

        auto opt = [&](const std::string& name) { return sub->count(name) > 0; };
        if (opt("--n")) cfg.n = loc.n;
        if (opt("--n3")) cfg.n3 = loc.n3;
        if (opt("--r-star")) cfg.r_star = loc.r_star;
        if (opt("--r")) cfg.r = loc.r;
        if (opt("--m")) cfg.m = loc.m;
        if (opt("--m-rule")) cfg.m_rule = loc.m_rule;
        if (opt("--noise")) cfg.v = loc.v;
        if (opt("--eta")) cfg.eta = loc.eta;
        if (opt("--eta-mode")) cfg.eta_mode = loc.eta_mode;
        if (opt("--max-iters")) cfg.max_iters = loc.max_iters;
        if (opt("--stop")) cfg.stop = loc.stop;
        if (opt("--stop-tol")) cfg.stop_tol = loc.stop_tol;
        if (opt("--seeds")) cfg.seeds = loc.seeds;
        if (opt("--trace-every")) cfg.trace_every = loc.trace_every;
        if (opt("--save-tensors")) cfg.save_tensors = true;
        if (opt("--error-terms")) cfg.error_terms = true;
        if (sub == phase) {
            if (opt("--grid-m")) cfg.grid_m = loc.grid_m;
            if (opt("--grid-r")) cfg.grid_r = loc.grid_r;
            if (opt("--m-list")) cfg.set("m_list", loc.m_list);
            if (opt("--r-star-list")) cfg.set("r_star_list", loc.r_star_list);
        } else if (sub == tables) {
            if (opt("--table")) cfg.table = loc.table;
            if (opt("--n-list")) cfg.set("n_list", loc.n_list);
            if (opt("--v-list")) cfg.set("v_list", loc.v_list);
        } else if (sub == bench) {
            if (opt("--shapes")) cfg.set("bench_shapes", loc.bench_shapes);
            if (opt("--reps")) cfg.bench_reps = loc.bench_reps;
        } else if (sub == rip) {
            if (opt("--trials")) cfg.trials = loc.trials;
            if (opt("--runs")) cfg.runs = loc.runs;
        }

        if (cfg.command == "convergence") {
            const tubal::RunRecord rec = tubal::cmd_convergence(cfg);
            std::printf("convergence: mean rel_error %.6g (std %.3g) over %zu seeds, %.2fs mean\n",
                        rec.mean_rel_error, rec.std_rel_error, rec.rows.size(), rec.mean_wall_s);
        } else if (cfg.command == "phase") {
            const auto cells = tubal::cmd_phase(cfg);
            int recovered = 0;
            for (const auto& c : cells) recovered += c.recovered ? 1 : 0;
            std::printf("phase: %d/%zu cells recovered\n", recovered, cells.size());
        } else if (cfg.command == "tables") {
            const auto cells = tubal::cmd_tables(cfg);
            for (const auto& c : cells) {
                std::printf("n=%d v=%.2f: mean rel_error %.4f (%.2fs, %.0f iters)\n", c.n, c.v,
                            c.mean_rel_error, c.mean_wall_s, c.mean_iterations);
            }
        } else if (cfg.command == "lemma-check") {
            const auto res = tubal::cmd_lemma_check(cfg);
            for (const auto& [key, fit] : res.fits) {
                std::printf("%-18s %-9s r2=%.4f\n", key.c_str(),
                            fit.kind == tubal::RateFit::Kind::linear ? "linear" : "sublinear",
                            fit.r2);
            }
        } else if (cfg.command == "bench") {
            const auto res = tubal::cmd_bench(cfg);
            for (const auto& row : res.rows) {
                std::printf("n=%d r=%d n3=%d: %.0f ns (serial %.0f ns)\n", row.n, row.r, row.n3,
                            row.median_ns_parallel, row.median_ns_serial);
            }
            if (res.n_doubling_ratio > 0)
                std::printf("n-doubling ratio %.2f (exponent %.2f)\n", res.n_doubling_ratio,
                            res.n_scaling_exponent);
            if (res.r_doubling_ratio > 0)
                std::printf("r-doubling ratio %.2f (exponent %.2f)\n", res.r_doubling_ratio,
                            res.r_scaling_exponent);
        } else if (cfg.command == "rip") {
            const auto runs = tubal::cmd_rip(cfg);
            for (std::size_t i = 0; i < runs.size(); ++i) {
                std::printf("run %zu: delta_hat %.4f over %d trials\n", i, runs[i].delta_hat,
                            runs[i].trials);
            }
        }
        return 0;
    } catch (const tubal::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const tubal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
