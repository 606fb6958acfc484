// dlcov: dataset generation, training, evaluation and sweeps for UL-to-DL
// covariance mapping.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dlcov/csv.hpp"
#include "dlcov/error.hpp"
#include "dlcov/experiment.hpp"
#include "dlcov/metrics.hpp"
#include "dlcov/theory.hpp"

using namespace dlcov;

namespace {

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
};

void add_common(CLI::App* sub, Common& c, bool out_required = true) {
    sub->add_option("--config", c.config, "experiment config file (sectioned key = value)");
    auto* out = sub->add_option("--out", c.out, "output file or directory");
    if (out_required) out->required();
    sub->add_option("--seed", c.seed, "override the config seed");
    sub->add_option("--jobs", c.jobs, "worker threads for independent cells")->check(CLI::PositiveNumber);
}

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

Dataset generate(const ExperimentConfig& cfg) {
    return build_dataset(cfg.array, cfg.noise_for(cfg.array.antennas, cfg.snr_db), cfg.dataset_options(cfg.n_users),
                         cfg.seed);
}

std::string trace_csv(const TrainingTrace& trace) {
    std::ostringstream o;
    o << "iteration,sigma,laplacian,kernel_norm,sigma_term,fidelity,objective\n";
    for (const auto& e : trace.entries)
        o << e.iteration << ',' << format_double(e.sigma) << ',' << format_double(e.terms.laplacian) << ','
          << format_double(e.terms.kernel_norm) << ',' << format_double(e.terms.sigma_term) << ','
          << format_double(e.terms.fidelity) << ',' << format_double(e.objective) << '\n';
    return o.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learned UL-to-DL channel covariance mapping"};
    app.require_subcommand(1);

    Common gen_c, train_c, eval_c, sweep_c, mmse_c, k_c, bound_c;
    std::string train_data, eval_data, eval_model, bound_data, bound_model;

    auto* gen = app.add_subcommand("gen-dataset", "simulate a dataset into a directory");
    add_common(gen, gen_c);

    auto* tr = app.add_subcommand("train", "train the RBF interpolator; writes the model and a trace CSV");
    add_common(tr, train_c);
    tr->add_option("--dataset", train_data, "dataset directory (generated from the config if omitted)");

    auto* ev = app.add_subcommand("eval", "per-test-user NMSE/CMD/DM for the model and the dictionary baseline");
    add_common(ev, eval_c);
    ev->add_option("--dataset", eval_data, "dataset directory")->required();
    ev->add_option("--model", eval_model, "model file")->required();

    auto* sw = app.add_subcommand("sweep", "run the configured sweep; writes results, summary and plot data");
    add_common(sw, sweep_c);

    auto* mm = app.add_subcommand("mmse", "MMSE channel estimation curves (pilot SNR and pilot count)");
    add_common(mm, mmse_c);

    std::vector<double> k_deltas{5, 10, 15, 35, 45, 60};
    int k_mlo = 2, k_mhi = 1000, k_bpoints = 20000;
    auto* kc = app.add_subcommand("kconst", "tabulate the sine-ratio constant K against the angular spread");
    add_common(kc, k_c);
    kc->add_option("--delta-deg", k_deltas, "angular spreads in degrees");
    kc->add_option("--m-lo", k_mlo, "smallest antenna count");
    kc->add_option("--m-hi", k_mhi, "largest antenna count");
    kc->add_option("--b-points", k_bpoints, "grid points on (0, sin delta]");

    double b_delta = 0.0, b_eps = 0.0, b_k = -1.0, b_delta_mult = 2.0;
    auto* bd = app.add_subcommand("bound", "error-bound components at every test user");
    add_common(bd, bound_c);
    bd->add_option("--dataset", bound_data, "dataset directory")->required();
    bd->add_option("--model", bound_model, "model file")->required();
    bd->add_option("--delta", b_delta, "neighbourhood radius (0 = --delta-mult x median NN distance)");
    bd->add_option("--delta-mult", b_delta_mult, "multiple of the median training NN distance");
    bd->add_option("--epsilon", b_eps, "per-entry slack");
    bd->add_option("--k", b_k, "sine-ratio constant (negative = compute from the dataset spreads)");

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = command_line(argc, argv);

    try {
        if (gen->parsed()) {
            const auto cfg = load(gen_c);
            const auto ds = generate(cfg);
            save_dataset(ds, gen_c.out);
            write_text_file(std::filesystem::path(gen_c.out) / "manifest.txt", run_manifest(cfg, cmd));
            std::printf("wrote %zu train / %zu test users to %s\n", ds.train.size(), ds.test.size(),
                        gen_c.out.c_str());
        } else if (tr->parsed()) {
            const auto cfg = load(train_c);
            const Dataset ds = train_data.empty() ? generate(cfg) : load_dataset(train_data);
            const auto res = train(ds, cfg.hyper);
            save_model(res.model, train_c.out);
            write_text_file(train_c.out + ".trace.csv", trace_csv(res.trace));
            const auto& last = res.trace.entries.back();
            std::printf("sigma = %.6g, objective = %.10g after %d iterations (%s)\n", res.model.sigma, last.objective,
                        last.iteration, res.trace.converged ? "converged" : "iteration limit");
        } else if (ev->parsed()) {
            const auto cfg = load(eval_c);
            const auto ds = load_dataset(eval_data);
            const auto model = load_model(eval_model);
            const auto scores = evaluate(model, ds, cfg.baseline);
            std::ostringstream o;
            o << "user_id,method,nmse,cmd,dm\n";
            for (const auto& s : scores)
                for (std::size_t t = 0; t < s.report.size(); ++t)
                    o << ds.test[t].user_id << ',' << s.method << ',' << format_double(s.report.nmse[t]) << ','
                      << format_double(s.report.cmd[t]) << ',' << format_double(s.report.dm[t]) << '\n';
            write_text_file(eval_c.out, o.str());
            for (const auto& s : scores)
                std::printf("%-10s nmse %.6g  cmd %.6g  dm %.6g\n", s.method.c_str(), s.report.mean_nmse(),
                            s.report.mean_cmd(), s.report.mean_dm());
        } else if (sw->parsed()) {
            const auto cfg = load(sweep_c);
            const std::filesystem::path dir(sweep_c.out);
            if (cfg.axis == SweepAxis::PilotSnr || cfg.axis == SweepAxis::NumPilots) {
                const auto rows = run_mmse_experiment(cfg, cfg.axis == SweepAxis::PilotSnr,
                                                      cfg.axis == SweepAxis::NumPilots, sweep_c.jobs);
                const std::string exp = cfg.axis == SweepAxis::PilotSnr ? "pilot_snr" : "n_pilots";
                write_text_file(dir / ("mmse_" + exp + ".csv"), mmse_rows_csv(rows, exp));
                emit_mmse_plotdata(rows, dir);
            } else {
                const auto res = run_sweep(cfg, sweep_c.jobs);
                write_text_file(dir / "results.csv", sweep_rows_csv(res.rows));
                write_text_file(dir / "summary.csv", sweep_summary_csv(res.summary));
                emit_plotdata(res, dir, std::string(to_string(cfg.axis)));
                for (const auto& s : res.summary)
                    std::printf("%-4d x=%-10g %-10s n=%d nmse %.5g +- %.3g\n", s.value_index, s.x, s.method.c_str(),
                                s.count, s.nmse_mean, s.nmse_std);
            }
            write_text_file(dir / "manifest.txt", run_manifest(cfg, cmd));
        } else if (mm->parsed()) {
            const auto cfg = load(mmse_c);
            const std::filesystem::path dir(mmse_c.out);
            const auto rows = run_mmse_experiment(cfg, true, true, mmse_c.jobs);
            write_text_file(dir / "mmse_pilot_snr.csv", mmse_rows_csv(rows, "pilot_snr"));
            write_text_file(dir / "mmse_n_pilots.csv", mmse_rows_csv(rows, "n_pilots"));
            emit_mmse_plotdata(rows, dir);
            write_text_file(dir / "manifest.txt", run_manifest(cfg, cmd));
        } else if (kc->parsed()) {
            const auto cfg = load(k_c);
            std::ostringstream o;
            o << "delta_deg,k_value\n";
            for (double d : k_deltas) {
                KQuery q;
                q.f_r = cfg.array.freq_ratio();
                q.delta = deg_to_rad(d);
                q.m_lo = k_mlo;
                q.m_hi = k_mhi;
                q.b_points = k_bpoints;
                const double k = k_constant(q);
                o << format_double(d) << ',' << format_double(k) << '\n';
                std::printf("delta %5.1f deg  K = %.5f\n", d, k);
            }
            write_text_file(k_c.out, o.str());
        } else if (bd->parsed()) {
            const auto cfg = load(bound_c);
            const auto ds = load_dataset(bound_data);
            const auto model = load_model(bound_model);
            const double delta = b_delta > 0.0 ? b_delta : b_delta_mult * median_nn_distance(ds.train_ul());
            double k = b_k;
            if (k < 0.0) {
                KQuery q;
                q.f_r = ds.cfg.freq_ratio();
                q.delta = ds.spread_hi;
                q.m_lo = q.m_hi = ds.cfg.antennas;
                k = k_constant(q);
            }
            std::ostringstream o;
            o << "test_index,user_id,neighborhood_size,neighborhood_error,lipschitz_term,slack_term,total,"
                 "observed_test_error,holds,status\n";
            std::size_t holds = 0, emitted = 0;
            for (std::size_t t = 0; t < ds.test.size(); ++t) {
                o << t << ',' << ds.test[t].user_id << ',';
                try {
                    const auto r = bound_components(model, ds, t, delta, b_eps, k);
                    o << r.neighborhood_size << ',' << format_double(r.neighborhood_error) << ','
                      << format_double(r.lipschitz_term) << ',' << format_double(r.slack_term) << ','
                      << format_double(r.total) << ',' << format_double(r.observed_test_error) << ','
                      << (r.holds() ? 1 : 0) << ",ok\n";
                    ++emitted;
                    holds += r.holds();
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::EmptyNeighborhood) throw;
                    o << "0,nan,nan,nan,nan,nan,0,empty neighborhood\n";
                }
            }
            write_text_file(bound_c.out, o.str());
            std::printf("delta = %.6g, K = %.6g: bound holds at %zu of %zu test users with a neighbourhood\n", delta,
                        k, holds, emitted);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dlcov: %s\n", e.what());
        return 2;
    }
    return 0;
}
