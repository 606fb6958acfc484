#include "dlcov/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "dlcov/csv.hpp"
#include "dlcov/error.hpp"
#include "dlcov/metrics.hpp"

#ifndef DLCOV_VERSION
#define DLCOV_VERSION "unknown"
#endif

namespace dlcov {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_safe(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

std::string error_status(const std::exception& e) { return csv_safe(std::string("error ") + e.what()); }

/// Runs fn(0..n-1) on up to `jobs` threads; every index runs exactly once.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    const int workers = std::max(1, std::min(jobs, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    const double n = static_cast<double>(v.size());
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

Dictionary make_dictionary(const Dataset& ds) {
    Dictionary d;
    for (const auto& s : ds.train) {
        if (!s.dl_observed) throw Error(ErrorCode::InvalidArgument, "training user without DL observation");
        d.ul.push_back(s.ul_observed);
        d.dl.push_back(*s.dl_observed);
    }
    return d;
}

MetricReport score(const Dataset& ds, const std::vector<FeatureVector>& est) {
    MetricReport rep;
    for (std::size_t t = 0; t < ds.test.size(); ++t) rep.add(expand_feature(ds.test[t].dl_true), expand_feature(est[t]));
    return rep;
}

struct Cell {
    int value_index;  // -1: every mu-grid point
    double value;
    int repeat;
};

Dataset cell_dataset(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed) {
    ArrayConfig array = cfg.array;
    int users = cfg.n_users;
    double snr = cfg.snr_db;
    switch (cfg.axis) {
        case SweepAxis::Users: users = static_cast<int>(cell.value); break;
        case SweepAxis::Antennas: array.antennas = static_cast<int>(cell.value); break;
        case SweepAxis::Snr: snr = cell.value; break;
        default: break;
    }
    return build_dataset(array, cfg.noise_for(array.antennas, snr), cfg.dataset_options(users), seed);
}

std::string axis_label(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Users: return "number of users N";
        case SweepAxis::Antennas: return "number of antennas M";
        case SweepAxis::Snr: return "SNR (dB)";
        case SweepAxis::MuGrid: return "mu1 (one series per mu2)";
        case SweepAxis::PilotSnr: return "pilot SNR (dB)";
        case SweepAxis::NumPilots: return "number of pilots";
        case SweepAxis::None: break;
    }
    return "configuration";
}

}  // namespace

std::vector<FeatureVector> learned_estimates(const TrainedInterpolator& model, const Dataset& ds) {
    std::vector<FeatureVector> out;
    out.reserve(ds.test.size());
    for (const auto& u : ds.test) out.push_back(predict(model, u.ul_observed));
    return out;
}

std::vector<FeatureVector> dictionary_estimates(const Dataset& ds, const BaselineConfig& baseline) {
    const Dictionary dict = make_dictionary(ds);
    const int k = std::min<int>(baseline.k, static_cast<int>(dict.ul.size()));
    const double bw = baseline.bandwidth > 0.0 ? baseline.bandwidth : default_bandwidth(dict, k);
    std::vector<FeatureVector> out;
    out.reserve(ds.test.size());
    for (const auto& u : ds.test) out.push_back(dictionary_estimate(dict, u.ul_observed, k, bw));
    return out;
}

std::vector<MethodScores> evaluate(const TrainedInterpolator& model, const Dataset& ds,
                                   const BaselineConfig& baseline) {
    return {{"learned", score(ds, learned_estimates(model, ds))},
            {"dictionary", score(ds, dictionary_estimates(ds, baseline))}};
}

std::uint64_t cell_seed(const ExperimentConfig& cfg, int value_index, int repeat) {
    const auto vi = cfg.axis == SweepAxis::MuGrid ? 0u : static_cast<std::uint64_t>(value_index);
    return derive_seed(cfg.seed, {vi, static_cast<std::uint64_t>(repeat)});
}

SweepResult run_sweep(const ExperimentConfig& cfg, int jobs) {
    cfg.validate();
    if (cfg.axis == SweepAxis::PilotSnr || cfg.axis == SweepAxis::NumPilots)
        throw Error(ErrorCode::ConfigError, "pilot axes belong to the MMSE experiment");

    std::vector<Cell> cells;
    const bool mu_grid = cfg.axis == SweepAxis::MuGrid;
    for (int r = 0; r < cfg.n_repeats; ++r) {
        if (cfg.axis == SweepAxis::None || mu_grid) cells.push_back({mu_grid ? -1 : 0, 0.0, r});
        else
            for (std::size_t v = 0; v < cfg.values.size(); ++v)
                cells.push_back({static_cast<int>(v), cfg.values[v], r});
    }

    // Model variants trained on each cell's dataset.
    struct Variant {
        int value_index;
        double x, x2;
        Hyperparams hyper;
    };
    auto variants_for = [&](const Cell& c) {
        std::vector<Variant> out;
        if (!mu_grid) {
            const double x = cfg.axis == SweepAxis::None ? kNaN : c.value;
            out.push_back({c.value_index, x, kNaN, cfg.hyper});
            return out;
        }
        for (std::size_t i = 0; i < cfg.mu1_values.size(); ++i)
            for (std::size_t j = 0; j < cfg.mu2_values.size(); ++j) {
                Hyperparams h = cfg.hyper;
                h.mu1 = cfg.mu1_values[i];
                h.mu2 = cfg.mu2_values[j];
                out.push_back({static_cast<int>(i * cfg.mu2_values.size() + j), h.mu1, h.mu2, h});
            }
        return out;
    };

    std::vector<std::vector<SweepRow>> per_cell(cells.size());
    parallel_for(static_cast<int>(cells.size()), jobs, [&](int ci) {
        const Cell& c = cells[static_cast<std::size_t>(ci)];
        const auto variants = variants_for(c);
        const std::uint64_t seed = cell_seed(cfg, std::max(c.value_index, 0), c.repeat);
        auto& out = per_cell[static_cast<std::size_t>(ci)];
        auto push = [&](const Variant& v, const std::string& method, const MetricReport* rep, std::string status) {
            SweepRow row;
            row.value_index = v.value_index;
            row.x = v.x;
            row.x2 = v.x2;
            row.repeat = c.repeat;
            row.seed = seed;
            row.method = method;
            row.nmse = rep ? rep->mean_nmse() : kNaN;
            row.cmd = rep ? rep->mean_cmd() : kNaN;
            row.dm = rep ? rep->mean_dm() : kNaN;
            row.status = std::move(status);
            out.push_back(std::move(row));
        };

        std::optional<Dataset> ds;
        std::optional<MetricReport> dict_rep;
        std::string dict_status = "ok";
        try {
            ds = cell_dataset(cfg, c, seed);
        } catch (const std::exception& e) {
            for (const auto& v : variants) {
                push(v, "learned", nullptr, error_status(e));
                push(v, "dictionary", nullptr, error_status(e));
            }
            return;
        }
        try {
            dict_rep = score(*ds, dictionary_estimates(*ds, cfg.baseline));
        } catch (const std::exception& e) {
            dict_status = error_status(e);
        }
        for (const auto& v : variants) {
            try {
                const auto model = train(*ds, v.hyper).model;
                const auto rep = score(*ds, learned_estimates(model, *ds));
                push(v, "learned", &rep, "ok");
            } catch (const std::exception& e) {
                push(v, "learned", nullptr, error_status(e));
            }
            push(v, "dictionary", dict_rep ? &*dict_rep : nullptr, dict_status);
        }
    });

    SweepResult res;
    res.axis = cfg.axis;
    for (auto& rows : per_cell)
        for (auto& row : rows) res.rows.push_back(std::move(row));
    std::sort(res.rows.begin(), res.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.value_index, a.repeat, a.method) < std::tie(b.value_index, b.repeat, b.method);
    });
    res.summary = summarize(res.rows);
    return res;
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
    struct Acc {
        double x = 0.0, x2 = 0.0;
        std::vector<double> nmse, cmd, dm;
    };
    std::map<std::pair<int, std::string>, Acc> groups;
    for (const auto& r : rows) {
        auto& g = groups[{r.value_index, r.method}];
        g.x = r.x;
        g.x2 = r.x2;
        if (r.status != "ok") continue;
        g.nmse.push_back(r.nmse);
        g.cmd.push_back(r.cmd);
        g.dm.push_back(r.dm);
    }
    std::vector<SweepSummary> out;
    for (const auto& [key, g] : groups) {
        SweepSummary s;
        s.value_index = key.first;
        s.method = key.second;
        s.x = g.x;
        s.x2 = g.x2;
        s.count = static_cast<int>(g.nmse.size());
        if (s.count == 0) {
            s.nmse_mean = s.nmse_std = s.cmd_mean = s.cmd_std = s.dm_mean = s.dm_std = kNaN;
        } else {
            mean_std(g.nmse, s.nmse_mean, s.nmse_std);
            mean_std(g.cmd, s.cmd_mean, s.cmd_std);
            mean_std(g.dm, s.dm_mean, s.dm_std);
        }
        out.push_back(s);
    }
    return out;
}

std::string sweep_rows_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream o;
    o << "value_index,x,x2,repeat,seed,method,nmse,cmd,dm,status\n";
    for (const auto& r : rows)
        o << r.value_index << ',' << format_double(r.x) << ',' << format_double(r.x2) << ',' << r.repeat << ','
          << r.seed << ',' << r.method << ',' << format_double(r.nmse) << ',' << format_double(r.cmd) << ','
          << format_double(r.dm) << ',' << csv_safe(r.status) << '\n';
    return o.str();
}

std::vector<SweepRow> parse_sweep_rows_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "value_index,x,x2,repeat,seed,method,nmse,cmd,dm,status")
        throw Error(ErrorCode::FormatError, "unexpected sweep results header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10) throw Error(ErrorCode::FormatError, "sweep results row needs 10 fields");
        SweepRow r;
        r.value_index = static_cast<int>(parse_int(f[0]));
        r.x = parse_double(f[1]);
        r.x2 = parse_double(f[2]);
        r.repeat = static_cast<int>(parse_int(f[3]));
        try {
            r.seed = std::stoull(f[4]);
        } catch (const std::exception&) {
            throw Error(ErrorCode::FormatError, "bad seed '" + f[4] + "'");
        }
        r.method = f[5];
        r.nmse = parse_double(f[6]);
        r.cmd = parse_double(f[7]);
        r.dm = parse_double(f[8]);
        r.status = f[9];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string sweep_summary_csv(const std::vector<SweepSummary>& summary) {
    std::ostringstream o;
    o << "value_index,x,x2,method,count,nmse_mean,nmse_std,cmd_mean,cmd_std,dm_mean,dm_std\n";
    for (const auto& s : summary)
        o << s.value_index << ',' << format_double(s.x) << ',' << format_double(s.x2) << ',' << s.method << ','
          << s.count << ',' << format_double(s.nmse_mean) << ',' << format_double(s.nmse_std) << ','
          << format_double(s.cmd_mean) << ',' << format_double(s.cmd_std) << ',' << format_double(s.dm_mean)
          << ',' << format_double(s.dm_std) << '\n';
    return o.str();
}

std::vector<MmseRow> run_mmse_experiment(const ExperimentConfig& cfg, bool snr_sweep, bool pilot_sweep, int jobs) {
    cfg.validate();
    std::vector<double> snrs = cfg.mmse.snr_values;
    std::vector<int> pilots = cfg.mmse.pilot_values;
    if (cfg.axis == SweepAxis::PilotSnr) snrs = cfg.values;
    if (cfg.axis == SweepAxis::NumPilots) {
        pilots.clear();
        for (double v : cfg.values) pilots.push_back(static_cast<int>(v));
    }

    std::vector<std::vector<MmseRow>> per_repeat(static_cast<std::size_t>(cfg.n_repeats));
    parallel_for(cfg.n_repeats, jobs, [&](int r) {
        auto& out = per_repeat[static_cast<std::size_t>(r)];
        const std::uint64_t seed = derive_seed(cfg.seed, {0, static_cast<std::uint64_t>(r)});
        auto fail = [&](const std::string& exp, double x, const std::string& status) {
            for (const char* m : {"dictionary", "learned", "perfect"})
                out.push_back({exp, x, r, seed, m, kNaN, kNaN, status});
        };
        std::map<std::string, std::vector<FeatureVector>> estimates;
        std::optional<Dataset> ds;
        try {
            ds = build_dataset(cfg.array, cfg.noise_for(cfg.array.antennas, cfg.snr_db),
                               cfg.dataset_options(cfg.n_users), seed);
            const auto model = train(*ds, cfg.hyper).model;
            estimates["learned"] = learned_estimates(model, *ds);
            estimates["dictionary"] = dictionary_estimates(*ds, cfg.baseline);
        } catch (const std::exception& e) {
            if (snr_sweep)
                for (double s : snrs) fail("pilot_snr", s, error_status(e));
            if (pilot_sweep)
                for (int p : pilots) fail("n_pilots", p, error_status(e));
            return;
        }
        const std::uint64_t channel_seed = derive_seed(seed, {7});
        auto run = [&](const std::string& exp, double x, const PilotConfig& pc) {
            try {
                for (const auto& c : channel_experiment(*ds, estimates, pc, cfg.mmse.n_realizations, channel_seed))
                    out.push_back({exp, x, r, seed, c.method, c.mean, c.stddev, "ok"});
            } catch (const std::exception& e) {
                fail(exp, x, error_status(e));
            }
        };
        if (snr_sweep)
            for (double s : snrs) run("pilot_snr", s, {0, cfg.mmse.total_power, s, cfg.mmse.style});
        if (pilot_sweep)
            for (int p : pilots) run("n_pilots", p, {p, cfg.mmse.total_power, cfg.mmse.pilot_snr_db, cfg.mmse.style});
    });

    std::vector<MmseRow> rows;
    for (auto& v : per_repeat)
        for (auto& row : v) rows.push_back(std::move(row));
    std::stable_sort(rows.begin(), rows.end(), [](const MmseRow& a, const MmseRow& b) {
        return std::tie(a.experiment, a.x, a.repeat, a.method) < std::tie(b.experiment, b.x, b.repeat, b.method);
    });
    return rows;
}

std::string mmse_rows_csv(const std::vector<MmseRow>& rows, const std::string& experiment) {
    std::ostringstream o;
    o << "method," << (experiment == "pilot_snr" ? "pilot_snr_db" : "n_pilots")
      << ",repeat,dataset_seed,nmse_mean,nmse_std,status\n";
    for (const auto& r : rows) {
        if (r.experiment != experiment) continue;
        o << r.method << ',' << format_double(r.x) << ',' << r.repeat << ',' << r.dataset_seed << ','
          << format_double(r.nmse_mean) << ',' << format_double(r.nmse_std) << ',' << csv_safe(r.status) << '\n';
    }
    return o.str();
}

void emit_plotdata(const SweepResult& result, const std::filesystem::path& dir, const std::string& prefix) {
    struct Metric {
        const char* name;
        const char* label;
        double SweepSummary::*mean;
        double SweepSummary::*sd;
        bool log_y;
    };
    const Metric metrics[] = {
        {"nmse", "NMSE", &SweepSummary::nmse_mean, &SweepSummary::nmse_std, true},
        {"cmd", "CMD", &SweepSummary::cmd_mean, &SweepSummary::cmd_std, true},
        {"dm", "DM", &SweepSummary::dm_mean, &SweepSummary::dm_std, true},
    };
    const bool log_x = result.axis == SweepAxis::MuGrid;
    std::ostringstream desc;
    desc << "# plot description for " << prefix << "\n"
         << "columns = x, x2, method, mean, std, count\n"
         << "x = " << axis_label(result.axis) << '\n'
         << "x2 = " << (result.axis == SweepAxis::MuGrid ? "mu2" : "unused (nan)") << '\n'
         << "x_scale = " << (log_x ? "log" : "linear") << '\n'
         << "series = one line per method" << (log_x ? " and mu2" : "") << ", error bars = std across repeats\n";
    for (const auto& m : metrics) {
        std::ostringstream o;
        o << "x,x2,method,mean,std,count\n";
        for (const auto& s : result.summary)
            o << format_double(s.x) << ',' << format_double(s.x2) << ',' << s.method << ','
              << format_double(s.*(m.mean)) << ',' << format_double(s.*(m.sd)) << ',' << s.count << '\n';
        write_text_file(dir / (prefix + "_" + m.name + ".csv"), o.str());
        desc << "file = " << prefix << "_" << m.name << ".csv; y = " << m.label
             << "; y_scale = " << (m.log_y ? "log" : "linear") << '\n';
    }
    write_text_file(dir / (prefix + "_plot.txt"), desc.str());
}

void emit_mmse_plotdata(const std::vector<MmseRow>& rows, const std::filesystem::path& dir) {
    std::ostringstream desc;
    desc << "# plot description for the MMSE channel estimation curves\n"
         << "columns = x, method, mean, std, count\n"
         << "series = one line per method; error bars = std across datasets\n";
    for (const std::string exp : {"pilot_snr", "n_pilots"}) {
        std::map<std::pair<double, std::string>, std::vector<double>> groups;
        for (const auto& r : rows)
            if (r.experiment == exp && r.status == "ok") groups[{r.x, r.method}].push_back(r.nmse_mean);
        if (groups.empty()) continue;
        std::ostringstream o;
        o << "x,method,mean,std,count\n";
        for (const auto& [key, v] : groups) {
            double mean = 0.0, sd = 0.0;
            mean_std(v, mean, sd);
            o << format_double(key.first) << ',' << key.second << ',' << format_double(mean) << ','
              << format_double(sd) << ',' << v.size() << '\n';
        }
        write_text_file(dir / ("mmse_" + exp + "_nmse.csv"), o.str());
        desc << "file = mmse_" << exp << "_nmse.csv; x = "
             << (exp == "pilot_snr" ? "pilot SNR (dB), x_scale = linear" : "number of pilots, x_scale = linear")
             << "; y = channel NMSE; y_scale = log\n";
    }
    write_text_file(dir / "mmse_plot.txt", desc.str());
}

std::string run_manifest(const ExperimentConfig& cfg, const std::string& command) {
    const std::string canonical = to_ini(cfg);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
    std::ostringstream o;
    o << "tool = dlcov\n"
      << "version = " << DLCOV_VERSION << '\n'
      << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
      << "command = " << command << '\n'
      << "config_fnv1a64 = " << hash << '\n'
      << "base_seed = " << cfg.seed << '\n'
      << "n_repeats = " << cfg.n_repeats << '\n';
    const int n_values = (cfg.axis == SweepAxis::None || cfg.axis == SweepAxis::MuGrid ||
                          cfg.axis == SweepAxis::PilotSnr || cfg.axis == SweepAxis::NumPilots)
                             ? 1
                             : static_cast<int>(cfg.values.size());
    for (int v = 0; v < n_values; ++v)
        for (int r = 0; r < cfg.n_repeats; ++r)
            o << "seed.v" << v << ".r" << r << " = " << cell_seed(cfg, v, r) << '\n';
    return o.str();
}

}  // namespace dlcov
