#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dlcov/dataset.hpp"
#include "dlcov/learner.hpp"
#include "dlcov/metrics.hpp"
#include "dlcov/mmse.hpp"

namespace dlcov {

enum class SweepAxis { None, Users, Antennas, Snr, MuGrid, PilotSnr, NumPilots };

std::string_view to_string(SweepAxis axis) noexcept;
SweepAxis parse_sweep_axis(std::string_view s);

struct BaselineConfig {
    int k = 10;
    double bandwidth = 0.0;  // 0 = median distance to the k-th neighbour
};

struct MmseConfig {
    int n_realizations = 100;
    double total_power = 1.0;
    PilotStyle style = PilotStyle::RandomUnitary;
    double pilot_snr_db = 20.0;  // used by the pilot-count experiment
    std::vector<double> snr_values{0, 10, 20, 30, 40, 50};
    std::vector<int> pilot_values{10, 15, 20, 25, 30, 35, 40};
};

struct ExperimentConfig {
    ArrayConfig array;
    int n_users = 500;
    double split_ratio = 0.8;
    PasFamily family = PasFamily::Uniform;
    double spread_lo_deg = 5.0;
    double spread_hi_deg = 15.0;
    double scale_fraction = 1.0 / 3.0;
    double snr_db = 20.0;
    int n_ch = 0;  // 0 = 2M
    Hyperparams hyper;
    BaselineConfig baseline;
    MmseConfig mmse;

    SweepAxis axis = SweepAxis::None;
    std::vector<double> values;       // N, M, SNR, pilot SNR or pilot count
    std::vector<double> mu1_values;   // mu-grid axis
    std::vector<double> mu2_values;
    int n_repeats = 1;
    std::uint64_t seed = 1;

    /// Hyperparameters used for noiseless data at M = 256.
    static Hyperparams noiseless_m256();

    NoiseSpec noise_for(int antennas, double snr) const;
    DatasetOptions dataset_options(int n_users) const;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

/// Sectioned "key = value" text ([array], [dataset], [model], [baseline],
/// [sweep], [mmse]). Unknown sections or keys throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const ExperimentConfig& cfg);

/// FNV-1a, used for the config hash in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

/// Evaluation of one trained model (and the baseline) on a dataset's test users.
struct MethodScores {
    std::string method;
    MetricReport report;
};
std::vector<MethodScores> evaluate(const TrainedInterpolator& model, const Dataset& ds,
                                   const BaselineConfig& baseline);

/// DL feature estimates per method for every test user.
std::vector<FeatureVector> learned_estimates(const TrainedInterpolator& model, const Dataset& ds);
std::vector<FeatureVector> dictionary_estimates(const Dataset& ds, const BaselineConfig& baseline);

struct SweepRow {
    int value_index = 0;
    double x = 0.0;
    double x2 = 0.0;  // mu2 on the mu-grid axis, NaN otherwise
    int repeat = 0;
    std::uint64_t seed = 0;
    std::string method;
    double nmse = 0.0;
    double cmd = 0.0;
    double dm = 0.0;
    std::string status = "ok";
};

struct SweepSummary {
    int value_index = 0;
    double x = 0.0;
    double x2 = 0.0;
    std::string method;
    int count = 0;
    double nmse_mean = 0.0, nmse_std = 0.0;
    double cmd_mean = 0.0, cmd_std = 0.0;
    double dm_mean = 0.0, dm_std = 0.0;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::None;
    std::vector<SweepRow> rows;  // sorted by (value_index, repeat, method)
    std::vector<SweepSummary> summary;
};

/// Dataset seed of one sweep cell. On the mu-grid axis all grid points share
/// the datasets of a repeat, so the value index is not mixed in.
std::uint64_t cell_seed(const ExperimentConfig& cfg, int value_index, int repeat);

/// Runs every (value, repeat) cell with up to `jobs` worker threads. A failing
/// cell yields rows whose status holds the error message.
SweepResult run_sweep(const ExperimentConfig& cfg, int jobs = 1);
std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);

std::string sweep_rows_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_rows_csv(const std::string& text);
std::string sweep_summary_csv(const std::vector<SweepSummary>& summary);

struct MmseRow {
    std::string experiment;  // "pilot_snr" or "n_pilots"
    double x = 0.0;
    int repeat = 0;
    std::uint64_t dataset_seed = 0;
    std::string method;
    double nmse_mean = 0.0;
    double nmse_std = 0.0;
    std::string status = "ok";
};

/// Pilot-SNR sweep with N_p = rank of the true DL covariance, and pilot-count
/// sweep at a fixed pilot SNR, for the perfect covariance, the learned model
/// and the dictionary baseline.
std::vector<MmseRow> run_mmse_experiment(const ExperimentConfig& cfg, bool snr_sweep = true,
                                         bool pilot_sweep = true, int jobs = 1);
std::string mmse_rows_csv(const std::vector<MmseRow>& rows, const std::string& experiment);

/// Per-metric long-format CSVs (x, x2, method, mean, std, count) named
/// <prefix>_<metric>.csv plus <prefix>_plot.txt describing axes and scales.
void emit_plotdata(const SweepResult& result, const std::filesystem::path& dir, const std::string& prefix);
void emit_mmse_plotdata(const std::vector<MmseRow>& rows, const std::filesystem::path& dir);

/// Config hash, seeds and version, one "key = value" per line.
std::string run_manifest(const ExperimentConfig& cfg, const std::string& command);

}  // namespace dlcov
