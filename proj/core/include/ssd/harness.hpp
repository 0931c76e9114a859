#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssd/dataset.hpp"
#include "ssd/mat.hpp"
#include "ssd/optimizer.hpp"
#include "ssd/reference.hpp"

namespace ssd {

inline constexpr std::string_view kCsvHeader =
    "t,epoch,eta,loss,proxy_g,min_margin,weight_norm,norm_margin,gap_to_gamma,cos_wstar,cos_wbar,dualnorm_signal";

struct MetricRow {
    std::uint64_t t = 0;
    std::uint64_t epoch = 0;
    double eta = 0.0;
    double loss = 0.0;
    double proxy_g = 0.0;
    double min_margin = 0.0;
    double weight_norm = 0.0;
    double norm_margin = 0.0;
    double gap_to_gamma = 0.0;
    double cos_wstar = 0.0;
    std::optional<double> cos_wbar;
    double dualnorm_signal = 0.0;
};

/// Reference quantities a run is measured against.
struct Targets {
    double gamma = 0.0;
    Mat w_star;
    std::optional<Mat> w_bar;
};

/// Frobenius cosine, 0 when either side is zero.
double safe_cosine(const Mat& a, const Mat& b);

MetricRow compute_row(std::uint64_t t, std::uint64_t epoch, double eta, const Mat& w, const Mat& signal,
                      const Dataset& ds, const OptimizerConfig& cfg, const Targets& targets);

/// One CSV line (no newline), numbers in %.17g, an absent cos_wbar left empty.
std::string format_row(const MetricRow& row);
MetricRow parse_row(std::string_view line);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);
std::vector<MetricRow> read_metrics_csv(const std::filesystem::path& path);

enum class BiasSource { none, sign, normalized, file };

struct TrainConfig {
    OptimizerConfig opt;
    std::filesystem::path dataset_path;
    std::optional<std::filesystem::path> w0_path;  ///< empty means W₀ = 0
    std::filesystem::path out_csv;
    std::size_t log_every = 10;
    std::optional<double> gamma;
    std::optional<std::filesystem::path> wstar_path;
    double margin_tol = 1e-4;
    BiasSource wbar = BiasSource::none;
    std::optional<std::filesystem::path> wbar_path;
};

/// JSON object with keys norm, loss, batch_size, momentum, beta1, vr, c, a,
/// eta0, epochs, seed, dataset_path, w0, out_csv, plus the optional
/// log_every, gamma, wstar_path, margin_tol, newton_schulz and wbar.
/// Relative paths resolve against base_dir. Throws ConfigError on unknown
/// keys, wrong types or missing required keys.
TrainConfig parse_train_config(std::string_view json_text, const std::filesystem::path& base_dir);
TrainConfig load_train_config(const std::filesystem::path& path);

struct TrainResult {
    std::vector<MetricRow> rows;
    Mat final_w;
    Targets targets;
};

/// Runs the optimizer, logging a row every log_every steps and at the last step.
TrainResult run_logged(const OptimizerConfig& cfg, const Dataset& ds, const Mat& w0, const Targets& targets,
                       std::size_t log_every = 10);

/// Loads the dataset, resolves W₀ and the targets (solving for γ and W* when
/// not given), runs, and writes out_csv.
TrainResult train_cmd(const TrainConfig& cfg);

struct SweepEntry {
    std::string name;
    bool ok = false;
    double final_gap = 0.0;
    double final_cos_wstar = 0.0;
    std::optional<double> slope;
    std::string error;
};

/// Runs every *.json in config_dir on up to `jobs` threads. A failing config is
/// recorded in its entry and does not stop the others. Writes the summary JSON
/// to summary_path when non-empty.
std::vector<SweepEntry> sweep_cmd(const std::filesystem::path& config_dir, const std::filesystem::path& summary_path,
                                  std::size_t jobs);

struct PersampleVerdict {
    double final_loss = 0.0;
    double final_cos_wbar = 0.0;
    double final_cos_wstar = 0.0;
    std::string to_json() const;
};

/// True iff d = k and every x_i is a positive multiple of e_{y_i}.
bool is_scale_skewed(const Dataset& ds);

/// Batch-size-one run on scale-skewed data. Rejects b ≠ 1, momentum, VR,
/// norms other than ew:inf / ew:2 / sch:inf, and a nonzero W₀. Measures
/// cos_wbar against the sign bias matrix under ew:inf and the normalized one
/// otherwise. Writes out_csv and out_csv + ".verdict.json".
PersampleVerdict persample_cmd(const TrainConfig& cfg);

struct SlopeFit {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t rows_used = 0;
};

/// Least squares of log(gap) on log(t) over rows with t ∈ [t_lo, t_hi] and a
/// positive finite gap. Throws ConfigError with fewer than 20 such rows.
SlopeFit fit_rate(const std::vector<MetricRow>& rows, double t_lo, double t_hi);
SlopeFit fit_rate(const std::filesystem::path& csv, double t_lo, double t_hi);

}  // namespace ssd
