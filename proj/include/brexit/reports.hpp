#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "brexit/evaluation.hpp"
#include "brexit/stats.hpp"

namespace brexit {

/// One finished training run, as listed in runs.csv.
struct RunRecord {
  std::string label;  // usually the ablation mode
  std::uint64_t seed = 0;
  int generations = 0;
  std::optional<double> final_winrate;
  std::filesystem::path run_dir;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

std::string runs_csv_header();
std::string to_csv_row(const RunRecord& run);
/// Reads runs.csv; throws std::runtime_error naming the file and line on malformed rows.
std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path);

/// Last evaluation winrate recorded in a run's metrics.jsonl.
std::optional<double> final_eval_winrate(const std::filesystem::path& run_dir);

/// (generation, eval winrate) pairs from a run's metrics.jsonl, skipping rows without one.
std::vector<std::pair<int, double>> eval_series(const std::filesystem::path& run_dir);

struct SummaryRow {
  std::string label;
  std::size_t runs = 0;
  std::string statistic;  // "iqm", or "mean" when fewer than 4 runs exist
  double value = 0.0;
  stats::Interval ci;
};

struct PoiRow {
  std::string x;
  std::string y;
  double poi = 0.0;
  stats::Interval ci;
};

struct KsRow {
  std::string x;
  std::string y;
  double statistic = 0.0;
  double p_value = 1.0;
  bool exact = false;
};

struct StatsReport {
  std::vector<SummaryRow> summaries;
  std::vector<PoiRow> poi;  // every ordered pair of labels
  std::vector<KsRow> ks;    // every unordered pair of labels
};

/// Groups final winrates by label (in first-seen order) and compares every pair of groups.
/// Runs without a final winrate are skipped.
StatsReport summarize_runs(const std::vector<RunRecord>& runs, int bootstrap_n, double level, std::uint64_t seed);

/// Interquartile mean (or mean below 4 values) plus its percentile bootstrap interval.
SummaryRow summarize(const std::string& label, const std::vector<double>& values, int bootstrap_n, double level,
                     Rng& rng);

struct PlotPoint {
  std::string label;
  int generation = 0;
  SummaryRow summary;
};

/// Per-generation aggregate winrate across the runs of each label. Generations are
/// included once every run of the label has an evaluation there.
std::vector<PlotPoint> plot_series(const std::vector<std::pair<std::string, std::vector<std::filesystem::path>>>& groups,
                                   int bootstrap_n, double level, std::uint64_t seed);

std::string winrate_matrix_csv(const WinrateMatrix& matrix);
/// One JSON object per row agent.
std::string winrate_matrix_jsonl(const WinrateMatrix& matrix);

}  // namespace brexit
