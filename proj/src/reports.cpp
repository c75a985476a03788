#include "brexit/reports.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace brexit {

namespace fs = std::filesystem;

namespace {

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::runtime_error(where + ": not a number: '" + text + "'");
  return value;
}

std::vector<nlohmann::json> read_metrics(const fs::path& run_dir) {
  const fs::path path = run_dir / "metrics.jsonl";
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::vector<nlohmann::json> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace

std::string runs_csv_header() { return "label,seed,generations,final_winrate,run_dir"; }

std::string to_csv_row(const RunRecord& run) {
  if (run.run_dir.string().find_first_of(",\n") != std::string::npos)
    throw std::invalid_argument("run directory may not contain commas or newlines: " + run.run_dir.string());
  return run.label + ',' + std::to_string(run.seed) + ',' + std::to_string(run.generations) + ',' +
         (run.final_winrate ? number(*run.final_winrate) : "") + ',' + run.run_dir.string();
}

std::vector<RunRecord> read_runs_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line != runs_csv_header())
    throw std::runtime_error(path.string() + ": expected header '" + runs_csv_header() + "'");
  std::vector<RunRecord> runs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto parts = split(line, ',');
    if (parts.size() != 5) throw std::runtime_error(where + ": expected 5 fields");
    RunRecord r;
    r.label = parts[0];
    r.seed = parse_number<std::uint64_t>(parts[1], where);
    r.generations = parse_number<int>(parts[2], where);
    if (!parts[3].empty()) r.final_winrate = parse_number<double>(parts[3], where);
    r.run_dir = parts[4];
    runs.push_back(std::move(r));
  }
  return runs;
}

std::optional<double> final_eval_winrate(const fs::path& run_dir) {
  const auto series = eval_series(run_dir);
  if (series.empty()) return std::nullopt;
  return series.back().second;
}

std::vector<std::pair<int, double>> eval_series(const fs::path& run_dir) {
  std::vector<std::pair<int, double>> series;
  for (const auto& row : read_metrics(run_dir)) {
    const auto it = row.find("eval_winrate");
    if (it == row.end() || it->is_null()) continue;
    series.emplace_back(row.at("generation").get<int>(), it->get<double>());
  }
  return series;
}

SummaryRow summarize(const std::string& label, const std::vector<double>& values, int bootstrap_n, double level,
                     Rng& rng) {
  if (values.empty()) throw std::invalid_argument("summarize: no values for " + label);
  const bool use_iqm = values.size() >= 4;
  const stats::Statistic statistic = use_iqm ? stats::Statistic(stats::iqm) : stats::Statistic(stats::mean);
  SummaryRow row;
  row.label = label;
  row.runs = values.size();
  row.statistic = use_iqm ? "iqm" : "mean";
  row.value = statistic(values);
  row.ci = stats::bootstrap_ci(values, statistic, bootstrap_n, level, rng);
  return row;
}

StatsReport summarize_runs(const std::vector<RunRecord>& runs, int bootstrap_n, double level, std::uint64_t seed) {
  std::vector<std::string> labels;
  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : runs) {
    if (!r.final_winrate) continue;
    if (!groups.contains(r.label)) labels.push_back(r.label);
    groups[r.label].push_back(*r.final_winrate);
  }
  Rng rng(seed);
  StatsReport report;
  for (const auto& label : labels) report.summaries.push_back(summarize(label, groups[label], bootstrap_n, level, rng));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (i == j) continue;
      const auto& x = groups[labels[i]];
      const auto& y = groups[labels[j]];
      const auto poi = stats::probability_of_improvement(x, y, std::max(bootstrap_n, 1000), rng, level);
      report.poi.push_back({labels[i], labels[j], poi.poi, poi.ci});
      if (i < j) {
        const auto ks = stats::ks_two_sample(x, y);
        report.ks.push_back({labels[i], labels[j], ks.statistic, ks.p_value, ks.exact});
      }
    }
  }
  return report;
}

std::vector<PlotPoint> plot_series(const std::vector<std::pair<std::string, std::vector<fs::path>>>& groups,
                                   int bootstrap_n, double level, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PlotPoint> points;
  for (const auto& [label, dirs] : groups) {
    std::map<int, std::vector<double>> by_generation;
    for (const auto& dir : dirs)
      for (const auto& [gen, winrate] : eval_series(dir)) by_generation[gen].push_back(winrate);
    for (const auto& [gen, values] : by_generation) {
      if (values.size() != dirs.size()) continue;
      points.push_back({label, gen, summarize(label, values, bootstrap_n, level, rng)});
    }
  }
  return points;
}

std::string winrate_matrix_csv(const WinrateMatrix& matrix) {
  std::ostringstream out;
  out << "agent";
  for (const auto& a : matrix.agents) out << ',' << a;
  out << '\n';
  for (std::size_t i = 0; i < matrix.agents.size(); ++i) {
    out << matrix.agents[i];
    for (double v : matrix.entries[i]) out << ',' << number(v);
    out << '\n';
  }
  return out.str();
}

std::string winrate_matrix_jsonl(const WinrateMatrix& matrix) {
  std::ostringstream out;
  for (std::size_t i = 0; i < matrix.agents.size(); ++i) {
    nlohmann::ordered_json row;
    row["agent"] = matrix.agents[i];
    row["games_per_cell"] = matrix.games_per_cell;
    nlohmann::ordered_json against;
    for (std::size_t j = 0; j < matrix.agents.size(); ++j) against[matrix.agents[j]] = matrix.entries[i][j];
    row["winrate_against"] = against;
    out << row.dump() << '\n';
  }
  return out.str();
}

}  // namespace brexit
