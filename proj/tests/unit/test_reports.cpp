#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "brexit/reports.hpp"

using namespace brexit;
namespace fs = std::filesystem;

namespace {

fs::path fake_run(const std::string& name, const std::vector<std::string>& winrates) {
  const auto dir = fs::temp_directory_path() / ("brexit_reports_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream out(dir / "metrics.jsonl");
  for (std::size_t g = 0; g < winrates.size(); ++g)
    out << "{\"generation\":" << g + 1 << ",\"eval_winrate\":" << winrates[g] << "}\n";
  return dir;
}

}  // namespace

TEST_CASE("runs.csv round trip and validation") {
  const auto path = fs::temp_directory_path() / "brexit_runs_test.csv";
  const std::vector<RunRecord> runs{{"exit", 3, 30, 0.75, "exit/seed_3"}, {"brexit", 4, 30, std::nullopt, "b/4"}};
  {
    std::ofstream out(path);
    out << runs_csv_header() << '\n';
    for (const auto& r : runs) out << to_csv_row(r) << '\n';
  }
  CHECK(read_runs_csv(path) == runs);
  {
    std::ofstream out(path);
    out << runs_csv_header() << "\nexit,x,30,0.5,d\n";
  }
  CHECK_THROWS_WITH(read_runs_csv(path), doctest::Contains(":2: not a number"));
  CHECK_THROWS(to_csv_row({"exit", 1, 1, 0.5, "a,b"}));
  fs::remove(path);
}

TEST_CASE("summaries use the interquartile mean from four runs on") {
  Rng rng(1);
  const auto four = summarize("a", {1, 2, 3, 4, 5, 6, 7, 8}, 1000, 0.95, rng);
  CHECK(four.statistic == "iqm");
  CHECK(four.value == 4.5);
  CHECK(four.ci.lower <= 4.5);
  CHECK(four.ci.upper >= 4.5);
  const auto three = summarize("b", {0.2, 0.4, 0.9}, 1000, 0.95, rng);
  CHECK(three.statistic == "mean");
  CHECK(three.value == doctest::Approx(0.5));
}

TEST_CASE("run comparison tables cover every pair") {
  std::vector<RunRecord> runs;
  for (int i = 0; i < 6; ++i) {
    runs.push_back({"x", static_cast<std::uint64_t>(i), 1, 0.6 + 0.05 * i, "x"});
    runs.push_back({"y", static_cast<std::uint64_t>(i), 1, 0.1 + 0.05 * i, "y"});
  }
  runs.push_back({"z", 0, 1, std::nullopt, "z"});
  const StatsReport r = summarize_runs(runs, 1000, 0.95, 3);
  REQUIRE(r.summaries.size() == 2);
  CHECK(r.summaries[0].label == "x");
  REQUIRE(r.poi.size() == 2);
  CHECK(r.poi[0].poi == 1.0);
  CHECK(r.poi[0].ci.lower == 1.0);
  CHECK(r.poi[0].poi + r.poi[1].poi == 1.0);
  REQUIRE(r.ks.size() == 1);
  CHECK(r.ks[0].statistic == 1.0);
  CHECK(r.ks[0].exact);
  // Two disjoint samples of 6: only 2 of the C(12,6) = 924 splits reach D = 1.
  CHECK(r.ks[0].p_value == doctest::Approx(2.0 / 924.0).epsilon(1e-12));
}

TEST_CASE("plot series aggregates generations present in every run") {
  const auto a = fake_run("a", {"0.5", "0.6", "null"});
  const auto b = fake_run("b", {"0.7", "0.8", "0.9"});
  const auto points = plot_series({{"mode", {a, b}}}, 200, 0.9, 1);
  REQUIRE(points.size() == 2);
  CHECK(points[0].generation == 1);
  CHECK(points[0].summary.statistic == "mean");
  CHECK(points[0].summary.value == doctest::Approx(0.6));
  CHECK(points[1].summary.value == doctest::Approx(0.7));
  CHECK(final_eval_winrate(a) == 0.6);
  CHECK(final_eval_winrate(b) == 0.9);
  CHECK_THROWS(eval_series(fs::temp_directory_path() / "brexit_reports_missing"));
}

TEST_CASE("winrate matrix exports") {
  WinrateMatrix m{{"a", "b"}, {{0.5, 0.25}, {0.75, 0.5}}, 10};
  CHECK(winrate_matrix_csv(m) == "agent,a,b\na,0.5,0.25\nb,0.75,0.5\n");
  const std::string jsonl = winrate_matrix_jsonl(m);
  CHECK(jsonl.find("{\"agent\":\"a\",\"games_per_cell\":10,\"winrate_against\":{\"a\":0.5,\"b\":0.25}}") == 0);
}
