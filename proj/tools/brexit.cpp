// brexit: command-line front end for training, evaluation and reporting.
//
// Exit codes: 0 success, 1 usage error (bad flags or invalid configuration), 2 runtime failure.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "brexit/agents.hpp"
#include "brexit/checkpoint.hpp"
#include "brexit/config.hpp"
#include "brexit/evaluation.hpp"
#include "brexit/reports.hpp"
#include "brexit/trainer.hpp"

namespace fs = std::filesystem;
using namespace brexit;

namespace {

constexpr const char* kOutDirEnv = "BREXIT_OUT_DIR";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out;
};

/// --out wins, then the environment variable, then the command's default.
fs::path resolve_out_dir(const std::string& flag, const fs::path& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return fallback;
}

void apply_overrides(RunConfig& config, const CommonOptions& common) {
  if (common.seed) config.seed = *common.seed;
  if (common.workers) config.parallelism.workers = *common.workers;
}

RunConfig load_run_config(const CommonOptions& common) {
  RunConfig config = common.config.empty() ? parse_config("") : load_config(common.config);
  apply_overrides(config, common);
  validate(config, common.config.empty() ? "<defaults>" : common.config);
  return config;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<int> parse_budgets(const std::string& text) {
  std::vector<int> budgets;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    int b = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), b);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size() || b < 1)
      throw UsageError("--budgets: expected positive integers separated by commas, got '" + text + "'");
    if (!budgets.empty() && b <= budgets.back()) throw UsageError("--budgets: must be strictly ascending");
    budgets.push_back(b);
  }
  if (budgets.empty()) throw UsageError("--budgets: empty grid");
  return budgets;
}

/// Parses HxWxN, e.g. 4x5x3.
GameConfig parse_game(const std::string& text) {
  GameConfig g;
  if (std::sscanf(text.c_str(), "%dx%dx%d", &g.height, &g.width, &g.connect_n) != 3)
    throw UsageError("--game: expected HxWxN, got '" + text + "'");
  return g;
}

/// Board for agent matches: --game, else --config, else the first checkpoint named by an agent spec.
GameRules eval_rules(const std::string& game, const CommonOptions& common, const std::vector<std::string>& specs) {
  if (!game.empty()) {
    try {
      return GameRules(parse_game(game));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--game: ") + e.what());
    }
  }
  if (!common.config.empty()) return make_rules(load_config(common.config));
  for (const auto& spec : specs) {
    for (const std::string prefix : {"checkpoint:", "expert:"}) {
      if (spec.rfind(prefix, 0) != 0) continue;
      std::string path = spec.substr(prefix.size());
      if (const auto colon = path.rfind(':'); colon != std::string::npos && !fs::exists(path))
        path = path.substr(0, colon);
      const Checkpoint c = load_checkpoint(path);
      return make_rules(parse_config(c.config_text, path));
    }
  }
  return make_rules(parse_config(""));
}

/// Malformed agent specs are usage errors; unreadable checkpoints stay runtime failures.
std::shared_ptr<const Policy> policy_from_spec(const std::string& spec, const GameRules& rules) {
  try {
    return make_policy(spec, rules);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------

struct TrainOptions {
  std::string resume;
  std::optional<int> generations;
};

int cmd_train(const CommonOptions& common, const TrainOptions& opts) {
  std::unique_ptr<Trainer> trainer;
  if (!opts.resume.empty()) {
    const Checkpoint ckpt = load_checkpoint(opts.resume);
    RunConfig config = common.config.empty() ? parse_config(ckpt.config_text, opts.resume) : load_config(common.config);
    apply_overrides(config, common);
    if (opts.generations) config.training.generations = *opts.generations;
    const fs::path default_dir = fs::absolute(opts.resume).parent_path().parent_path();
    trainer = Trainer::resume(opts.resume, resolve_out_dir(common.out, default_dir), config);
    spdlog::info("resumed at generation {} from {}", trainer->generation(), opts.resume);
  } else {
    RunConfig config = load_run_config(common);
    if (opts.generations) config.training.generations = *opts.generations;
    trainer = std::make_unique<Trainer>(config, resolve_out_dir(common.out, "runs/train"));
  }
  const int total = trainer->config().training.generations;
  trainer->run([&](const GenerationMetrics& m) {
    std::cout << "generation " << m.generation << "/" << total << "  loss " << fixed(m.total_loss, 4)
              << "  train_winrate " << fixed(m.train_winrate)
              << (m.eval_winrate ? "  eval_winrate " + fixed(*m.eval_winrate) : std::string()) << std::endl;
  });
  std::cout << "run directory: " << trainer->out_dir().string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
  std::vector<std::string> agents;
  int games = 100;
  bool diagonal = false;
  std::string game;
  bool sweep = false;
  std::string target;
  double goal = 0.5;
  std::string budgets = "1,2,5,10,20,50,100,200";
  bool full_curve = false;
};

int cmd_eval(const CommonOptions& common, const EvalOptions& opts) {
  if (opts.agents.empty() && !opts.sweep) throw UsageError("eval: give at least one --agent or --sweep");
  if (opts.sweep && opts.target.empty() && opts.agents.empty())
    throw UsageError("eval --sweep: give --target or an --agent");
  if (opts.agents.size() == 1 && !opts.diagonal && !opts.sweep)
    throw UsageError("eval: a matrix needs two agents, or --diagonal for self-play");
  if (opts.games < 0) throw UsageError("--games must be >= 0");
  std::vector<std::string> specs = opts.agents;
  if (!opts.target.empty()) specs.push_back(opts.target);
  const GameRules rules = eval_rules(opts.game, common, specs);
  const std::uint64_t seed = common.seed.value_or(1);
  const int threads = common.workers.value_or(1);
  const fs::path out = resolve_out_dir(common.out, "runs/eval");

  if (opts.agents.size() >= 2 || (opts.agents.size() == 1 && opts.diagonal)) {
    std::vector<NamedPolicy> agents;
    for (const auto& spec : opts.agents) agents.push_back({spec, policy_from_spec(spec, rules)});
    Rng rng(derive_seed(seed, 11));
    const WinrateMatrix m = winrate_matrix(rules, agents, opts.games, rng, threads, opts.diagonal);
    write_file(out / "winrate_matrix.csv", winrate_matrix_csv(m));
    write_file(out / "winrate_matrix.jsonl", winrate_matrix_jsonl(m));
    std::cout << "winrate of row agent against column agent (" << m.games_per_cell << " games per cell)\n";
    for (std::size_t i = 0; i < m.agents.size(); ++i) {
      std::cout << "  [" << i << "] " << m.agents[i] << ":";
      for (double v : m.entries[i]) std::cout << ' ' << fixed(v);
      std::cout << '\n';
    }
  }

  if (opts.sweep) {
    if (!(opts.goal >= 0.0 && opts.goal < 1.0)) throw UsageError("--goal must lie in [0, 1)");
    const std::string target_spec = opts.target.empty() ? opts.agents.front() : opts.target;
    const auto target = policy_from_spec(target_spec, rules);
    Rng rng(derive_seed(seed, 12));
    const StrengthSweep s = mcts_equivalent_strength(rules, *target, opts.goal, parse_budgets(opts.budgets),
                                                     opts.games, rng, threads, !opts.full_curve);
    std::ostringstream csv;
    csv << "budget,winrate\n";
    for (std::size_t i = 0; i < s.budgets.size(); ++i) csv << s.budgets[i] << ',' << number(s.winrates[i]) << '\n';
    write_file(out / "sweep.csv", csv.str());
    std::ostringstream summary;
    summary << "{\"target\":\"" << target_spec << "\",\"goal\":" << number(opts.goal) << ",\"games_per_budget\":"
            << opts.games << ",\"reached\":" << (s.reached ? std::to_string(*s.reached) : "null") << "}\n";
    write_file(out / "sweep.jsonl", summary.str());
    std::cout << "rollout-MCTS winrate against " << target_spec << ":\n";
    for (std::size_t i = 0; i < s.budgets.size(); ++i)
      std::cout << "  budget " << s.budgets[i] << ": " << fixed(s.winrates[i]) << '\n';
    std::cout << (s.reached ? "goal reached at budget " + std::to_string(*s.reached) : std::string("goal not reached"))
              << '\n';
  }
  std::cout << "outputs: " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
  int seeds = 5;
  std::vector<std::string> modes{"exit", "brexit"};
  std::optional<int> generations;
};

int cmd_sweep(const CommonOptions& common, const SweepOptions& opts) {
  if (opts.seeds < 1) throw UsageError("--seeds must be >= 1");
  const RunConfig base = load_run_config(common);
  std::vector<AblationMode> modes;
  for (const auto& m : opts.modes) {
    try {
      modes.push_back(parse_ablation_mode(m));
    } catch (const std::exception& e) {
      throw UsageError(std::string("--modes: ") + e.what());
    }
  }
  const fs::path out = resolve_out_dir(common.out, "runs/sweep");
  fs::create_directories(out);
  std::ofstream runs_csv(out / "runs.csv", std::ios::trunc);
  runs_csv << runs_csv_header() << '\n';
  for (const AblationMode mode : modes) {
    for (int k = 0; k < opts.seeds; ++k) {
      RunConfig config = base;
      config.mode = mode;
      config.seed = base.seed + static_cast<std::uint64_t>(k);
      if (opts.generations) config.training.generations = *opts.generations;
      const fs::path dir = out / std::string(to_string(mode)) / ("seed_" + std::to_string(config.seed));
      spdlog::info("sweep: {} seed {}", to_string(mode), config.seed);
      Trainer trainer(config, dir);
      trainer.run();
      RunRecord record{std::string(to_string(mode)), config.seed, trainer.generation(), final_eval_winrate(dir),
                       fs::relative(dir, out)};
      runs_csv << to_csv_row(record) << std::endl;
      std::cout << record.label << " seed " << record.seed << ": final eval winrate "
                << (record.final_winrate ? fixed(*record.final_winrate) : std::string("n/a")) << '\n';
    }
  }
  std::cout << "runs table: " << (out / "runs.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct StatsOptions {
  std::string runs;
  int bootstrap = 2000;
  double level = 0.95;
};

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("--level must lie in (0, 1)");
}

int cmd_stats(const CommonOptions& common, const StatsOptions& opts) {
  check_level(opts.level);
  if (opts.bootstrap < 1000) throw UsageError("--bootstrap must be >= 1000");
  const StatsReport r = summarize_runs(read_runs_csv(opts.runs), opts.bootstrap, opts.level, common.seed.value_or(1));
  if (r.summaries.empty()) throw std::runtime_error(opts.runs + ": no runs with a final winrate");
  const fs::path out = resolve_out_dir(common.out, fs::path(opts.runs).parent_path());

  std::ostringstream summary_csv, poi_csv, ks_csv, jsonl;
  summary_csv << "label,runs,statistic,value,ci_lower,ci_upper\n";
  std::cout << "final winrate per label (" << number(opts.level) << " bootstrap interval)\n";
  for (const auto& s : r.summaries) {
    summary_csv << s.label << ',' << s.runs << ',' << s.statistic << ',' << number(s.value) << ','
                << number(s.ci.lower) << ',' << number(s.ci.upper) << '\n';
    jsonl << "{\"table\":\"summary\",\"label\":\"" << s.label << "\",\"runs\":" << s.runs << ",\"statistic\":\""
          << s.statistic << "\",\"value\":" << number(s.value) << ",\"ci_lower\":" << number(s.ci.lower)
          << ",\"ci_upper\":" << number(s.ci.upper) << "}\n";
    std::cout << "  " << s.label << ": " << s.statistic << ' ' << fixed(s.value) << " [" << fixed(s.ci.lower) << ", "
              << fixed(s.ci.upper) << "] over " << s.runs << " runs\n";
  }
  poi_csv << "x,y,poi,ci_lower,ci_upper\n";
  if (!r.poi.empty()) std::cout << "probability of improvement P(x > y)\n";
  for (const auto& p : r.poi) {
    poi_csv << p.x << ',' << p.y << ',' << number(p.poi) << ',' << number(p.ci.lower) << ',' << number(p.ci.upper)
            << '\n';
    jsonl << "{\"table\":\"poi\",\"x\":\"" << p.x << "\",\"y\":\"" << p.y << "\",\"poi\":" << number(p.poi)
          << ",\"ci_lower\":" << number(p.ci.lower) << ",\"ci_upper\":" << number(p.ci.upper) << "}\n";
    std::cout << "  " << p.x << " > " << p.y << ": " << fixed(p.poi) << " [" << fixed(p.ci.lower) << ", "
              << fixed(p.ci.upper) << "]\n";
  }
  ks_csv << "x,y,statistic,p_value,exact\n";
  if (!r.ks.empty()) std::cout << "two-sample Kolmogorov-Smirnov\n";
  for (const auto& k : r.ks) {
    ks_csv << k.x << ',' << k.y << ',' << number(k.statistic) << ',' << number(k.p_value) << ','
           << (k.exact ? "true" : "false") << '\n';
    jsonl << "{\"table\":\"ks\",\"x\":\"" << k.x << "\",\"y\":\"" << k.y << "\",\"statistic\":" << number(k.statistic)
          << ",\"p_value\":" << number(k.p_value) << ",\"exact\":" << (k.exact ? "true" : "false") << "}\n";
    std::cout << "  " << k.x << " vs " << k.y << ": D " << fixed(k.statistic) << "  p " << fixed(k.p_value, 4)
              << (k.exact ? " (exact)" : " (asymptotic)") << '\n';
  }
  write_file(out / "stats_summary.csv", summary_csv.str());
  write_file(out / "stats_poi.csv", poi_csv.str());
  write_file(out / "stats_ks.csv", ks_csv.str());
  write_file(out / "stats.jsonl", jsonl.str());
  return 0;
}

// ---------------------------------------------------------------------------

struct PlotOptions {
  std::string runs;
  std::vector<std::string> run_dirs;  // LABEL=DIR
  int bootstrap = 2000;
  double level = 0.95;
};

int cmd_plot_data(const CommonOptions& common, const PlotOptions& opts) {
  check_level(opts.level);
  if (opts.bootstrap < 100) throw UsageError("--bootstrap must be >= 100");
  if (opts.runs.empty() && opts.run_dirs.empty()) throw UsageError("plot-data: give --runs or --run");
  std::vector<std::pair<std::string, std::vector<fs::path>>> groups;
  auto add = [&](const std::string& label, const fs::path& dir) {
    for (auto& g : groups)
      if (g.first == label) return g.second.push_back(dir);
    groups.push_back({label, {dir}});
  };
  if (!opts.runs.empty()) {
    const fs::path base = fs::path(opts.runs).parent_path();
    for (const auto& r : read_runs_csv(opts.runs)) add(r.label, r.run_dir.is_absolute() ? r.run_dir : base / r.run_dir);
  }
  for (const auto& item : opts.run_dirs) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--run: expected LABEL=DIR, got '" + item + "'");
    add(item.substr(0, eq), item.substr(eq + 1));
  }
  const auto points = plot_series(groups, opts.bootstrap, opts.level, common.seed.value_or(1));
  std::ostringstream csv;
  csv << "label,generation,runs,statistic,winrate,ci_lower,ci_upper\n";
  for (const auto& p : points)
    csv << p.label << ',' << p.generation << ',' << p.summary.runs << ',' << p.summary.statistic << ','
        << number(p.summary.value) << ',' << number(p.summary.ci.lower) << ',' << number(p.summary.ci.upper) << '\n';
  const fs::path default_dir = opts.runs.empty() ? fs::path("runs") : fs::path(opts.runs).parent_path();
  const fs::path out = resolve_out_dir(common.out, default_dir) / "plot_data.csv";
  write_file(out, csv.str());
  std::cout << points.size() << " points written to " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct PlayOptions {
  std::string checkpoint;
  int seat = 0;
  int budget = 200;
};

void print_board(const GameRules& rules, const GameState& s) {
  for (int c = 0; c < rules.width(); ++c) std::cout << c % 10;
  std::cout << '\n' << rules.render(s);
}

int cmd_play(const CommonOptions& common, const PlayOptions& opts) {
  if (opts.seat != 0 && opts.seat != 1) throw UsageError("--seat must be 0 (moves first, x) or 1 (o)");
  if (opts.budget < 1) throw UsageError("--budget must be >= 1");
  const Checkpoint ckpt = load_checkpoint(opts.checkpoint);
  const GameRules rules = make_rules(parse_config(ckpt.config_text, opts.checkpoint));
  const auto agent = make_policy("expert:" + opts.checkpoint + ":" + std::to_string(opts.budget), rules);
  Rng rng(common.seed.value_or(1));
  GameState s = rules.initial_state();
  std::cout << "you are " << (opts.seat == 0 ? "x" : "o") << "; enter a column number\n";
  while (!s.terminal()) {
    print_board(rules, s);
    int action = -1;
    if (s.to_move() == opts.seat) {
      while (true) {
        std::cout << "your move> " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line)) throw std::runtime_error("input closed before the game ended");
        int col = -1;
        const auto first = line.find_first_not_of(" \t\r");
        const auto last = line.find_last_not_of(" \t\r");
        const std::string word = first == std::string::npos ? "" : line.substr(first, last - first + 1);
        const auto res = std::from_chars(word.data(), word.data() + word.size(), col);
        if (word.empty() || res.ec != std::errc() || res.ptr != word.data() + word.size()) {
          std::cout << "not a column number: '" << word << "'\n";
        } else if (col < 0 || col >= rules.num_actions()) {
          std::cout << "column must lie in 0.." << rules.num_actions() - 1 << "\n";
        } else if (!rules.is_legal(s, col)) {
          std::cout << "column " << col << " is full\n";
        } else {
          action = col;
          break;
        }
      }
    } else {
      action = agent->act(s, rng);
      std::cout << "agent plays " << action << "\n";
    }
    s = rules.apply_action(s, action).next_state;
  }
  print_board(rules, s);
  const auto w = s.winner();
  std::cout << "result: " << (!w ? "draw" : (*w == opts.seat ? "you win" : "agent wins")) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best Response Expert Iteration: training, evaluation and reporting"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", common.config, "YAML run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Seed overriding the configuration");
    sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", common.out, std::string("Output directory (else $") + kOutDirEnv + ")");
  };

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train an apprentice");
  add_common(train_cmd, true);
  train_cmd->add_option("--resume", train.resume, "Checkpoint to continue from")->check(CLI::ExistingFile);
  train_cmd->add_option("--generations", train.generations, "Override training.generations")
      ->check(CLI::PositiveNumber);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Winrate matrix and MCTS-equivalent strength");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--agent", eval.agents,
                       "Agent spec: random | heuristic[:EPS] | mcts:B | checkpoint:PATH[:sample] | expert:PATH:B");
  eval_cmd->add_option("--games", eval.games, "Games per matrix cell or sweep budget");
  eval_cmd->add_flag("--diagonal", eval.diagonal, "Fill diagonal cells by self-play");
  eval_cmd->add_option("--game", eval.game, "Board as HxWxN (default: from --config or checkpoint)");
  eval_cmd->add_flag("--sweep", eval.sweep, "Run an MCTS-equivalent-strength sweep");
  eval_cmd->add_option("--target", eval.target, "Sweep target agent (default: first --agent)");
  eval_cmd->add_option("--goal", eval.goal, "Sweep winrate goal for the rollout agent");
  eval_cmd->add_option("--budgets", eval.budgets, "Ascending comma-separated budget grid");
  eval_cmd->add_flag("--full-curve", eval.full_curve, "Evaluate every budget even after the goal is reached");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train several seeds per ablation mode and tabulate results");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--seeds", sweep.seeds, "Runs per mode; seeds count up from the base seed");
  sweep_cmd->add_option("--modes", sweep.modes, "Ablation modes: exit, exit-omfs, brexit-oms, brexit")
      ->delimiter(',');
  sweep_cmd->add_option("--generations", sweep.generations, "Override training.generations")
      ->check(CLI::PositiveNumber);

  StatsOptions stats_opts;
  auto* stats_cmd = app.add_subcommand("stats", "IQM, probability of improvement and KS tables from runs.csv");
  add_common(stats_cmd, false);
  stats_cmd->add_option("--runs", stats_opts.runs, "runs.csv written by sweep")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--bootstrap", stats_opts.bootstrap, "Bootstrap resamples");
  stats_cmd->add_option("--level", stats_opts.level, "Confidence level");

  PlotOptions plot;
  auto* plot_cmd = app.add_subcommand("plot-data", "Per-generation aggregate winrate curves as CSV");
  add_common(plot_cmd, false);
  plot_cmd->add_option("--runs", plot.runs, "runs.csv written by sweep")->check(CLI::ExistingFile);
  plot_cmd->add_option("--run", plot.run_dirs, "Extra run as LABEL=DIR (repeatable)");
  plot_cmd->add_option("--bootstrap", plot.bootstrap, "Bootstrap resamples");
  plot_cmd->add_option("--level", plot.level, "Confidence level");

  PlayOptions play;
  auto* play_cmd = app.add_subcommand("play", "Play against a checkpoint in the terminal");
  play_cmd->add_option("checkpoint", play.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  play_cmd->add_option("--seat", play.seat, "0 moves first, 1 moves second");
  play_cmd->add_option("--budget", play.budget, "Agent search budget");
  play_cmd->add_option("--seed", common.seed, "Seed for the agent's search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*train_cmd) return cmd_train(common, train);
    if (*eval_cmd) return cmd_eval(common, eval);
    if (*sweep_cmd) return cmd_sweep(common, sweep);
    if (*stats_cmd) return cmd_stats(common, stats_opts);
    if (*plot_cmd) return cmd_plot_data(common, plot);
    if (*play_cmd) return cmd_play(common, play);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
