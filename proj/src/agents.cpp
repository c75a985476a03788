#include "brexit/agents.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

#include "brexit/checkpoint.hpp"
#include "brexit/mcts.hpp"

namespace brexit {

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

int parse_budget(const std::string& text, std::string_view spec) {
  int value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || value < 1)
    throw std::invalid_argument("agent '" + std::string(spec) + "': budget must be a positive integer");
  return value;
}

double parse_probability(const std::string& text, std::string_view spec) {
  std::size_t used = 0;
  double value = -1.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
  }
  if (used != text.size() || !(value >= 0.0 && value <= 1.0))
    throw std::invalid_argument("agent '" + std::string(spec) + "': epsilon must lie in [0, 1]");
  return value;
}

}  // namespace

std::shared_ptr<const Network> load_apprentice(const std::string& path, const GameRules& rules) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.network.height != rules.height() || ckpt.network.width != rules.width() ||
      ckpt.network.num_actions != rules.num_actions())
    throw std::invalid_argument(path + ": checkpoint was trained on a different board");
  return std::make_shared<const Network>(restore_network(ckpt.network, ckpt.parameters));
}

std::shared_ptr<const Policy> make_policy(std::string_view spec, const GameRules& rules) {
  const auto parts = split(spec, ':');
  const std::string& kind = parts[0];
  if (kind == "random" && parts.size() == 1) return std::make_shared<UniformRandomPolicy>(rules);
  if (kind == "heuristic" && parts.size() <= 2)
    return std::make_shared<HeuristicPolicy>(rules, parts.size() == 2 ? parse_probability(parts[1], spec) : 0.0);
  if (kind == "mcts" && parts.size() == 2) return MctsPolicy::rollout_agent(rules, parse_budget(parts[1], spec));
  if (kind == "checkpoint" && (parts.size() == 2 || (parts.size() == 3 && parts[2] == "sample"))) {
    auto evaluator = std::make_shared<NetworkEvaluator>(load_apprentice(parts[1], rules), rules);
    return std::make_shared<ApprenticePolicy>(std::move(evaluator), rules, parts.size() == 2);
  }
  if (kind == "expert" && parts.size() == 3) {
    const int budget = parse_budget(parts[2], spec);
    auto evaluator = std::make_shared<NetworkEvaluator>(load_apprentice(parts[1], rules), rules);
    SearchConfig search;
    search.budget = budget;
    return std::make_shared<MctsPolicy>(rules, search, PriorSource{PriorMode::kApprenticeEverywhere, {}},
                                        std::move(evaluator), "expert:" + std::to_string(budget));
  }
  throw std::invalid_argument("unknown agent spec '" + std::string(spec) +
                              "' (expected random, heuristic[:EPS], mcts:BUDGET, checkpoint:PATH[:sample], "
                              "expert:PATH:BUDGET)");
}

std::shared_ptr<const Policy> make_opponent(const OpponentConfig& o, const GameRules& rules) {
  if (o.kind == "random") return std::make_shared<UniformRandomPolicy>(rules);
  if (o.kind == "heuristic") return std::make_shared<HeuristicPolicy>(rules, o.epsilon);
  if (o.kind == "mcts") return MctsPolicy::rollout_agent(rules, o.budget);
  if (o.kind == "checkpoint") {
    auto evaluator = std::make_shared<NetworkEvaluator>(load_apprentice(o.path, rules), rules);
    return std::make_shared<ApprenticePolicy>(std::move(evaluator), rules, o.greedy);
  }
  throw std::invalid_argument("opponent kind '" + o.kind + "' is not a fixed policy");
}

}  // namespace brexit
