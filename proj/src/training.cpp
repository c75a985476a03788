#include "brexit/training.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include "json.hpp"
#include <ostream>
#include <stdexcept>
#include <string>

#include "brexit/bytes.hpp"

namespace brexit {

std::string_view to_string(ValueTargetVariant variant) {
  switch (variant) {
    case ValueTargetVariant::kRootValue: return "root-value";
    case ValueTargetVariant::kGreedyQ: return "greedy-q";
    case ValueTargetVariant::kChosenQ: return "chosen-q";
    case ValueTargetVariant::kNone: return "none";
  }
  return "unknown";
}

ValueTargetVariant parse_value_target_variant(std::string_view text) {
  for (auto v : {ValueTargetVariant::kRootValue, ValueTargetVariant::kGreedyQ, ValueTargetVariant::kChosenQ,
                 ValueTargetVariant::kNone})
    if (text == to_string(v)) return v;
  throw std::invalid_argument("unknown value-target variant '" + std::string(text) + "'");
}

double blend_value_target(const RootStatistics& root, std::span<const double> mcts_policy, double episode_return,
                          ValueTargetVariant variant) {
  double q = 0.0;
  switch (variant) {
    case ValueTargetVariant::kNone:
      return std::clamp(episode_return, -1.0, 1.0);
    case ValueTargetVariant::kRootValue:
      if (mcts_policy.size() != static_cast<std::size_t>(root.num_actions))
        throw std::invalid_argument("blend_value_target: policy has the wrong length");
      for (std::size_t i = 0; i < root.actions.size(); ++i)
        q += mcts_policy[static_cast<std::size_t>(root.actions[i])] * root.edges[i].mean_value;
      break;
    case ValueTargetVariant::kGreedyQ: {
      // Unvisited edges carry no estimate and are skipped.
      bool any = false;
      for (const EdgeStats& e : root.edges) {
        if (e.visits == 0) continue;
        q = any ? std::max(q, e.mean_value) : e.mean_value;
        any = true;
      }
      if (!any) throw std::invalid_argument("blend_value_target: root has no visited edge");
      break;
    }
    case ValueTargetVariant::kChosenQ:
      q = root.edge(root.most_visited_action()).mean_value;
      break;
    default:
      throw std::invalid_argument("blend_value_target: unknown variant");
  }
  return std::clamp(0.5 * (q + episode_return), -1.0, 1.0);
}

PriorMode prior_mode_for(AblationMode mode) {
  switch (mode) {
    case AblationMode::kExIt:
    case AblationMode::kExItOMFS: return PriorMode::kApprenticeEverywhere;
    case AblationMode::kBRExItOMS: return PriorMode::kLearnedOpponentModels;
    case AblationMode::kBRExIt: return PriorMode::kGroundTruthOpponents;
  }
  throw std::invalid_argument("prior_mode_for: unknown mode");
}

EpisodeResult collect_episode(const GameRules& rules, const Evaluator& apprentice, const Policy& opponent,
                              const CollectionConfig& config, Rng& rng) {
  PriorSource priors{prior_mode_for(config.mode), {}};
  if (priors.mode == PriorMode::kGroundTruthOpponents) priors.opponent_policies.push_back(&opponent);
  const Mcts expert(rules, config.search, priors, &apprentice);
  const bool om = uses_opponent_models(config.mode);
  const std::size_t num_actions = static_cast<std::size_t>(rules.num_actions());

  struct Pending {
    TrainingSample sample;
    RootStatistics root;
    int ply = 0;
  };
  std::vector<Pending> pending;

  EpisodeResult result;
  result.agent_seat = static_cast<int>(uniform_index(rng, kNumPlayers));
  GameState state = rules.initial_state();
  while (!state.terminal()) {
    int action = -1;
    if (state.to_move() == result.agent_seat) {
      SearchResult search = expert.search(state, rng);
      const double tau = state.move_count() < config.temperature_plies ? config.tau_explore : config.tau_exploit;
      Pending p;
      p.sample.state = state;
      p.sample.mcts_policy = extract_policy(search.root.visit_counts(), tau);
      if (om) p.sample.opponent_records.emplace();
      p.root = std::move(search.root);
      p.ply = state.move_count();
      action = static_cast<int>(sample_categorical(p.sample.mcts_policy, rng));
      pending.push_back(std::move(p));
    } else {
      std::vector<double> dist = opponent.distribution(state, rng);
      const std::string seat = "seat " + std::to_string(state.to_move()) + " (" + opponent.name() + ")";
      if (dist.size() != num_actions)
        throw std::runtime_error("opponent in " + seat + " returned a distribution of the wrong length");
      action = static_cast<int>(sample_categorical(dist, rng));
      if (!rules.is_legal(state, action))
        throw std::runtime_error("opponent in " + seat + " chose illegal action " + std::to_string(action));
      if (om && !pending.empty()) {
        OpponentRecord record;
        record.state = state;
        record.opponent_index = 0;
        if (config.target_encoding == OpponentTargetEncoding::kOneHot) {
          record.target.assign(num_actions, 0.0);
          record.target[static_cast<std::size_t>(action)] = 1.0;
        } else {
          double sum = 0.0;
          for (double p : dist) sum += p;
          for (double& p : dist) p /= sum;
          record.target = std::move(dist);
        }
        pending.back().sample.opponent_records->push_back(std::move(record));
      }
    }
    state = rules.apply_action(state, action).next_state;
  }

  result.plies = state.move_count();
  result.winner = state.winner();
  result.agent_return = rules.rewards(state)[static_cast<std::size_t>(result.agent_seat)];
  result.samples.reserve(pending.size());
  for (Pending& p : pending) {
    const double discount = std::pow(config.gamma, result.plies - 1 - p.ply);
    p.sample.value_target =
        blend_value_target(p.root, p.sample.mcts_policy, discount * result.agent_return, config.value_target);
    result.samples.push_back(std::move(p.sample));
  }
  return result;
}

std::pair<TrainingSample, TrainingSample> augment_symmetry(const GameRules& rules, const TrainingSample& sample) {
  TrainingSample twin;
  twin.state = rules.mirror_state(sample.state);
  twin.mcts_policy = rules.mirror_policy(sample.mcts_policy);
  twin.value_target = sample.value_target;
  if (sample.opponent_records) {
    twin.opponent_records.emplace();
    for (const OpponentRecord& r : *sample.opponent_records)
      twin.opponent_records->push_back(
          OpponentRecord{rules.mirror_state(r.state), rules.mirror_policy(r.target), r.opponent_index});
  }
  return {sample, std::move(twin)};
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 2) throw std::invalid_argument("replay buffer capacity must be at least 2");
}

void ReplayBuffer::make_room(std::size_t incoming) {
  while (!samples_.empty() && samples_.size() + incoming > capacity_) samples_.pop_front();
}

void ReplayBuffer::insert_augmented(const GameRules& rules, const TrainingSample& sample) {
  auto [original, twin] = augment_symmetry(rules, sample);  // may throw: nothing inserted
  make_room(2);
  samples_.push_back(std::move(original));
  samples_.push_back(std::move(twin));
  insertions_ += 2;
}

void ReplayBuffer::push(TrainingSample sample) {
  make_room(1);
  samples_.push_back(std::move(sample));
  ++insertions_;
}

namespace {

void write_sample(ByteWriter& w, const GameRules& rules, const TrainingSample& s) {
  w.put_bytes(rules.pack(s.state));
  w.put_doubles(s.mcts_policy);
  w.put<double>(s.value_target);
  w.put<std::uint8_t>(s.opponent_records ? 1 : 0);
  if (!s.opponent_records) return;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.opponent_records->size()));
  for (const OpponentRecord& r : *s.opponent_records) {
    w.put_bytes(rules.pack(r.state));
    w.put_doubles(r.target);
    w.put<std::int32_t>(r.opponent_index);
  }
}

TrainingSample read_sample(ByteReader& r, const GameRules& rules) {
  TrainingSample s;
  s.state = rules.unpack(r.get_bytes(rules.packed_size()));
  s.mcts_policy = r.get_doubles();
  s.value_target = r.get<double>();
  if (r.get<std::uint8_t>() == 0) return s;
  s.opponent_records.emplace();
  const auto n = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    OpponentRecord rec;
    rec.state = rules.unpack(r.get_bytes(rules.packed_size()));
    rec.target = r.get_doubles();
    rec.opponent_index = r.get<std::int32_t>();
    s.opponent_records->push_back(std::move(rec));
  }
  return s;
}

}  // namespace

std::vector<std::uint8_t> ReplayBuffer::to_bytes(const GameRules& rules) const {
  ByteWriter w;
  w.put<std::uint64_t>(capacity_);
  w.put<std::uint64_t>(insertions_);
  w.put<std::uint64_t>(samples_.size());
  for (const TrainingSample& s : samples_) write_sample(w, rules, s);
  return w.take();
}

ReplayBuffer ReplayBuffer::from_bytes(const GameRules& rules, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ReplayBuffer buffer(static_cast<std::size_t>(r.get<std::uint64_t>()));
  const auto insertions = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  if (count > buffer.capacity_) throw std::runtime_error("replay buffer holds more samples than its capacity");
  for (std::uint64_t i = 0; i < count; ++i) buffer.samples_.push_back(read_sample(r, rules));
  if (!r.done()) throw std::runtime_error("trailing bytes after replay buffer");
  buffer.insertions_ = insertions;
  return buffer;
}

void shuffle_indices(std::vector<std::size_t>& indices, Rng& rng) {
  for (std::size_t i = indices.size(); i > 1; --i) std::swap(indices[i - 1], indices[uniform_index(rng, i)]);
}

std::vector<LossBreakdown> update_apprentice(Network& network, AdamState& optimizer, const GameRules& rules,
                                             const ReplayBuffer& buffer, const UpdateConfig& config, Rng& rng) {
  if (buffer.size() == 0) throw std::invalid_argument("update_apprentice: replay buffer is empty");
  if (config.batch_size < 1 || config.epochs < 0)
    throw std::invalid_argument("update_apprentice: batch size and epochs must be positive");
  const std::size_t n = buffer.size();
  const std::size_t batch_size = std::min(n, static_cast<std::size_t>(config.batch_size));
  std::vector<std::size_t> order(n);
  std::vector<LossBreakdown> history;
  std::vector<TrainingSample> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle_indices(order, rng);
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(buffer[order[i]]);
      GradientResult g = backward(network, rules, batch, config.mode, config.objective, config.threads);
      const std::vector<double> clipped = clip_gradient_norm(g.gradient, config.grad_clip);
      adam_step(network.parameters(), clipped, config.learning_rate, optimizer);
      network.quantize_parameters();
      history.push_back(g.losses);
    }
  }
  return history;
}

std::size_t SelfPlayPopulation::sample_index(Rng& rng) const {
  if (snapshots_.empty()) throw std::logic_error("self-play population is empty");
  return uniform_index(rng, snapshots_.size());
}

std::shared_ptr<const Policy> sample_selfplay_opponent(const SelfPlayPopulation& population,
                                                       std::shared_ptr<const Network> current,
                                                       const GameRules& rules, Rng& rng) {
  std::shared_ptr<const Network> chosen;
  if (population.empty()) {
    spdlog::debug("self-play population is empty; using the current apprentice as opponent");
    chosen = std::move(current);
  } else {
    chosen = population[population.sample_index(rng)];
  }
  if (!chosen) throw std::invalid_argument("sample_selfplay_opponent: no network available");
  auto evaluator = std::make_shared<NetworkEvaluator>(std::move(chosen), rules);
  return std::make_shared<ApprenticePolicy>(std::move(evaluator), rules, false);
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kDatasetSchema = "brexit.training-sample";
constexpr int kDatasetVersion = 1;

}  // namespace

void write_dataset(std::ostream& out, const GameRules& rules, std::span<const TrainingSample> samples) {
  const GameConfig& g = rules.config();
  nlohmann::json header = {
      {"schema", kDatasetSchema},
      {"version", kDatasetVersion},
      {"game", {{"height", g.height}, {"width", g.width}, {"connect_n", g.connect_n}, {"gravity", g.gravity}}},
      {"fields",
       {{"state", "HxW:to_move:cells, rows top-down, '.' empty, 'x' player 0, 'o' player 1"},
        {"mcts_policy", "search policy over all actions"},
        {"opponent_records", "null, or list of {state, target, opponent}"},
        {"value_target", "blended value target z in [-1, 1]"}}},
      {"count", samples.size()}};
  out << header.dump() << '\n';
  for (const TrainingSample& s : samples) {
    nlohmann::json row = {{"state", rules.serialize(s.state)},
                          {"mcts_policy", s.mcts_policy},
                          {"value_target", s.value_target}};
    if (s.opponent_records) {
      nlohmann::json records = nlohmann::json::array();
      for (const OpponentRecord& r : *s.opponent_records)
        records.push_back({{"state", rules.serialize(r.state)}, {"target", r.target}, {"opponent", r.opponent_index}});
      row["opponent_records"] = std::move(records);
    } else {
      row["opponent_records"] = nullptr;
    }
    out << row.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) << '\n';
  }
}

std::vector<TrainingSample> read_dataset(std::istream& in, const GameRules& rules) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset: missing header line");
  const nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("schema", "") != kDatasetSchema || header.value("version", 0) != kDatasetVersion)
    throw std::runtime_error("dataset: unsupported schema");
  const auto& g = header.at("game");
  if (g.at("height") != rules.config().height || g.at("width") != rules.config().width ||
      g.at("connect_n") != rules.config().connect_n)
    throw std::runtime_error("dataset: game does not match the configured rules");
  std::vector<TrainingSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json row = nlohmann::json::parse(line);
    TrainingSample s;
    s.state = rules.parse(row.at("state").get<std::string>());
    s.mcts_policy = row.at("mcts_policy").get<std::vector<double>>();
    s.value_target = row.at("value_target").get<double>();
    if (!row.at("opponent_records").is_null()) {
      s.opponent_records.emplace();
      for (const auto& r : row.at("opponent_records"))
        s.opponent_records->push_back(OpponentRecord{rules.parse(r.at("state").get<std::string>()),
                                                     r.at("target").get<std::vector<double>>(),
                                                     r.at("opponent").get<int>()});
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace brexit
