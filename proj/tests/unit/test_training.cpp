#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "brexit/training.hpp"
#include "fixtures.hpp"

using namespace brexit;

namespace {

RootStatistics make_root(std::vector<int> actions, std::vector<int> visits, std::vector<double> q, int num_actions) {
  RootStatistics root;
  root.actions = std::move(actions);
  root.num_actions = num_actions;
  for (std::size_t i = 0; i < visits.size(); ++i) root.edges.push_back(EdgeStats{visits[i], q[i], 0.0});
  return root;
}

bool same_sample(const TrainingSample& a, const TrainingSample& b) {
  if (!(a.state == b.state) || a.mcts_policy != b.mcts_policy || a.value_target != b.value_target) return false;
  if (a.opponent_records.has_value() != b.opponent_records.has_value()) return false;
  if (!a.opponent_records) return true;
  if (a.opponent_records->size() != b.opponent_records->size()) return false;
  for (std::size_t i = 0; i < a.opponent_records->size(); ++i) {
    const auto& ra = (*a.opponent_records)[i];
    const auto& rb = (*b.opponent_records)[i];
    if (!(ra.state == rb.state) || ra.target != rb.target || ra.opponent_index != rb.opponent_index) return false;
  }
  return true;
}

struct Apprentice {
  std::shared_ptr<Network> net;
  std::shared_ptr<NetworkEvaluator> evaluator;
};

Apprentice make_apprentice(const GameRules& rules, AblationMode mode, std::uint64_t seed = 7) {
  Apprentice a;
  a.net = std::make_shared<Network>(network_config_for(rules, mode), seed);
  a.evaluator = std::make_shared<NetworkEvaluator>(a.net, rules);
  return a;
}

CollectionConfig small_collection(AblationMode mode) {
  CollectionConfig c;
  c.mode = mode;
  c.search.budget = 8;
  return c;
}

class IllegalPolicy final : public Policy {
 public:
  explicit IllegalPolicy(GameRules rules) : rules_(std::move(rules)) {}
  std::vector<double> distribution(const GameState& state, Rng&) const override {
    std::vector<double> d(static_cast<std::size_t>(rules_.num_actions()), 0.0);
    for (int a = 0; a < rules_.num_actions(); ++a)
      if (!rules_.is_legal(state, a)) d[static_cast<std::size_t>(a)] = 1.0;
    if (std::all_of(d.begin(), d.end(), [](double p) { return p == 0.0; })) d[0] = 1.0;
    return d;
  }
  std::string name() const override { return "cheater"; }

 private:
  GameRules rules_;
};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("blend_value_target worked examples") {
  const auto root = make_root({0, 1, 2}, {10, 3, 0}, {0.5, 0.2, 0.9}, 3);
  CHECK(blend_value_target(root, {}, 1.0, ValueTargetVariant::kChosenQ) == doctest::Approx(0.75));
  CHECK(blend_value_target(root, {}, -1.0, ValueTargetVariant::kNone) == -1.0);
  const std::vector<double> one_hot{0.0, 1.0, 0.0};
  CHECK(blend_value_target(root, one_hot, 0.2, ValueTargetVariant::kRootValue) == doctest::Approx(0.2));
  // The unvisited edge's stale 0.9 is ignored.
  CHECK(blend_value_target(root, {}, 0.0, ValueTargetVariant::kGreedyQ) == doctest::Approx(0.25));
  const std::vector<double> pi{0.5, 0.5, 0.0};
  CHECK(blend_value_target(root, pi, 0.0, ValueTargetVariant::kRootValue) == doctest::Approx(0.175));
  CHECK_THROWS_AS(parse_value_target_variant("mean-q"), std::invalid_argument);
  for (auto v : {ValueTargetVariant::kRootValue, ValueTargetVariant::kGreedyQ, ValueTargetVariant::kChosenQ,
                 ValueTargetVariant::kNone})
    CHECK(parse_value_target_variant(to_string(v)) == v);
}

TEST_CASE("blended value targets stay in [-1, 1] and draws give zero with no search bias") {
  Rng rng(3);
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(uniform_index(rng, 7));
    std::vector<int> actions, visits;
    std::vector<double> q, pi(static_cast<std::size_t>(n), 0.0);
    for (int a = 0; a < n; ++a) {
      actions.push_back(a);
      visits.push_back(static_cast<int>(uniform_index(rng, 5)) + (a == 0 ? 1 : 0));
      q.push_back(uniform(rng, -1.0, 1.0));
      pi[static_cast<std::size_t>(a)] = 1.0 / n;
    }
    const auto root = make_root(actions, visits, q, n);
    const double g = uniform01(rng) < 0.3 ? 0.0 : (uniform01(rng) < 0.5 ? -1.0 : 1.0);
    for (auto v : {ValueTargetVariant::kRootValue, ValueTargetVariant::kGreedyQ, ValueTargetVariant::kChosenQ,
                   ValueTargetVariant::kNone}) {
      const double z = blend_value_target(root, pi, g, v);
      CHECK(z >= -1.0);
      CHECK(z <= 1.0);
    }
    CHECK(blend_value_target(root, pi, 0.0, ValueTargetVariant::kNone) == 0.0);
  }
}

TEST_CASE("augment_symmetry reflects states, policies and opponent records") {
  const auto rules = GameRules::connect4();
  TrainingSample s;
  s.state = rules.initial_state();
  s.mcts_policy = {1, 0, 0, 0, 0, 0, 0};
  s.value_target = 0.3;
  s.opponent_records.emplace();
  s.opponent_records->push_back(OpponentRecord{rules.apply_action(s.state, 0).next_state, {0, 0.5, 0.5, 0, 0, 0, 0}, 0});
  const auto [orig, twin] = augment_symmetry(rules, s);
  CHECK(same_sample(orig, s));
  CHECK(twin.mcts_policy == std::vector<double>{0, 0, 0, 0, 0, 0, 1});
  CHECK(twin.value_target == 0.3);
  CHECK((*twin.opponent_records)[0].target == std::vector<double>{0, 0, 0, 0, 0.5, 0.5, 0});
  CHECK((*twin.opponent_records)[0].state == rules.apply_action(s.state, 6).next_state);

  TrainingSample sym;
  sym.state = rules.apply_action(rules.initial_state(), 3).next_state;
  sym.mcts_policy = {0.1, 0.1, 0.2, 0.2, 0.2, 0.1, 0.1};
  const auto [a, b] = augment_symmetry(rules, sym);
  CHECK(same_sample(a, b));
}

TEST_CASE("augment_symmetry is an involution on collected samples") {
  const auto rules = GameRules::connect4(4, 5, 3);
  auto app = make_apprentice(rules, AblationMode::kBRExIt);
  UniformRandomPolicy opponent(rules);
  Rng rng(11);
  int checked = 0;
  for (int e = 0; e < 5; ++e) {
    const auto episode = collect_episode(rules, *app.evaluator, opponent, small_collection(AblationMode::kBRExIt), rng);
    for (const auto& s : episode.samples) {
      CHECK(same_sample(augment_symmetry(rules, augment_symmetry(rules, s).second).second, s));
      ++checked;
    }
  }
  CHECK(checked > 5);
}

TEST_CASE("replay buffer is bounded, evicts oldest first and inserts twins together") {
  const auto rules = GameRules::connect4(4, 5, 3);
  CHECK_THROWS_AS(ReplayBuffer(1), std::invalid_argument);
  ReplayBuffer buffer(5);
  std::vector<TrainingSample> inserted;
  Rng rng(2);
  for (int i = 0; i < 9; ++i) {
    TrainingSample s = testing::random_sample(rules, rng, AblationMode::kExIt);
    s.value_target = i;
    buffer.insert_augmented(rules, s);
    const auto [a, b] = augment_symmetry(rules, s);
    inserted.push_back(a);
    inserted.push_back(b);
    CHECK(buffer.size() <= buffer.capacity());
    // The buffer always holds the most recent insertions, in order.
    const std::size_t n = buffer.size();
    for (std::size_t k = 0; k < n; ++k) CHECK(same_sample(buffer[k], inserted[inserted.size() - n + k]));
    CHECK(buffer[n - 1].value_target == buffer[n - 2].value_target);
  }
  CHECK(buffer.insertions() == 18);
  CHECK(buffer.size() == 5);
}

TEST_CASE("replay buffer byte round trip") {
  const auto rules = GameRules::connect4(4, 5, 3);
  ReplayBuffer buffer(40);
  Rng rng(5);
  for (int i = 0; i < 25; ++i) buffer.insert_augmented(rules, testing::random_sample(rules, rng, AblationMode::kBRExIt));
  buffer.push(testing::random_sample(rules, rng, AblationMode::kExIt));
  const auto bytes = buffer.to_bytes(rules);
  const auto restored = ReplayBuffer::from_bytes(rules, bytes);
  CHECK(restored.size() == buffer.size());
  CHECK(restored.capacity() == buffer.capacity());
  CHECK(restored.insertions() == buffer.insertions());
  CHECK(restored.to_bytes(rules) == bytes);
  for (std::size_t i = 0; i < buffer.size(); ++i) CHECK(same_sample(restored[i], buffer[i]));
  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 3);
  CHECK_THROWS(ReplayBuffer::from_bytes(rules, truncated));
}

TEST_CASE("collect_episode against a uniform opponent records uniform full-distribution targets") {
  const auto rules = GameRules::connect4(4, 5, 3);
  auto app = make_apprentice(rules, AblationMode::kBRExIt);
  UniformRandomPolicy opponent(rules);
  Rng rng(21);
  std::array<int, 2> seats{0, 0};
  for (int e = 0; e < 20; ++e) {
    const auto ep = collect_episode(rules, *app.evaluator, opponent, small_collection(AblationMode::kBRExIt), rng);
    ++seats[static_cast<std::size_t>(ep.agent_seat)];
    std::size_t records = 0;
    for (const auto& s : ep.samples) {
      CHECK(s.state.to_move() == ep.agent_seat);
      double sum = 0.0;
      for (double p : s.mcts_policy) sum += p;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
      REQUIRE(s.opponent_records.has_value());
      CHECK(s.opponent_records->size() <= 1);
      for (const auto& r : *s.opponent_records) {
        ++records;
        CHECK(r.state.to_move() != ep.agent_seat);
        const auto legal = rules.legal_actions(r.state);
        for (int a = 0; a < rules.num_actions(); ++a) {
          const bool is_legal = std::find(legal.begin(), legal.end(), a) != legal.end();
          CHECK(r.target[static_cast<std::size_t>(a)] == doctest::Approx(is_legal ? 1.0 / legal.size() : 0.0));
        }
      }
    }
    // One record per opponent turn taken after the agent's first move.
    const int first_agent_ply = ep.agent_seat;
    const int opponent_turns_after = (ep.plies - first_agent_ply) / 2;
    CHECK(records == static_cast<std::size_t>(opponent_turns_after));
    CHECK(ep.samples.size() == static_cast<std::size_t>((ep.plies - first_agent_ply + 1) / 2));
  }
  CHECK(seats[0] > 0);
  CHECK(seats[1] > 0);
}

TEST_CASE("collect_episode one-hot targets and modes without opponent models") {
  const auto rules = GameRules::connect4(4, 5, 3);
  HeuristicPolicy opponent(rules, 0.5);
  Rng rng(4);
  {
    auto app = make_apprentice(rules, AblationMode::kBRExItOMS);
    auto cfg = small_collection(AblationMode::kBRExItOMS);
    cfg.target_encoding = OpponentTargetEncoding::kOneHot;
    int seen = 0;
    for (int e = 0; e < 5; ++e)
      for (const auto& s : collect_episode(rules, *app.evaluator, opponent, cfg, rng).samples)
        for (const auto& r : *s.opponent_records) {
          CHECK(std::count(r.target.begin(), r.target.end(), 1.0) == 1);
          CHECK(std::count(r.target.begin(), r.target.end(), 0.0) == rules.num_actions() - 1);
          ++seen;
        }
    CHECK(seen > 0);
  }
  {
    auto app = make_apprentice(rules, AblationMode::kExIt);
    const auto ep = collect_episode(rules, *app.evaluator, opponent, small_collection(AblationMode::kExIt), rng);
    for (const auto& s : ep.samples) CHECK_FALSE(s.opponent_records.has_value());
  }
}

TEST_CASE("collect_episode writes the signed episode return into every sample") {
  const auto rules = GameRules::connect4(4, 5, 3);
  auto app = make_apprentice(rules, AblationMode::kExIt);
  UniformRandomPolicy opponent(rules);
  auto cfg = small_collection(AblationMode::kExIt);
  cfg.value_target = ValueTargetVariant::kNone;
  Rng rng(8);
  bool saw_p0_win = false, saw_loss = false;
  for (int e = 0; e < 60 && !(saw_p0_win && saw_loss); ++e) {
    const auto ep = collect_episode(rules, *app.evaluator, opponent, cfg, rng);
    for (const auto& s : ep.samples) CHECK(s.value_target == ep.agent_return);
    if (ep.agent_seat == 0 && ep.winner == 0) {
      saw_p0_win = true;
      for (const auto& s : ep.samples) CHECK(s.value_target == 1.0);
    }
    if (ep.winner.has_value() && *ep.winner != ep.agent_seat) {
      saw_loss = true;
      CHECK(ep.agent_return == -1.0);
    }
  }
  CHECK(saw_p0_win);

  cfg.gamma = 0.5;
  const auto ep = collect_episode(rules, *app.evaluator, opponent, cfg, rng);
  const auto& last = ep.samples.back();
  const double expected = std::pow(0.5, ep.plies - 1 - last.state.move_count()) * ep.agent_return;
  CHECK(last.value_target == doctest::Approx(expected));
}

TEST_CASE("collect_episode names the seat of an illegal opponent") {
  const auto rules = GameRules::connect4(4, 5, 3);
  auto app = make_apprentice(rules, AblationMode::kExIt);
  IllegalPolicy cheater(rules);
  Rng rng(1);
  // Fill a column first so that an illegal choice exists; the agent may move first.
  bool thrown = false;
  for (int e = 0; e < 10 && !thrown; ++e) {
    try {
      collect_episode(rules, *app.evaluator, cheater, small_collection(AblationMode::kExIt), rng);
    } catch (const std::runtime_error& err) {
      thrown = std::string(err.what()).find("seat") != std::string::npos;
    }
  }
  CHECK(thrown);
}

TEST_CASE("update_apprentice step count and determinism") {
  const auto rules = GameRules::connect4(4, 5, 3);
  ReplayBuffer buffer(512);
  Rng data_rng(31);
  for (int i = 0; i < 256; ++i) buffer.insert_augmented(rules, testing::random_sample(rules, data_rng, AblationMode::kExIt));
  REQUIRE(buffer.size() == 512);

  UpdateConfig cfg;
  cfg.mode = AblationMode::kExIt;
  auto run = [&](int threads) {
    Network net(network_config_for(rules, cfg.mode), 3);
    AdamState adam;
    Rng rng(99);
    UpdateConfig c = cfg;
    c.threads = threads;
    auto history = update_apprentice(net, adam, rules, buffer, c, rng);
    return std::make_pair(history, std::vector<double>(net.parameters().begin(), net.parameters().end()));
  };
  const auto [h1, p1] = run(1);
  const auto [h2, p2] = run(4);
  CHECK(h1.size() == 5);
  REQUIRE(h2.size() == h1.size());
  for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h1[i].total == h2[i].total);
  CHECK(p1 == p2);

  cfg.batch_size = 200;
  cfg.epochs = 2;
  Network net(network_config_for(rules, cfg.mode), 3);
  AdamState adam;
  Rng rng(1);
  CHECK(update_apprentice(net, adam, rules, buffer, cfg, rng).size() == 6);  // 200 + 200 + 112 per epoch
  CHECK(adam.step == 6);

  ReplayBuffer empty(4);
  CHECK_THROWS_AS(update_apprentice(net, adam, rules, empty, cfg, rng), std::invalid_argument);
}

TEST_CASE("update_apprentice overfits a handful of samples") {
  const auto rules = GameRules::connect4(4, 5, 3);
  ReplayBuffer buffer(8);
  Rng data_rng(17);
  for (int i = 0; i < 8; ++i) {
    TrainingSample s = testing::random_sample(rules, data_rng, AblationMode::kExIt);
    const auto legal = rules.legal_actions(s.state);
    s.mcts_policy.assign(static_cast<std::size_t>(rules.num_actions()), 0.0);
    s.mcts_policy[static_cast<std::size_t>(legal[uniform_index(data_rng, legal.size())])] = 1.0;
    buffer.push(s);
  }
  Network net(network_config_for(rules, AblationMode::kExIt), 5);
  AdamState adam;
  UpdateConfig cfg;
  cfg.mode = AblationMode::kExIt;
  cfg.epochs = 200;
  cfg.batch_size = 8;
  Rng rng(3);
  update_apprentice(net, adam, rules, buffer, cfg, rng);
  const std::vector<TrainingSample> all(buffer.samples().begin(), buffer.samples().end());
  const auto final_losses = compute_losses(net, rules, all, AblationMode::kExIt);
  MESSAGE("policy loss after 200 epochs: " << final_losses.policy_loss);
  CHECK(final_losses.policy_loss < 0.05);
}

TEST_CASE("opponent-model cross-entropy to the true opponent decreases on a fixed buffer") {
  const auto rules = GameRules::connect4(4, 5, 3);
  HeuristicPolicy opponent(rules, 0.3);
  auto app = make_apprentice(rules, AblationMode::kExItOMFS);
  Rng rng(12);
  ReplayBuffer buffer(4000);
  for (int e = 0; e < 40; ++e)
    for (const auto& s :
         collect_episode(rules, *app.evaluator, opponent, small_collection(AblationMode::kExItOMFS), rng).samples)
      buffer.insert_augmented(rules, s);

  // Every opponent state in the buffer, paired with the opponent's exact distribution.
  std::vector<std::pair<GameState, std::vector<double>>> probe;
  Rng probe_rng(77);
  for (const auto& sample : buffer.samples())
    for (const auto& r : *sample.opponent_records) probe.emplace_back(r.state, opponent.distribution(r.state, probe_rng));
  REQUIRE(probe.size() > 50);
  auto cross_entropy = [&](const Network& net) {
    double total = 0.0;
    for (const auto& [s, target] : probe) {
      const auto out = net.forward(rules.encode_state(s, s.to_move()), rules.legal_mask(s));
      for (std::size_t a = 0; a < target.size(); ++a)
        if (target[a] > 0.0) total -= target[a] * std::log(std::max(out.opponent_models[0][a], 1e-300));
    }
    return total / static_cast<double>(probe.size());
  };

  Network net(network_config_for(rules, AblationMode::kExItOMFS), 9);
  AdamState adam;
  UpdateConfig cfg;
  cfg.mode = AblationMode::kExItOMFS;
  cfg.epochs = 10;
  cfg.batch_size = 64;
  std::vector<double> ce{cross_entropy(net)};
  for (int checkpoint = 0; checkpoint < 3; ++checkpoint) {
    update_apprentice(net, adam, rules, buffer, cfg, rng);
    ce.push_back(cross_entropy(net));
  }
  MESSAGE("opponent-model cross-entropy: " << ce[0] << " " << ce[1] << " " << ce[2] << " " << ce[3]);
  CHECK(ce[1] < ce[0]);
  CHECK(ce[2] < ce[1]);
  CHECK(ce[3] < ce[2]);
}

TEST_CASE("self-play population sampling is uniform and snapshots stay frozen") {
  const auto rules = GameRules::connect4(4, 5, 3);
  const auto cfg = network_config_for(rules, AblationMode::kExIt);
  SelfPlayPopulation population;
  Rng rng(123);
  CHECK_THROWS_AS(population.sample_index(rng), std::logic_error);
  auto live = std::make_shared<Network>(cfg, 1);
  {
    // Empty population falls back to the current apprentice.
    auto policy = sample_selfplay_opponent(population, live, rules, rng);
    const auto s = rules.initial_state();
    Rng a(1), b(1);
    ApprenticePolicy direct(std::make_shared<NetworkEvaluator>(live, rules), rules, false);
    CHECK(policy->distribution(s, a) == direct.distribution(s, b));
  }
  population.add(std::make_shared<const Network>(cfg, 10));
  for (int i = 0; i < 20; ++i) CHECK(population.sample_index(rng) == 0);
  for (std::uint64_t k = 11; k < 14; ++k) population.add(std::make_shared<const Network>(cfg, k));

  std::array<int, 4> counts{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[population.sample_index(rng)];
  double chi2 = 0.0;
  for (int c : counts) {
    CHECK(std::abs(c / static_cast<double>(draws) - 0.25) < 0.02);
    chi2 += (c - draws / 4.0) * (c - draws / 4.0) / (draws / 4.0);
  }
  CHECK(chi2 < 16.27);  // chi-square, 3 dof, p = 0.001

  // Snapshot a live network, keep training the live copy, the snapshot's behaviour is unchanged.
  auto snapshot = std::make_shared<const Network>(*live);
  SelfPlayPopulation frozen;
  frozen.add(snapshot);
  const auto state = rules.from_rows(std::vector<std::string_view>{".....", ".....", ".....", "..x.."});
  Rng r1(5);
  const auto before = sample_selfplay_opponent(frozen, live, rules, r1)->distribution(state, r1);
  ReplayBuffer buffer(64);
  Rng data_rng(6);
  for (int i = 0; i < 32; ++i) buffer.insert_augmented(rules, testing::random_sample(rules, data_rng, AblationMode::kExIt));
  AdamState adam;
  UpdateConfig ucfg;
  ucfg.mode = AblationMode::kExIt;
  ucfg.epochs = 3;
  update_apprentice(*live, adam, rules, buffer, ucfg, data_rng);
  Rng r2(5);
  const auto after = sample_selfplay_opponent(frozen, live, rules, r2)->distribution(state, r2);
  CHECK(before == after);
  ApprenticePolicy live_policy(std::make_shared<NetworkEvaluator>(live, rules), rules, false);
  CHECK(max_abs_diff(live_policy.distribution(state, r2), before) > 0.0);
}

TEST_CASE("dataset export round trip") {
  const auto rules = GameRules::connect4(4, 5, 3);
  Rng rng(40);
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(testing::random_sample(rules, rng, AblationMode::kBRExIt));
  samples.push_back(testing::random_sample(rules, rng, AblationMode::kExIt));
  samples[0].opponent_records->clear();
  std::stringstream stream;
  write_dataset(stream, rules, samples);
  const auto restored = read_dataset(stream, rules);
  REQUIRE(restored.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) CHECK(same_sample(restored[i], samples[i]));

  std::stringstream again(stream.str());
  CHECK_THROWS_AS(read_dataset(again, GameRules::connect4()), std::runtime_error);
  std::stringstream bad("{\"schema\":\"other\",\"version\":1}\n");
  CHECK_THROWS_AS(read_dataset(bad, rules), std::runtime_error);
}

TEST_CASE("shuffle_indices is a seeded permutation") {
  std::vector<std::size_t> a(50), b(50);
  for (std::size_t i = 0; i < 50; ++i) a[i] = b[i] = i;
  Rng r1(4), r2(4);
  shuffle_indices(a, r1);
  shuffle_indices(b, r2);
  CHECK(a == b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
  CHECK(a != sorted);
}

TEST_CASE("prior modes per ablation") {
  CHECK(prior_mode_for(AblationMode::kExIt) == PriorMode::kApprenticeEverywhere);
  CHECK(prior_mode_for(AblationMode::kExItOMFS) == PriorMode::kApprenticeEverywhere);
  CHECK(prior_mode_for(AblationMode::kBRExItOMS) == PriorMode::kLearnedOpponentModels);
  CHECK(prior_mode_for(AblationMode::kBRExIt) == PriorMode::kGroundTruthOpponents);
}
