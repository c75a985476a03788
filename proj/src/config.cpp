#include "brexit/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace brexit {

namespace {

class Section {
 public:
  Section(YAML::Node node, std::string path, std::string_view source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail("", "expected a mapping");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const YAML::Node value = lookup(key);
    if (!value) return;
    if (!value.IsScalar()) fail(key, "expected a scalar");
    try {
      out = value.as<T>();
    } catch (const YAML::Exception&) {
      fail(key, std::string("expected ") + type_name<T>() + ", got '" + value.Scalar() + "'");
    }
  }

  void get_list(const std::string& key, std::vector<int>& out) {
    const YAML::Node value = lookup(key);
    if (!value) return;
    if (!value.IsSequence()) fail(key, "expected a list of integers");
    try {
      out = value.as<std::vector<int>>();
    } catch (const YAML::Exception&) {
      fail(key, "expected a list of integers");
    }
  }

  template <class E, class Parse>
  void get_enum(const std::string& key, E& out, Parse parse) {
    std::string text;
    if (!lookup(key)) return;
    get(key, text);
    try {
      out = parse(text);
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }

  Section child(const std::string& key) {
    YAML::Node value = lookup(key);
    return Section(value ? value : YAML::Node(), qualified(key), source_);
  }

  /// Rejects keys that were never read.
  void finish() const {
    if (!node_ || node_.IsNull()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) fail(key, "unknown key");
    }
  }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "true or false";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }

  YAML::Node lookup(const std::string& key) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    YAML::Node value = node_[key];
    if (!value.IsDefined() || value.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    return value;
  }

  std::string qualified(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(std::string(source_) + ": " + qualified(key) + ": " + message);
  }

  YAML::Node node_;
  std::string path_;
  std::string_view source_;
  std::set<std::string> seen_;
};

void read_opponent(Section s, OpponentConfig& o) {
  s.get("kind", o.kind);
  s.get("epsilon", o.epsilon);
  s.get("budget", o.budget);
  s.get("path", o.path);
  s.get("greedy", o.greedy);
  s.finish();
}

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string list(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void dump_opponent(std::ostringstream& out, const OpponentConfig& o, const std::string& indent) {
  out << indent << "kind: " << quoted(o.kind) << "\n"
      << indent << "epsilon: " << number(o.epsilon) << "\n"
      << indent << "budget: " << o.budget << "\n"
      << indent << "path: " << quoted(o.path) << "\n"
      << indent << "greedy: " << (o.greedy ? "true" : "false") << "\n";
}

void check_opponent(const OpponentConfig& o, const std::string& path, bool allow_default, const auto& fail) {
  static const std::set<std::string> kinds{"random", "heuristic", "mcts", "checkpoint", "self-play"};
  if (allow_default && o.kind.empty()) return;
  if (!kinds.contains(o.kind))
    fail(path + ".kind", "must be one of random, heuristic, mcts, checkpoint, self-play");
  if (!(o.epsilon >= 0.0 && o.epsilon <= 1.0)) fail(path + ".epsilon", "must lie in [0, 1]");
  if (o.budget < 1) fail(path + ".budget", "must be >= 1");
  if (o.kind == "checkpoint" && o.path.empty()) fail(path + ".path", "required for checkpoint opponents");
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string(source) + ": parse error at line " + std::to_string(e.mark.line + 1) + ": " +
                      e.msg);
  }
  RunConfig c;
  Section top(root, "", source);
  top.get("seed", c.seed);
  {
    Section g = top.child("game");
    g.get("height", c.game.height);
    g.get("width", c.game.width);
    g.get("connect_n", c.game.connect_n);
    g.get("gravity", c.game.gravity);
    g.finish();
  }
  top.get_enum("mode", c.mode, parse_ablation_mode);
  top.get_enum("om_target_encoding", c.om_target_encoding, parse_target_encoding);
  {
    Section s = top.child("search");
    s.get("budget", c.search.budget);
    s.get("c_puct", c.search.c_puct);
    s.get("rollout", c.search.rollout);
    s.get("dirichlet", c.search.dirichlet);
    s.get("dirichlet_alpha", c.search.dirichlet_alpha);
    s.get("dirichlet_epsilon", c.search.dirichlet_epsilon);
    s.get("temperature_plies", c.search.temperature_plies);
    s.get("tau_explore", c.search.tau_explore);
    s.get("tau_exploit", c.search.tau_exploit);
    s.finish();
  }
  {
    Section t = top.child("training");
    t.get("generations", c.training.generations);
    t.get("episodes_per_generation", c.training.episodes_per_generation);
    t.get("epochs", c.training.epochs);
    t.get("batch_size", c.training.batch_size);
    t.get("learning_rate", c.training.learning_rate);
    t.get("grad_clip", c.training.grad_clip);
    t.get("buffer_capacity", c.training.buffer_capacity);
    t.get_enum("value_target", c.training.value_target, parse_value_target_variant);
    t.get("gamma", c.training.gamma);
    t.finish();
  }
  {
    Section n = top.child("network");
    n.get_list("conv_channels", c.network.conv_channels);
    n.get_list("om_hidden", c.network.om_hidden);
    n.get_list("ac_hidden", c.network.ac_hidden);
    n.finish();
  }
  read_opponent(top.child("opponent"), c.opponent);
  {
    Section e = top.child("evaluation");
    e.get("interval", c.evaluation.interval);
    e.get("games", c.evaluation.games);
    read_opponent(e.child("opponent"), c.evaluation.opponent);
    e.finish();
  }
  {
    Section p = top.child("parallelism");
    p.get("workers", c.parallelism.workers);
    p.get("inference_batch_limit", c.parallelism.inference_batch_limit);
    p.get("batch_timeout_ms", c.parallelism.batch_timeout_ms);
    p.finish();
  }
  top.finish();
  validate(c, source);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

void validate(const RunConfig& c, std::string_view source) {
  auto fail = [&](const std::string& path, const std::string& message) {
    throw ConfigError(std::string(source) + ": " + path + ": " + message);
  };
  try {
    GameRules rules(c.game);
  } catch (const std::invalid_argument& e) {
    fail("game", e.what());
  }
  const auto& s = c.search;
  if (s.budget < 1) fail("search.budget", "must be >= 1");
  if (!(s.c_puct > 0.0)) fail("search.c_puct", "must be > 0");
  if (!(s.dirichlet_alpha > 0.0)) fail("search.dirichlet_alpha", "must be > 0");
  if (!(s.dirichlet_epsilon >= 0.0 && s.dirichlet_epsilon <= 1.0)) fail("search.dirichlet_epsilon", "must lie in [0, 1]");
  if (s.temperature_plies < 0) fail("search.temperature_plies", "must be >= 0");
  if (!(s.tau_explore > 0.0)) fail("search.tau_explore", "must be > 0");
  if (!(s.tau_exploit > 0.0)) fail("search.tau_exploit", "must be > 0");
  const auto& t = c.training;
  if (t.generations < 0) fail("training.generations", "must be >= 0");
  if (t.episodes_per_generation < 1) fail("training.episodes_per_generation", "must be >= 1");
  if (t.epochs < 0) fail("training.epochs", "must be >= 0");
  if (t.batch_size < 1) fail("training.batch_size", "must be >= 1");
  if (!(t.learning_rate > 0.0)) fail("training.learning_rate", "must be > 0");
  if (!(t.grad_clip > 0.0)) fail("training.grad_clip", "must be > 0");
  if (t.buffer_capacity < 2) fail("training.buffer_capacity", "must be >= 2");
  if (!(t.gamma > 0.0 && t.gamma <= 1.0)) fail("training.gamma", "must lie in (0, 1]");
  const auto positive = [&](const std::vector<int>& v, const std::string& path) {
    if (v.empty()) fail(path, "must not be empty");
    for (int x : v)
      if (x < 1) fail(path, "entries must be >= 1");
  };
  positive(c.network.conv_channels, "network.conv_channels");
  positive(c.network.om_hidden, "network.om_hidden");
  positive(c.network.ac_hidden, "network.ac_hidden");
  check_opponent(c.opponent, "opponent", false, fail);
  check_opponent(c.evaluation.opponent, "evaluation.opponent", true, fail);
  if (c.evaluation.opponent.kind == "self-play") fail("evaluation.opponent.kind", "self-play cannot be an evaluation opponent");
  if (c.evaluation.interval < 0) fail("evaluation.interval", "must be >= 0");
  if (c.evaluation.games < 0) fail("evaluation.games", "must be >= 0");
  if (c.parallelism.workers < 1) fail("parallelism.workers", "must be >= 1");
  if (c.parallelism.inference_batch_limit < 1) fail("parallelism.inference_batch_limit", "must be >= 1");
  if (!(c.parallelism.batch_timeout_ms > 0.0)) fail("parallelism.batch_timeout_ms", "must be > 0");
}

std::string dump_config(const RunConfig& c) {
  std::ostringstream out;
  out << "seed: " << c.seed << "\n"
      << "game:\n"
      << "  height: " << c.game.height << "\n"
      << "  width: " << c.game.width << "\n"
      << "  connect_n: " << c.game.connect_n << "\n"
      << "  gravity: " << (c.game.gravity ? "true" : "false") << "\n"
      << "mode: " << to_string(c.mode) << "\n"
      << "om_target_encoding: " << to_string(c.om_target_encoding) << "\n"
      << "search:\n"
      << "  budget: " << c.search.budget << "\n"
      << "  c_puct: " << number(c.search.c_puct) << "\n"
      << "  rollout: " << (c.search.rollout ? "true" : "false") << "\n"
      << "  dirichlet: " << (c.search.dirichlet ? "true" : "false") << "\n"
      << "  dirichlet_alpha: " << number(c.search.dirichlet_alpha) << "\n"
      << "  dirichlet_epsilon: " << number(c.search.dirichlet_epsilon) << "\n"
      << "  temperature_plies: " << c.search.temperature_plies << "\n"
      << "  tau_explore: " << number(c.search.tau_explore) << "\n"
      << "  tau_exploit: " << number(c.search.tau_exploit) << "\n"
      << "training:\n"
      << "  generations: " << c.training.generations << "\n"
      << "  episodes_per_generation: " << c.training.episodes_per_generation << "\n"
      << "  epochs: " << c.training.epochs << "\n"
      << "  batch_size: " << c.training.batch_size << "\n"
      << "  learning_rate: " << number(c.training.learning_rate) << "\n"
      << "  grad_clip: " << number(c.training.grad_clip) << "\n"
      << "  buffer_capacity: " << c.training.buffer_capacity << "\n"
      << "  value_target: " << to_string(c.training.value_target) << "\n"
      << "  gamma: " << number(c.training.gamma) << "\n"
      << "network:\n"
      << "  conv_channels: " << list(c.network.conv_channels) << "\n"
      << "  om_hidden: " << list(c.network.om_hidden) << "\n"
      << "  ac_hidden: " << list(c.network.ac_hidden) << "\n"
      << "opponent:\n";
  dump_opponent(out, c.opponent, "  ");
  out << "evaluation:\n"
      << "  interval: " << c.evaluation.interval << "\n"
      << "  games: " << c.evaluation.games << "\n"
      << "  opponent:\n";
  dump_opponent(out, c.evaluation.opponent, "    ");
  out << "parallelism:\n"
      << "  workers: " << c.parallelism.workers << "\n"
      << "  inference_batch_limit: " << c.parallelism.inference_batch_limit << "\n"
      << "  batch_timeout_ms: " << number(c.parallelism.batch_timeout_ms) << "\n";
  return out.str();
}

std::string config_hash(const RunConfig& config) {
  RunConfig c = config;
  c.training.generations = RunConfig{}.training.generations;
  c.parallelism = RunConfig::Parallelism{};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GameRules make_rules(const RunConfig& config) { return GameRules(config.game); }

NetworkConfig make_network_config(const RunConfig& config) {
  return network_config_for(make_rules(config), config.mode, config.network.conv_channels, config.network.om_hidden,
                            config.network.ac_hidden);
}

SearchConfig make_search_config(const RunConfig& config) {
  SearchConfig s;
  s.budget = config.search.budget;
  s.c_puct = config.search.c_puct;
  s.leaf = config.search.rollout ? LeafEvaluation::kRandomRollout : LeafEvaluation::kApprenticeCritic;
  s.dirichlet = config.search.dirichlet;
  s.dirichlet_alpha = config.search.dirichlet_alpha;
  s.dirichlet_epsilon = config.search.dirichlet_epsilon;
  return s;
}

CollectionConfig make_collection_config(const RunConfig& config) {
  CollectionConfig c;
  c.mode = config.mode;
  c.target_encoding = config.om_target_encoding;
  c.search = make_search_config(config);
  c.temperature_plies = config.search.temperature_plies;
  c.tau_explore = config.search.tau_explore;
  c.tau_exploit = config.search.tau_exploit;
  c.value_target = config.training.value_target;
  c.gamma = config.training.gamma;
  return c;
}

UpdateConfig make_update_config(const RunConfig& config) {
  UpdateConfig u;
  u.mode = config.mode;
  u.epochs = config.training.epochs;
  u.batch_size = config.training.batch_size;
  u.learning_rate = config.training.learning_rate;
  u.grad_clip = config.training.grad_clip;
  u.threads = config.parallelism.workers;
  return u;
}

}  // namespace brexit
