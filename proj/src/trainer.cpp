#include "brexit/trainer.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include "brexit/agents.hpp"
#include "brexit/evaluation.hpp"
#include "brexit/parallel.hpp"
#include "json.hpp"

namespace brexit {

namespace fs = std::filesystem;

namespace {

std::string csv_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_optional(const std::optional<double>& v) { return v ? csv_number(*v) : ""; }

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

/// Keeps the first `keep` lines of a text file; a missing file is created empty.
void truncate_lines(const fs::path& path, std::size_t keep) {
  std::vector<std::string> lines;
  {
    std::ifstream in(path);
    std::string line;
    while (lines.size() < keep && std::getline(in, line)) lines.push_back(line);
  }
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path.string());
  out << line << '\n';
}

std::unique_ptr<InferenceService> make_service(const RunConfig& config, std::shared_ptr<const Network> snapshot) {
  if (config.parallelism.workers <= 1) return nullptr;
  InferenceService::Options options;
  options.batch_limit = config.parallelism.inference_batch_limit;
  options.batch_timeout = std::chrono::microseconds(
      static_cast<std::int64_t>(std::llround(config.parallelism.batch_timeout_ms * 1000.0)));
  return std::make_unique<InferenceService>(std::move(snapshot), options);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string GenerationMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["generation"] = generation;
  j["config_hash"] = config_hash;
  j["episodes"] = episodes;
  j["samples"] = samples;
  j["buffer_size"] = buffer_size;
  j["update_steps"] = update_steps;
  j["value_loss"] = value_loss;
  j["policy_loss"] = policy_loss;
  j["policy_inference_loss"] = optional_json(policy_inference_loss);
  j["lambda"] = optional_json(lambda);
  j["total_loss"] = total_loss;
  j["train_winrate"] = train_winrate;
  j["eval_winrate"] = optional_json(eval_winrate);
  j["eval_games"] = eval_games;
  j["population_size"] = population_size;
  return j.dump();
}

std::string GenerationMetrics::csv_header() {
  return "generation,config_hash,episodes,samples,buffer_size,update_steps,value_loss,policy_loss,"
         "policy_inference_loss,lambda,total_loss,train_winrate,eval_winrate,eval_games,population_size";
}

std::string GenerationMetrics::to_csv() const {
  std::ostringstream out;
  out << generation << ',' << config_hash << ',' << episodes << ',' << samples << ',' << buffer_size << ','
      << update_steps << ',' << csv_number(value_loss) << ',' << csv_number(policy_loss) << ','
      << csv_optional(policy_inference_loss) << ',' << csv_optional(lambda) << ',' << csv_number(total_loss) << ','
      << csv_number(train_winrate) << ',' << csv_optional(eval_winrate) << ',' << eval_games << ','
      << population_size;
  return out.str();
}

Trainer::Trainer(RunConfig config, fs::path out_dir)
    : config_(std::move(config)),
      hash_(config_hash(config_)),
      rules_(make_rules(config_)),
      out_dir_(std::move(out_dir)),
      buffer_(static_cast<std::size_t>(config_.training.buffer_capacity)) {
  validate(config_);
  network_ = std::make_shared<Network>(make_network_config(config_), derive_seed(config_.seed, kSeedInit));
  if (config_.opponent.kind != "self-play") fixed_opponent_ = make_opponent(config_.opponent, rules_);
  const OpponentConfig& eval = config_.evaluation.opponent;
  if (!eval.kind.empty()) eval_opponent_ = make_opponent(eval, rules_);
  else eval_opponent_ = fixed_opponent_ ? fixed_opponent_ : std::make_shared<UniformRandomPolicy>(rules_);
  service_ = make_service(config_, std::make_shared<const Network>(*network_));
  init_outputs(false);
}

Trainer::Trainer(ResumeTag, RunConfig config, fs::path out_dir, const Checkpoint& ckpt)
    : config_(std::move(config)),
      hash_(config_hash(config_)),
      rules_(make_rules(config_)),
      out_dir_(std::move(out_dir)),
      buffer_(ReplayBuffer::from_bytes(rules_, ckpt.replay_buffer)) {
  validate(config_);
  if (ckpt.network != make_network_config(config_))
    throw CheckpointError("checkpoint network architecture does not match its configuration");
  network_ = std::make_shared<Network>(restore_network(ckpt.network, ckpt.parameters));
  optimizer_ = ckpt.optimizer;
  generation_ = ckpt.generation;
  for (const auto& params : ckpt.population)
    population_.add(std::make_shared<const Network>(restore_network(ckpt.network, params)));
  if (config_.opponent.kind != "self-play") fixed_opponent_ = make_opponent(config_.opponent, rules_);
  const OpponentConfig& eval = config_.evaluation.opponent;
  if (!eval.kind.empty()) eval_opponent_ = make_opponent(eval, rules_);
  else eval_opponent_ = fixed_opponent_ ? fixed_opponent_ : std::make_shared<UniformRandomPolicy>(rules_);
  service_ = make_service(config_, std::make_shared<const Network>(*network_));
  init_outputs(true);
}

Trainer::~Trainer() = default;

std::unique_ptr<Trainer> Trainer::resume(const fs::path& checkpoint, fs::path out_dir,
                                         const std::optional<RunConfig>& config) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  RunConfig stored;
  try {
    stored = parse_config(ckpt.config_text, checkpoint.string() + " (embedded config)");
  } catch (const ConfigError& e) {
    throw CheckpointError(e.what());
  }
  if (config_hash(stored) != ckpt.config_hash)
    throw CheckpointError(checkpoint.string() + ": embedded configuration does not match its hash");
  if (config && config_hash(*config) != ckpt.config_hash)
    throw CheckpointError(checkpoint.string() + ": configuration hash " + config_hash(*config) +
                          " does not match the checkpoint's " + ckpt.config_hash + "; refusing to resume");
  RunConfig effective = config ? *config : stored;
  return std::unique_ptr<Trainer>(new Trainer(ResumeTag{}, std::move(effective), std::move(out_dir), ckpt));
}

void Trainer::init_outputs(bool resuming) {
  fs::create_directories(out_dir_ / "checkpoints");
  {
    std::ofstream cfg(out_dir_ / "config.yaml", std::ios::trunc);
    cfg << dump_config(config_);
  }
  const auto keep = static_cast<std::size_t>(resuming ? generation_ : 0);
  truncate_lines(out_dir_ / "metrics.jsonl", keep);
  truncate_lines(out_dir_ / "timing.jsonl", keep);
  truncate_lines(out_dir_ / "metrics.csv", keep + 1);
  std::ifstream check(out_dir_ / "metrics.csv");
  std::string header;
  if (!std::getline(check, header) || header != GenerationMetrics::csv_header()) {
    check.close();
    std::ofstream csv(out_dir_ / "metrics.csv", std::ios::trunc);
    csv << GenerationMetrics::csv_header() << '\n';
    if (resuming && generation_ > 0)
      spdlog::warn("metrics.csv in {} had no usable header; restarting the CSV log", out_dir_.string());
  }
}

fs::path Trainer::checkpoint_path(int generation) const {
  char name[32];
  std::snprintf(name, sizeof(name), "gen_%04d.ckpt", generation);
  return out_dir_ / "checkpoints" / name;
}

Checkpoint Trainer::make_checkpoint() const {
  Checkpoint c;
  c.config_text = dump_config(config_);
  c.config_hash = hash_;
  c.generation = generation_;
  c.network = network_->config();
  c.parameters.assign(network_->parameters().begin(), network_->parameters().end());
  c.optimizer = optimizer_;
  c.replay_buffer = buffer_.to_bytes(rules_);
  for (std::size_t i = 0; i < population_.size(); ++i)
    c.population.emplace_back(population_[i]->parameters().begin(), population_[i]->parameters().end());
  return c;
}

double Trainer::evaluate(int generation, int& games) {
  games = config_.evaluation.games;
  auto evaluator = std::make_shared<NetworkEvaluator>(std::make_shared<const Network>(*network_), rules_);
  const ApprenticePolicy apprentice(std::move(evaluator), rules_, true);
  Rng rng(derive_seed(config_.seed, kSeedEval, static_cast<std::uint64_t>(generation)));
  return play_matches(rules_, apprentice, *eval_opponent_, games, rng, config_.parallelism.workers).winrate_a();
}

GenerationMetrics Trainer::run_generation() {
  const int gen = generation_ + 1;
  GenerationTiming timing;
  GenerationMetrics m;
  m.generation = gen;
  m.config_hash = hash_;
  m.episodes = config_.training.episodes_per_generation;

  // Collection runs on a frozen copy; the live network is only touched by the update.
  auto start = std::chrono::steady_clock::now();
  const auto snapshot = std::make_shared<const Network>(*network_);
  std::unique_ptr<Evaluator> direct;
  std::unique_ptr<Evaluator> routed;
  const Evaluator* evaluator = nullptr;
  if (service_) {
    service_->swap_snapshot(snapshot);
    routed = std::make_unique<ServiceEvaluator>(*service_, rules_);
    evaluator = routed.get();
  } else {
    direct = std::make_unique<NetworkEvaluator>(snapshot, rules_);
    evaluator = direct.get();
  }
  const CollectionConfig collection = make_collection_config(config_);
  if (!fixed_opponent_ && population_.empty())
    spdlog::info("generation {}: self-play population is empty; the current apprentice plays both seats", gen);
  std::vector<EpisodeResult> episodes(static_cast<std::size_t>(m.episodes));
  parallel_for(episodes.size(), config_.parallelism.workers, [&](std::size_t i) {
    std::optional<ClientScope> client;
    if (service_) client.emplace(*service_);
    Rng rng(derive_seed(config_.seed, kSeedCollect, static_cast<std::uint64_t>(gen), i));
    std::shared_ptr<const Policy> opponent = fixed_opponent_;
    if (!opponent) opponent = sample_selfplay_opponent(population_, snapshot, rules_, rng);
    episodes[i] = collect_episode(rules_, *evaluator, *opponent, collection, rng);
  });
  double score = 0.0;
  for (const EpisodeResult& ep : episodes) {
    for (const TrainingSample& s : ep.samples) buffer_.insert_augmented(rules_, s);
    m.samples += ep.samples.size();
    score += 0.5 * (ep.agent_return + 1.0);
  }
  m.train_winrate = score / static_cast<double>(episodes.size());
  m.buffer_size = buffer_.size();
  timing.collect_seconds = seconds_since(start);

  start = std::chrono::steady_clock::now();
  Rng update_rng(derive_seed(config_.seed, kSeedUpdate, static_cast<std::uint64_t>(gen)));
  const auto history = update_apprentice(*network_, optimizer_, rules_, buffer_, make_update_config(config_), update_rng);
  m.update_steps = history.size();
  if (!history.empty()) {
    double pi_sum = 0.0, lambda_sum = 0.0;
    bool has_pi = false, has_lambda = false;
    for (const LossBreakdown& l : history) {
      m.value_loss += l.value_loss;
      m.policy_loss += l.policy_loss;
      m.total_loss += l.total;
      if (l.policy_inference_loss) {
        pi_sum += *l.policy_inference_loss;
        has_pi = true;
      }
      if (l.lambda) {
        lambda_sum += *l.lambda;
        has_lambda = true;
      }
    }
    const double n = static_cast<double>(history.size());
    m.value_loss /= n;
    m.policy_loss /= n;
    m.total_loss /= n;
    if (has_pi) m.policy_inference_loss = pi_sum / n;
    if (has_lambda) m.lambda = lambda_sum / n;
  }
  timing.update_seconds = seconds_since(start);

  generation_ = gen;
  if (config_.opponent.kind == "self-play") population_.add(std::make_shared<const Network>(*network_));
  m.population_size = population_.size();

  start = std::chrono::steady_clock::now();
  if (config_.evaluation.interval > 0 && gen % config_.evaluation.interval == 0 && config_.evaluation.games > 0)
    m.eval_winrate = evaluate(gen, m.eval_games);
  timing.eval_seconds = seconds_since(start);

  write_outputs(m, timing);
  return m;
}

void Trainer::write_outputs(const GenerationMetrics& m, const GenerationTiming& t) {
  save_checkpoint(checkpoint_path(m.generation), make_checkpoint());
  {
    std::ofstream latest(out_dir_ / "checkpoints" / "latest", std::ios::trunc);
    latest << checkpoint_path(m.generation).filename().string() << '\n';
  }
  append_line(out_dir_ / "metrics.jsonl", m.to_json());
  append_line(out_dir_ / "metrics.csv", m.to_csv());
  nlohmann::ordered_json timing;
  timing["generation"] = m.generation;
  timing["collect_seconds"] = t.collect_seconds;
  timing["update_seconds"] = t.update_seconds;
  timing["eval_seconds"] = t.eval_seconds;
  append_line(out_dir_ / "timing.jsonl", timing.dump());
}

void Trainer::run(const std::function<void(const GenerationMetrics&)>& on_generation) {
  while (generation_ < config_.training.generations) {
    const GenerationMetrics m = run_generation();
    if (on_generation) on_generation(m);
  }
}

std::optional<fs::path> latest_checkpoint(const fs::path& out_dir) {
  std::ifstream in(out_dir / "checkpoints" / "latest");
  std::string name;
  if (!in || !std::getline(in, name) || name.empty()) return std::nullopt;
  const fs::path path = out_dir / "checkpoints" / name;
  if (!fs::exists(path)) return std::nullopt;
  return path;
}

}  // namespace brexit
