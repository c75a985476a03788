#include <cmath>
#include <stdexcept>
#include <string>

#include "brexit/network.hpp"
#include "brexit/parallel.hpp"

namespace brexit {

namespace {

constexpr std::size_t kGradientChunks = 8;

double cross_entropy(std::span<const double> target, std::span<const double> probs) {
  double ce = 0.0;
  for (std::size_t a = 0; a < target.size(); ++a)
    if (target[a] > 0.0) ce -= target[a] * std::log(probs[a]);
  return ce;
}

struct Sums {
  double value = 0.0;
  double policy = 0.0;
  double inference = 0.0;
  std::size_t records = 0;
};

void validate(const Network& net, const GameRules& rules, std::span<const TrainingSample> batch, AblationMode mode,
              Objective objective) {
  if (batch.empty()) throw std::invalid_argument("losses: empty batch");
  const bool om = uses_opponent_models(mode);
  if (objective == Objective::kPolicyInferenceOnly && !om)
    throw std::invalid_argument("losses: policy-inference objective requires opponent models");
  if (om && net.config().num_opponent_heads < 1)
    throw std::invalid_argument("losses: mode " + std::string(to_string(mode)) + " needs opponent-model heads");
  const std::size_t actions = static_cast<std::size_t>(rules.num_actions());
  for (const TrainingSample& s : batch) {
    if (s.mcts_policy.size() != actions) throw std::invalid_argument("losses: search policy has the wrong length");
    if (!om) continue;
    if (!s.opponent_records)
      throw std::invalid_argument("losses: missing opponent-model targets in mode " + std::string(to_string(mode)));
    for (const OpponentRecord& r : *s.opponent_records) {
      if (r.target.size() != actions) throw std::invalid_argument("losses: opponent target has the wrong length");
      if (r.opponent_index < 0 || r.opponent_index >= net.config().num_opponent_heads)
        throw std::invalid_argument("losses: opponent index without a matching head");
    }
  }
}

Sums accumulate(const Network& net, const GameRules& rules, std::span<const TrainingSample> batch, bool om) {
  Sums sums;
  for (const TrainingSample& s : batch) {
    const NetworkOutput out = net.forward(rules.encode_state(s.state, s.state.to_move()), rules.legal_mask(s.state));
    const double err = out.critic - s.value_target;
    sums.value += err * err;
    sums.policy += cross_entropy(s.mcts_policy, out.actor);
    if (!om) continue;
    for (const OpponentRecord& r : *s.opponent_records) {
      const NetworkOutput o = net.forward(rules.encode_state(r.state, r.state.to_move()), rules.legal_mask(r.state));
      sums.inference += cross_entropy(r.target, o.opponent_models[static_cast<std::size_t>(r.opponent_index)]);
      ++sums.records;
    }
  }
  return sums;
}

LossBreakdown combine(const Sums& sums, std::size_t batch_size, AblationMode mode, Objective objective) {
  LossBreakdown lb;
  const double n = static_cast<double>(batch_size);
  lb.value_loss = sums.value / n;
  lb.policy_loss = sums.policy / n;
  if (!std::isfinite(lb.value_loss)) throw std::runtime_error("losses: non-finite value loss from the critic head");
  if (!std::isfinite(lb.policy_loss)) throw std::runtime_error("losses: non-finite policy loss from the actor head");
  if (!uses_opponent_models(mode)) {
    lb.total = lb.value_loss + lb.policy_loss;
    return lb;
  }
  const double inference = sums.records > 0 ? sums.inference / static_cast<double>(sums.records) : 0.0;
  if (!std::isfinite(inference))
    throw std::runtime_error("losses: non-finite policy-inference loss from the opponent-model head");
  lb.policy_inference_loss = inference;
  lb.lambda = sums.records > 0 ? 1.0 / std::sqrt(inference + kLambdaEpsilon) : 1.0;
  lb.total = objective == Objective::kPolicyInferenceOnly ? inference
                                                           : *lb.lambda * (lb.value_loss + lb.policy_loss) + inference;
  return lb;
}

}  // namespace

std::string_view to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::kExIt: return "exit";
    case AblationMode::kExItOMFS: return "exit-omfs";
    case AblationMode::kBRExItOMS: return "brexit-oms";
    case AblationMode::kBRExIt: return "brexit";
  }
  return "unknown";
}

AblationMode parse_ablation_mode(std::string_view text) {
  for (AblationMode m : {AblationMode::kExIt, AblationMode::kExItOMFS, AblationMode::kBRExItOMS, AblationMode::kBRExIt})
    if (text == to_string(m)) return m;
  throw std::invalid_argument("unknown ablation mode '" + std::string(text) + "'");
}

std::string_view to_string(OpponentTargetEncoding encoding) {
  return encoding == OpponentTargetEncoding::kOneHot ? "one-hot" : "full";
}

OpponentTargetEncoding parse_target_encoding(std::string_view text) {
  if (text == "full") return OpponentTargetEncoding::kFullDistribution;
  if (text == "one-hot") return OpponentTargetEncoding::kOneHot;
  throw std::invalid_argument("unknown opponent target encoding '" + std::string(text) + "'");
}

LossBreakdown compute_losses(const Network& net, const GameRules& rules, std::span<const TrainingSample> batch,
                             AblationMode mode, Objective objective) {
  validate(net, rules, batch, mode, objective);
  return combine(accumulate(net, rules, batch, uses_opponent_models(mode)), batch.size(), mode, objective);
}

GradientResult backward(const Network& net, const GameRules& rules, std::span<const TrainingSample> batch,
                        AblationMode mode, Objective objective, int threads) {
  validate(net, rules, batch, mode, objective);
  const bool om = uses_opponent_models(mode);
  const Sums sums = accumulate(net, rules, batch, om);
  GradientResult result;
  result.losses = combine(sums, batch.size(), mode, objective);
  const LossBreakdown& lb = result.losses;

  // dL_total / d(component).
  double w_value = 1.0;
  double w_policy = 1.0;
  double w_inference = 0.0;
  if (objective == Objective::kPolicyInferenceOnly) {
    w_value = w_policy = 0.0;
    w_inference = sums.records > 0 ? 1.0 : 0.0;
  } else if (om && sums.records > 0) {
    w_value = w_policy = *lb.lambda;
    w_inference = 1.0 - 0.5 * (lb.value_loss + lb.policy_loss) *
                            std::pow(*lb.policy_inference_loss + kLambdaEpsilon, -1.5);
  }
  const double n = static_cast<double>(batch.size());
  const double scale_value = w_value / n;
  const double scale_policy = w_policy / n;
  const double scale_inference = sums.records > 0 ? w_inference / static_cast<double>(sums.records) : 0.0;
  const bool need_main = scale_value != 0.0 || scale_policy != 0.0;

  const std::size_t params = net.parameter_count();
  const std::size_t chunks = std::min(kGradientChunks, batch.size());
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(params, 0.0));
  const std::size_t actions = static_cast<std::size_t>(rules.num_actions());
  const std::size_t heads = static_cast<std::size_t>(net.config().num_opponent_heads);

  parallel_for(chunks, threads, [&](std::size_t c) {
    ForwardCache cache;
    std::vector<double> d_logits(actions);
    std::vector<double>& grad = partial[c];
    const std::size_t begin = batch.size() * c / chunks;
    const std::size_t end = batch.size() * (c + 1) / chunks;
    auto ce_gradient = [&](std::span<const double> target, std::span<const double> probs, double scale) {
      double mass = 0.0;
      for (double t : target) mass += t;
      for (std::size_t a = 0; a < actions; ++a)
        d_logits[a] = cache.mask[a] ? scale * (probs[a] * mass - target[a]) : 0.0;
    };
    for (std::size_t i = begin; i < end; ++i) {
      const TrainingSample& s = batch[i];
      if (need_main) {
        net.forward(rules.encode_state(s.state, s.state.to_move()), rules.legal_mask(s.state), cache);
        OutputGradients g;
        if (scale_policy != 0.0) {
          ce_gradient(s.mcts_policy, cache.actor_probs, scale_policy);
          g.actor_logits = d_logits;
        }
        if (scale_value != 0.0) {
          g.has_critic = true;
          g.critic_output = scale_value * 2.0 * (cache.critic - s.value_target);
        }
        net.backward(cache, g, grad);
      }
      if (!om || scale_inference == 0.0) continue;
      for (const OpponentRecord& r : *s.opponent_records) {
        net.forward(rules.encode_state(r.state, r.state.to_move()), rules.legal_mask(r.state), cache);
        const std::size_t j = static_cast<std::size_t>(r.opponent_index);
        ce_gradient(r.target, cache.om_probs[j], scale_inference);
        OutputGradients g;
        g.om_logits.resize(heads);
        g.om_logits[j] = d_logits;
        net.backward(cache, g, grad);
      }
    }
  });

  result.gradient.assign(params, 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < params; ++i) result.gradient[i] += p[i];
  return result;
}

}  // namespace brexit
