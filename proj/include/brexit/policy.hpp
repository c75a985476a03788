#pragma once

#include <memory>
#include <string>
#include <vector>

#include "brexit/game.hpp"
#include "brexit/network.hpp"
#include "brexit/rng.hpp"

namespace brexit {

/// Read-only access to an apprentice. Implementations must be safe for concurrent callers.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  /// Network outputs for `state`, encoded from the perspective of the player to move.
  virtual NetworkOutput evaluate(const GameState& state) const = 0;
};

class NetworkEvaluator final : public Evaluator {
 public:
  NetworkEvaluator(std::shared_ptr<const Network> network, GameRules rules)
      : network_(std::move(network)), rules_(std::move(rules)) {}
  NetworkOutput evaluate(const GameState& state) const override;
  const std::shared_ptr<const Network>& network() const { return network_; }

 private:
  std::shared_ptr<const Network> network_;
  GameRules rules_;
};

/// A game-playing policy. distribution() returns a probability vector over the full
/// action space with zero mass on illegal actions. Implementations are stateless
/// apart from the caller-provided RNG and may be shared across threads.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<double> distribution(const GameState& state, Rng& rng) const = 0;
  /// Samples from distribution(); overridden by policies that choose directly.
  virtual int act(const GameState& state, Rng& rng) const;
  virtual std::string name() const = 0;
};

class UniformRandomPolicy final : public Policy {
 public:
  explicit UniformRandomPolicy(GameRules rules) : rules_(std::move(rules)) {}
  std::vector<double> distribution(const GameState& state, Rng& rng) const override;
  std::string name() const override { return "random"; }

 private:
  GameRules rules_;
};

/// One-ply lookahead: take an immediate win, otherwise block the opponent's immediate
/// win, otherwise prefer the most central action (lowest index on ties). With
/// probability epsilon the move is uniform over legal actions instead.
class HeuristicPolicy final : public Policy {
 public:
  HeuristicPolicy(GameRules rules, double epsilon = 0.0);
  std::vector<double> distribution(const GameState& state, Rng& rng) const override;
  int preferred_action(const GameState& state) const;
  std::string name() const override;

 private:
  GameRules rules_;
  double epsilon_;
};

/// Acts with the apprentice's actor head, either sampling it or taking its argmax.
class ApprenticePolicy final : public Policy {
 public:
  ApprenticePolicy(std::shared_ptr<const Evaluator> evaluator, GameRules rules, bool greedy);
  std::vector<double> distribution(const GameState& state, Rng& rng) const override;
  std::string name() const override { return greedy_ ? "apprentice-greedy" : "apprentice"; }

 private:
  std::shared_ptr<const Evaluator> evaluator_;
  GameRules rules_;
  bool greedy_;
};

/// Restricts a distribution to the legal actions of `state` and renormalizes.
/// Throws std::invalid_argument if no mass remains.
std::vector<double> mask_and_normalize(const GameRules& rules, const GameState& state, std::vector<double> dist);

}  // namespace brexit
