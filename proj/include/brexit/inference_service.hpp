#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "brexit/game.hpp"
#include "brexit/network.hpp"
#include "brexit/policy.hpp"

namespace brexit {

/// Raised for requests submitted after shutdown or still pending when it happens.
struct ServiceShutdown : std::runtime_error {
  ServiceShutdown() : std::runtime_error("inference service is shut down") {}
};

struct InferenceRequest {
  std::uint64_t id = 0;
  EncodedState input;
  std::vector<std::uint8_t> legal_mask;
};

struct InferenceResponse {
  std::uint64_t id = 0;
  NetworkOutput output;
};

struct InferenceStats {
  std::uint64_t submitted = 0;
  std::uint64_t answered = 0;
  std::uint64_t rejected = 0;
  std::uint64_t flushes = 0;
  std::uint64_t largest_batch = 0;
};

/// Centralized batched apprentice inference. One dispatcher thread owns the current
/// snapshot and answers pending requests in batches. A batch is flushed when
/// batch_limit requests are pending, when every registered client is waiting, or
/// when batch_timeout has passed since the oldest pending request arrived.
class InferenceService {
 public:
  struct Options {
    int batch_limit = 32;
    std::chrono::microseconds batch_timeout{2000};
  };

  InferenceService(std::shared_ptr<const Network> snapshot, Options options);
  ~InferenceService();

  InferenceService(const InferenceService&) = delete;
  InferenceService& operator=(const InferenceService&) = delete;

  /// Throws ServiceShutdown after shutdown(). The future carries ServiceShutdown if the
  /// service stops before answering, or the forward-pass error for bad inputs.
  std::future<InferenceResponse> submit(EncodedState input, std::vector<std::uint8_t> legal_mask);

  /// Batches already taken by the dispatcher finish on the old snapshot.
  void swap_snapshot(std::shared_ptr<const Network> snapshot);
  std::shared_ptr<const Network> snapshot() const;

  /// Clients that block on their futures; used for the all-waiting flush rule.
  void register_client();
  void unregister_client();

  /// Answers nothing further: pending requests are rejected, new ones refused. Idempotent.
  void shutdown();

  InferenceStats stats() const;

 private:
  struct Pending {
    InferenceRequest request;
    std::promise<InferenceResponse> promise;
    std::chrono::steady_clock::time_point arrived;
  };

  void run();

  Options options_;
  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::deque<Pending> queue_;
  std::shared_ptr<const Network> snapshot_;
  std::uint64_t next_id_ = 0;
  int clients_ = 0;
  bool stopping_ = false;
  InferenceStats stats_;
  std::jthread dispatcher_;
};

/// Evaluator that routes forward passes through an InferenceService. Threads using it
/// should hold a ClientScope so the service knows how many callers can be waiting.
class ServiceEvaluator final : public Evaluator {
 public:
  ServiceEvaluator(InferenceService& service, GameRules rules) : service_(service), rules_(std::move(rules)) {}
  NetworkOutput evaluate(const GameState& state) const override;

 private:
  InferenceService& service_;
  GameRules rules_;
};

/// RAII registration of a client thread with the service.
class ClientScope {
 public:
  explicit ClientScope(InferenceService& service) : service_(service) { service_.register_client(); }
  ~ClientScope() { service_.unregister_client(); }
  ClientScope(const ClientScope&) = delete;
  ClientScope& operator=(const ClientScope&) = delete;

 private:
  InferenceService& service_;
};

}  // namespace brexit
