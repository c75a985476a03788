#include "brexit/inference_service.hpp"

#include <optional>

namespace brexit {

InferenceService::InferenceService(std::shared_ptr<const Network> snapshot, Options options)
    : options_(options), snapshot_(std::move(snapshot)) {
  if (!snapshot_) throw std::invalid_argument("inference service needs a network snapshot");
  if (options_.batch_limit < 1) throw std::invalid_argument("inference batch limit must be >= 1");
  dispatcher_ = std::jthread([this] { run(); });
}

InferenceService::~InferenceService() { shutdown(); }

std::future<InferenceResponse> InferenceService::submit(EncodedState input, std::vector<std::uint8_t> legal_mask) {
  std::lock_guard lock(mutex_);
  if (stopping_) throw ServiceShutdown();
  Pending p;
  p.request = InferenceRequest{next_id_++, std::move(input), std::move(legal_mask)};
  p.arrived = std::chrono::steady_clock::now();
  auto future = p.promise.get_future();
  queue_.push_back(std::move(p));
  ++stats_.submitted;
  wake_.notify_one();
  return future;
}

void InferenceService::swap_snapshot(std::shared_ptr<const Network> snapshot) {
  if (!snapshot) throw std::invalid_argument("swap_snapshot: null snapshot");
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const Network> InferenceService::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

void InferenceService::register_client() {
  std::lock_guard lock(mutex_);
  ++clients_;
}

void InferenceService::unregister_client() {
  std::lock_guard lock(mutex_);
  --clients_;
  wake_.notify_one();
}

void InferenceService::shutdown() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_ && !dispatcher_.joinable()) return;
    stopping_ = true;
    wake_.notify_all();
  }
  if (dispatcher_.joinable()) dispatcher_.join();
  std::deque<Pending> leftover;
  {
    std::lock_guard lock(mutex_);
    leftover.swap(queue_);
    stats_.rejected += leftover.size();
  }
  for (Pending& p : leftover) p.promise.set_exception(std::make_exception_ptr(ServiceShutdown()));
}

InferenceStats InferenceService::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

void InferenceService::run() {
  std::unique_lock lock(mutex_);
  const auto limit = static_cast<std::size_t>(options_.batch_limit);
  auto ready = [&] {
    return stopping_ || queue_.size() >= limit ||
           (clients_ > 0 && queue_.size() >= static_cast<std::size_t>(clients_));
  };
  std::vector<Pending> batch;
  while (true) {
    wake_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
    if (stopping_) return;
    wake_.wait_until(lock, queue_.front().arrived + options_.batch_timeout, ready);
    if (stopping_) return;

    batch.clear();
    while (!queue_.empty() && batch.size() < limit) {
      batch.push_back(std::move(queue_.front()));
      queue_.pop_front();
    }
    const std::shared_ptr<const Network> net = snapshot_;
    lock.unlock();
    std::vector<std::optional<NetworkOutput>> outputs(batch.size());
    std::vector<std::exception_ptr> errors(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      try {
        outputs[i] = net->forward(batch[i].request.input, batch[i].request.legal_mask);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    // Bookkeeping happens before the answers are released so callers never see stale stats.
    lock.lock();
    stats_.answered += batch.size();
    stats_.largest_batch = std::max<std::uint64_t>(stats_.largest_batch, batch.size());
    ++stats_.flushes;
    lock.unlock();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (errors[i]) batch[i].promise.set_exception(errors[i]);
      else batch[i].promise.set_value(InferenceResponse{batch[i].request.id, std::move(*outputs[i])});
    }
    lock.lock();
  }
}

NetworkOutput ServiceEvaluator::evaluate(const GameState& state) const {
  return service_.submit(rules_.encode_state(state, state.to_move()), rules_.legal_mask(state)).get().output;
}

}  // namespace brexit
