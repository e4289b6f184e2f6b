#pragma once

// Weighted round-robin grant logic.
//
// The pointer serves up to w_i consecutive packets from queue i. An empty
// queue is skipped at no cost, and a queue's credits are refilled whenever
// the pointer moves onto it, so a full pass over all queues resets every
// weight. With nothing pending the state does not change.

#include <cassert>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wrrnoc/errors.hpp"

namespace wrrnoc {

struct WrrArbiterState {
  int queue_index = 0;
  int credits = 0;

  friend bool operator==(const WrrArbiterState&, const WrrArbiterState&) = default;
};

inline WrrArbiterState initial_state(std::span<const int> weights) {
  if (weights.empty()) throw InvalidArgument("WRR arbiter needs at least one queue");
  return {0, weights[0]};
}

/// One arbitration step. `nonempty(i)` reports whether queue i has a packet.
/// Returns the granted queue, or -1 (state untouched) when all are empty.
template <class NonEmpty>
int arbiter_grant(WrrArbiterState& state, std::span<const int> weights, NonEmpty&& nonempty) {
  const int n = static_cast<int>(weights.size());
  if (state.credits > 0 && nonempty(state.queue_index)) {
    --state.credits;
    return state.queue_index;
  }
  for (int step = 1; step <= n; ++step) {
    const int q = (state.queue_index + step) % n;
    if (nonempty(q)) {
      state.queue_index = q;
      state.credits = weights[static_cast<std::size_t>(q)] - 1;
      return q;
    }
  }
  return -1;
}

/// WRR arbiter owning one FIFO per input.
template <class T>
class WrrArbiter {
public:
  explicit WrrArbiter(std::vector<int> weights)
      : weights_(std::move(weights)), queues_(weights_.size()) {
    for (int w : weights_)
      if (w < 1) throw InvalidArgument("WRR weight must be >= 1");
    state_ = initial_state(weights_);
  }

  void push(int queue, T item) { queues_.at(static_cast<std::size_t>(queue)).push_back(std::move(item)); }

  /// Grants one packet, returning (queue, packet).
  std::optional<std::pair<int, T>> grant() {
    const int q = arbiter_grant(state_, std::span<const int>(weights_),
                                [&](int i) { return !queues_[static_cast<std::size_t>(i)].empty(); });
    if (q < 0) return std::nullopt;
    auto& fifo = queues_[static_cast<std::size_t>(q)];
    std::pair<int, T> out{q, std::move(fifo.front())};
    fifo.pop_front();
    return out;
  }

  std::size_t size(int queue) const { return queues_.at(static_cast<std::size_t>(queue)).size(); }
  std::size_t queue_count() const { return queues_.size(); }
  const WrrArbiterState& state() const { return state_; }
  std::span<const int> weights() const { return weights_; }

private:
  std::vector<int> weights_;
  std::vector<std::deque<T>> queues_;
  WrrArbiterState state_;
};

}  // namespace wrrnoc
