#pragma once

#include <cstddef>
#include <vector>

#include "gmb/core/error.hpp"
#include "gmb/core/types.hpp"

namespace gmb::envs {

/// Withholds observations until `capacity` are pending, then releases the
/// whole pending batch in arrival order.
template <typename T = Observation>
class DelayBuffer {
 public:
  explicit DelayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidConfig("delay buffer capacity must be >= 1");
  }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t pending() const noexcept { return pending_.size(); }

  void push(T item) { pending_.push_back(std::move(item)); }

  /// Empty unless at least `capacity` items are pending.
  std::vector<T> poll() {
    if (pending_.size() < capacity_) return {};
    std::vector<T> out;
    out.swap(pending_);
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<T> pending_;
};

}  // namespace gmb::envs
