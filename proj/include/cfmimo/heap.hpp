#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "cfmimo/types.hpp"

namespace cfmimo {

enum class HeapKind { kMin, kMax };

/// Array-embedded binary heap keyed by a real number.
///
/// Equal keys are ordered by payload (smaller payload nearer the root) in both
/// kinds, so extraction order is fully deterministic when payloads are
/// distinct. `sift_steps()` counts parent/child swaps plus comparisons and is
/// used to check the O(U log(tau U)) cost of pilot assignment.
template <typename Payload>
class BinaryHeap {
 public:
  struct Node {
    double key;
    Payload payload;
  };

  BinaryHeap(HeapKind kind, std::vector<double> keys, std::vector<Payload> payloads)
      : kind_(kind) {
    if (keys.size() != payloads.size()) {
      throw Error(ErrorCode::kInvalidArgument, "heap: keys and payloads differ in length");
    }
    nodes_.reserve(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) nodes_.push_back({keys[i], std::move(payloads[i])});
    for (std::size_t i = nodes_.size() / 2; i-- > 0;) sift_down(i);
  }

  HeapKind kind() const { return kind_; }
  bool empty() const { return nodes_.empty(); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t sift_steps() const { return steps_; }

  const Node& peek() const {
    if (nodes_.empty()) throw Error(ErrorCode::kInvalidArgument, "heap: peek on empty heap");
    return nodes_.front();
  }

  Node extract() {
    if (nodes_.empty()) throw Error(ErrorCode::kInvalidArgument, "heap: extract on empty heap");
    Node root = std::move(nodes_.front());
    nodes_.front() = std::move(nodes_.back());
    nodes_.pop_back();
    if (!nodes_.empty()) sift_down(0);
    return root;
  }

  // Overwrites the root and restores heap order.
  void replace_top(double key, Payload payload) {
    if (nodes_.empty()) throw Error(ErrorCode::kInvalidArgument, "heap: replace on empty heap");
    nodes_.front() = {key, std::move(payload)};
    sift_down(0);
  }

  /// True when every parent precedes both children.
  bool is_heap() const {
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (before(nodes_[i], nodes_[(i - 1) / 2])) return false;
    }
    return true;
  }

 private:
  bool before(const Node& a, const Node& b) const {
    if (a.key != b.key) return kind_ == HeapKind::kMin ? a.key < b.key : a.key > b.key;
    return a.payload < b.payload;
  }

  void sift_down(std::size_t i) {
    const std::size_t n = nodes_.size();
    for (;;) {
      std::size_t best = i;
      const std::size_t l = 2 * i + 1;
      const std::size_t r = l + 1;
      if (l < n && before(nodes_[l], nodes_[best])) best = l;
      if (r < n && before(nodes_[r], nodes_[best])) best = r;
      ++steps_;
      if (best == i) return;
      std::swap(nodes_[i], nodes_[best]);
      i = best;
    }
  }

  HeapKind kind_;
  std::vector<Node> nodes_;
  std::size_t steps_ = 0;
};

}  // namespace cfmimo
