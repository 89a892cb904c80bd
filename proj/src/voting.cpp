#include "eegdgr/voting.hpp"

#include <algorithm>
#include <string>

namespace eegdgr::stream {

DecisionWindow::DecisionWindow(int num_classes, std::size_t capacity, int threshold)
    : num_classes_(num_classes), capacity_(capacity), threshold_(threshold) {
  if (num_classes < 1) throw VotingError("need at least one class");
  if (capacity == 0) throw VotingError("window capacity must be positive");
  if (threshold < 1 || static_cast<std::size_t>(threshold) > capacity) throw VotingError("threshold out of range");
  counts_.assign(static_cast<std::size_t>(num_classes) + 1, 0);
}

std::optional<VoteDecision> DecisionWindow::update(int pred, double confidence) {
  if (pred < 1 || pred > num_classes_) throw VotingError("prediction " + std::to_string(pred) + " out of range");
  ring_.push_back({pred, confidence});
  ++counts_[static_cast<std::size_t>(pred)];
  if (ring_.size() > capacity_) {
    --counts_[static_cast<std::size_t>(ring_.front().class_id)];
    ring_.pop_front();
  }
  if (counts_[static_cast<std::size_t>(pred)] < threshold_) return std::nullopt;

  VoteDecision d;
  d.class_id = pred;
  d.votes = counts_[static_cast<std::size_t>(pred)];
  for (const auto& e : ring_) {
    if (e.class_id == pred) d.confidence += e.confidence;
  }
  d.confidence /= d.votes;
  clear();
  return d;
}

int DecisionWindow::count(int class_id) const {
  if (class_id < 1 || class_id > num_classes_) return 0;
  return counts_[static_cast<std::size_t>(class_id)];
}

std::vector<int> DecisionWindow::contents() const {
  std::vector<int> out;
  out.reserve(ring_.size());
  for (const auto& e : ring_) out.push_back(e.class_id);
  return out;
}

void DecisionWindow::clear() {
  ring_.clear();
  std::fill(counts_.begin(), counts_.end(), 0);
}

}  // namespace eegdgr::stream
