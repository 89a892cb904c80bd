#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

namespace eegdgr::stream {

inline constexpr std::size_t kVoteWindow = 10;
inline constexpr int kVoteThreshold = 7;  // strictly more than 6 of the last 10

struct VoteDecision {
  int class_id = 0;
  int votes = 0;
  double confidence = 0.0;  // mean confidence of the agreeing predictions
};

class VotingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Ring of recent predictions. A decision clears the ring.
class DecisionWindow {
 public:
  explicit DecisionWindow(int num_classes, std::size_t capacity = kVoteWindow, int threshold = kVoteThreshold);

  std::optional<VoteDecision> update(int pred, double confidence = 1.0);

  std::size_t size() const { return ring_.size(); }
  int count(int class_id) const;
  std::vector<int> contents() const;
  void clear();

 private:
  struct Entry {
    int class_id;
    double confidence;
  };
  int num_classes_;
  std::size_t capacity_;
  int threshold_;
  std::deque<Entry> ring_;
  std::vector<int> counts_;
};

}  // namespace eegdgr::stream
