#ifndef MRSQ_VALUE_REPLAY_H_
#define MRSQ_VALUE_REPLAY_H_

#include <cstdint>
#include <vector>

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"

namespace mrsq::value {

struct Transition {
  Vector obs;
  Vector action;
  double reward = 0.0;
  Vector next_obs;
  bool terminated = false;
  bool truncated = false;
};

// Sum tree over priority^alpha with O(log n) update and sampling.
class SumTree {
 public:
  explicit SumTree(int64_t capacity = 1);

  void Set(int64_t index, double mass);
  double Get(int64_t index) const { return nodes_[leaf0_ + index]; }
  double total() const { return nodes_[1]; }
  // Leaf whose cumulative mass interval contains u, for u in [0, total).
  int64_t Find(double u) const;

 private:
  int64_t leaf0_ = 1;
  std::vector<double> nodes_;
};

// Ring buffer with loss-adjusted prioritized sampling. New transitions enter
// at the running maximum priority.
class LapReplayBuffer {
 public:
  LapReplayBuffer(int obs_dim, int action_dim, int64_t capacity = 1'000'000,
                  double alpha = 0.4, double min_priority = 1.0);

  void Add(const Transition& t);

  int64_t size() const { return size_; }
  int64_t capacity() const { return capacity_; }
  int64_t total_added() const { return total_added_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  double alpha() const { return alpha_; }
  double min_priority() const { return min_priority_; }

  // Slots drawn with replacement, probability proportional to priority^alpha.
  std::vector<int64_t> Sample(int batch_size, Rng& rng) const;

  // Number of consecutive stored steps of one episode starting at `slot`,
  // capped at `max_len`. A segment stops after a terminated or truncated step
  // and at the newest stored transition.
  int SegmentLength(int64_t slot, int max_len) const;
  // Slot holding the transition `offset` steps after `slot`.
  int64_t Offset(int64_t slot, int offset) const { return (slot + offset) % capacity_; }

  Eigen::Map<const RowVector> obs(int64_t slot) const;
  Eigen::Map<const RowVector> action(int64_t slot) const;
  Eigen::Map<const RowVector> next_obs(int64_t slot) const;
  double reward(int64_t slot) const { return reward_[slot]; }
  bool terminated(int64_t slot) const { return flags_[slot] & 1; }
  bool truncated(int64_t slot) const { return flags_[slot] & 2; }
  Transition Get(int64_t slot) const;

  // Priorities are clamped below at min_priority.
  void UpdatePriorities(const std::vector<int64_t>& slots, const std::vector<double>& priorities);
  double priority(int64_t slot) const { return priority_[slot]; }
  double max_priority() const { return max_priority_; }
  double SampleProbability(int64_t slot) const;

  // Persistence. Meta holds counters and priorities; Data holds transitions.
  // RestoreMeta sizes the buffer, so it comes first.
  std::vector<double> SaveMeta() const;
  void RestoreMeta(const std::vector<double>& meta);
  std::vector<double> SaveTransitions() const;
  void RestoreTransitions(const std::vector<double>& data);
  bool operator==(const LapReplayBuffer& other) const;

 private:
  int64_t Logical(int64_t slot) const;
  void SetPriority(int64_t slot, double p);

  int obs_dim_;
  int action_dim_;
  int64_t capacity_;
  double alpha_;
  double min_priority_;
  int64_t size_ = 0;
  int64_t next_ = 0;
  int64_t total_added_ = 0;
  double max_priority_;
  std::vector<double> obs_;
  std::vector<double> action_;
  std::vector<double> next_obs_;
  std::vector<double> reward_;
  std::vector<uint8_t> flags_;
  std::vector<double> priority_;
  SumTree tree_;
};

}  // namespace mrsq::value

#endif  // MRSQ_VALUE_REPLAY_H_
