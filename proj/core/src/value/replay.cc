#include "mrsq/value/replay.h"

#include <algorithm>
#include <cmath>

#include "mrsq/common/errors.h"

namespace mrsq::value {

SumTree::SumTree(int64_t capacity) {
  while (leaf0_ < capacity) leaf0_ *= 2;
  nodes_.assign(2 * leaf0_, 0.0);
}

void SumTree::Set(int64_t index, double mass) {
  int64_t i = leaf0_ + index;
  nodes_[i] = mass;
  for (i /= 2; i >= 1; i /= 2) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

int64_t SumTree::Find(double u) const {
  int64_t i = 1;
  while (i < leaf0_) {
    const double left = nodes_[2 * i];
    if (u < left || nodes_[2 * i + 1] <= 0.0) {
      i = 2 * i;
    } else {
      u -= left;
      i = 2 * i + 1;
    }
  }
  return i - leaf0_;
}

LapReplayBuffer::LapReplayBuffer(int obs_dim, int action_dim, int64_t capacity, double alpha,
                                 double min_priority)
    : obs_dim_(obs_dim),
      action_dim_(action_dim),
      capacity_(capacity),
      alpha_(alpha),
      min_priority_(min_priority),
      max_priority_(min_priority),
      tree_(capacity) {
  if (obs_dim <= 0 || action_dim <= 0) throw ConfigError("replay: bad dims");
  if (capacity < 1) throw ConfigError("replay: capacity must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("replay: alpha must be >= 0");
  if (!(min_priority > 0.0)) throw ConfigError("replay: min priority must be > 0");
}

void LapReplayBuffer::Add(const Transition& t) {
  if (t.obs.size() != obs_dim_ || t.next_obs.size() != obs_dim_ ||
      t.action.size() != action_dim_) {
    throw InputError("replay: transition shape mismatch");
  }
  if (!t.obs.allFinite() || !t.next_obs.allFinite() || !t.action.allFinite() ||
      !std::isfinite(t.reward)) {
    throw InputError("replay: non-finite transition");
  }
  if (t.terminated && t.truncated) throw InputError("replay: terminated and truncated");
  const int64_t s = next_;
  if (size_ < capacity_) {
    obs_.resize(obs_.size() + obs_dim_);
    next_obs_.resize(next_obs_.size() + obs_dim_);
    action_.resize(action_.size() + action_dim_);
    reward_.push_back(0.0);
    flags_.push_back(0);
    priority_.push_back(0.0);
    ++size_;
  }
  std::copy(t.obs.data(), t.obs.data() + obs_dim_, obs_.begin() + s * obs_dim_);
  std::copy(t.next_obs.data(), t.next_obs.data() + obs_dim_, next_obs_.begin() + s * obs_dim_);
  std::copy(t.action.data(), t.action.data() + action_dim_, action_.begin() + s * action_dim_);
  reward_[s] = t.reward;
  flags_[s] = static_cast<uint8_t>((t.terminated ? 1 : 0) | (t.truncated ? 2 : 0));
  SetPriority(s, max_priority_);
  next_ = (next_ + 1) % capacity_;
  ++total_added_;
}

void LapReplayBuffer::SetPriority(int64_t slot, double p) {
  priority_[slot] = p;
  tree_.Set(slot, std::pow(p, alpha_));
}

std::vector<int64_t> LapReplayBuffer::Sample(int batch_size, Rng& rng) const {
  if (size_ == 0) throw PreconditionError("replay: sample from empty buffer");
  if (batch_size < 1) throw PreconditionError("replay: batch size must be >= 1");
  if (size_ < batch_size) throw PreconditionError("replay: buffer smaller than batch");
  std::vector<int64_t> out(batch_size);
  const double total = tree_.total();
  for (int i = 0; i < batch_size; ++i) {
    int64_t slot = tree_.Find(rng.Uniform() * total);
    // Rounding at interval edges can land past the filled region.
    if (slot >= size_) slot = size_ - 1;
    out[i] = slot;
  }
  return out;
}

int64_t LapReplayBuffer::Logical(int64_t slot) const {
  // Position of `slot` in insertion order.
  const int64_t newest = total_added_ - 1;
  const int64_t newest_slot = (next_ + capacity_ - 1) % capacity_;
  const int64_t back = (newest_slot - slot + capacity_) % capacity_;
  return newest - back;
}

int LapReplayBuffer::SegmentLength(int64_t slot, int max_len) const {
  if (slot < 0 || slot >= size_) throw InputError("replay: slot out of range");
  const int64_t newest = total_added_ - 1;
  const int64_t start = Logical(slot);
  int len = 1;
  while (len < max_len) {
    const int64_t prev = Offset(slot, len - 1);
    if (flags_[prev] != 0) break;
    if (start + len > newest) break;
    ++len;
  }
  return len;
}

Eigen::Map<const RowVector> LapReplayBuffer::obs(int64_t slot) const {
  return Eigen::Map<const RowVector>(obs_.data() + slot * obs_dim_, obs_dim_);
}
Eigen::Map<const RowVector> LapReplayBuffer::action(int64_t slot) const {
  return Eigen::Map<const RowVector>(action_.data() + slot * action_dim_, action_dim_);
}
Eigen::Map<const RowVector> LapReplayBuffer::next_obs(int64_t slot) const {
  return Eigen::Map<const RowVector>(next_obs_.data() + slot * obs_dim_, obs_dim_);
}

Transition LapReplayBuffer::Get(int64_t slot) const {
  Transition t;
  t.obs = obs(slot).transpose();
  t.action = action(slot).transpose();
  t.next_obs = next_obs(slot).transpose();
  t.reward = reward(slot);
  t.terminated = terminated(slot);
  t.truncated = truncated(slot);
  return t;
}

void LapReplayBuffer::UpdatePriorities(const std::vector<int64_t>& slots,
                                       const std::vector<double>& priorities) {
  if (slots.size() != priorities.size()) throw InputError("replay: priority count mismatch");
  for (size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] < 0 || slots[i] >= size_) throw InputError("replay: slot out of range");
    if (std::isnan(priorities[i])) throw InputError("replay: NaN priority");
    const double p = std::max(priorities[i], min_priority_);
    SetPriority(slots[i], p);
    max_priority_ = std::max(max_priority_, p);
  }
}

double LapReplayBuffer::SampleProbability(int64_t slot) const {
  return tree_.Get(slot) / tree_.total();
}

std::vector<double> LapReplayBuffer::SaveMeta() const {
  std::vector<double> meta = {static_cast<double>(size_), static_cast<double>(next_),
                              static_cast<double>(total_added_), max_priority_};
  meta.insert(meta.end(), priority_.begin(), priority_.end());
  return meta;
}

void LapReplayBuffer::RestoreMeta(const std::vector<double>& meta) {
  if (meta.size() < 4) throw InputError("replay meta: too short");
  const auto size = static_cast<int64_t>(meta[0]);
  if (size < 0 || size > capacity_ || static_cast<int64_t>(meta.size()) != 4 + size) {
    throw InputError("replay meta: size mismatch");
  }
  size_ = size;
  next_ = static_cast<int64_t>(meta[1]);
  total_added_ = static_cast<int64_t>(meta[2]);
  max_priority_ = meta[3];
  obs_.assign(size_ * obs_dim_, 0.0);
  next_obs_.assign(size_ * obs_dim_, 0.0);
  action_.assign(size_ * action_dim_, 0.0);
  reward_.assign(size_, 0.0);
  flags_.assign(size_, 0);
  priority_.assign(size_, 0.0);
  tree_ = SumTree(capacity_);
  for (int64_t i = 0; i < size_; ++i) SetPriority(i, meta[4 + i]);
}

std::vector<double> LapReplayBuffer::SaveTransitions() const {
  std::vector<double> data;
  data.reserve(obs_.size() * 2 + action_.size() + reward_.size() * 2);
  data.insert(data.end(), obs_.begin(), obs_.end());
  data.insert(data.end(), next_obs_.begin(), next_obs_.end());
  data.insert(data.end(), action_.begin(), action_.end());
  data.insert(data.end(), reward_.begin(), reward_.end());
  for (uint8_t f : flags_) data.push_back(f);
  return data;
}

void LapReplayBuffer::RestoreTransitions(const std::vector<double>& data) {
  const size_t expect = size_ * (2 * obs_dim_ + action_dim_ + 2);
  if (data.size() != expect) throw InputError("replay data: size mismatch");
  auto it = data.begin();
  auto take = [&it](std::vector<double>& dst, size_t n) {
    std::copy(it, it + n, dst.begin());
    it += n;
  };
  take(obs_, obs_.size());
  take(next_obs_, next_obs_.size());
  take(action_, action_.size());
  take(reward_, reward_.size());
  for (auto& f : flags_) f = static_cast<uint8_t>(*it++);
}

bool LapReplayBuffer::operator==(const LapReplayBuffer& o) const {
  return size_ == o.size_ && next_ == o.next_ && total_added_ == o.total_added_ &&
         max_priority_ == o.max_priority_ && obs_ == o.obs_ && next_obs_ == o.next_obs_ &&
         action_ == o.action_ && reward_ == o.reward_ && flags_ == o.flags_ &&
         priority_ == o.priority_;
}

}  // namespace mrsq::value
