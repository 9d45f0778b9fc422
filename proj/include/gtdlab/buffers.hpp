#pragma once

#include "gtdlab/mdp.hpp"

#include <optional>
#include <random>
#include <vector>

namespace gtdlab {

// Growable transition list with optional FIFO eviction. Keeps running sums
// of rho * phi (gamma phi' - phi)^T and rho * phi * r for the aggregate
// learners.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 0) : capacity_(capacity) {}

  void push(const Transition& t) {
    if (items_.empty() && sum_A_.size() == 0) {
      const auto d = t.phi.size();
      sum_A_ = Matrix::Zero(d, d);
      sum_b_ = Vector::Zero(d);
    }
    add_to_sums(t, 1.0);
    if (capacity_ > 0 && items_.size() == capacity_) {
      add_to_sums(items_[head_], -1.0);
      items_[head_] = t;
      head_ = (head_ + 1) % capacity_;
    } else {
      items_.push_back(t);
    }
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  const std::vector<Transition>& items() const { return items_; }

  // Mean of rho * phi (gamma phi' - phi)^T over stored transitions.
  Matrix mean_A() const { return sum_A_ / static_cast<double>(items_.size()); }
  Vector mean_b() const { return sum_b_ / static_cast<double>(items_.size()); }

  const Transition& draw(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    return items_[pick(rng)];
  }

 private:
  void add_to_sums(const Transition& t, double sign) {
    sum_A_.noalias() += (sign * t.rho) * t.phi * t.td_gradient().transpose();
    sum_b_ += (sign * t.rho * t.reward) * t.phi;
  }

  std::vector<Transition> items_;
  std::size_t capacity_;
  std::size_t head_ = 0;
  Matrix sum_A_;
  Vector sum_b_;
};

using Batch = std::vector<const Transition*>;

struct BatchPair {
  Batch batch1;
  Batch batch2;
};

// Uniform with-replacement batch; empty optional when the buffer holds fewer
// than m transitions.
inline std::optional<Batch> sample_uniform(const ReplayBuffer& buffer, std::size_t m, Rng& rng) {
  if (m == 0 || buffer.size() < m) return std::nullopt;
  Batch out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(&buffer.draw(rng));
  return out;
}

enum class Routing { EpisodeParity, TimeWindow };

struct TwinBufferOptions {
  Routing routing = Routing::EpisodeParity;
  // TimeWindow: the collection buffer alternates every `window` insertions
  std::size_t window = 10000;
  std::size_t capacity = 0;
};

class TwinBuffers {
 public:
  explicit TwinBuffers(TwinBufferOptions options = {})
      : options_(options), b1_(options.capacity), b2_(options.capacity) {}

  void insert(const Transition& t) {
    bool to_first = false;
    if (options_.routing == Routing::EpisodeParity) {
      to_first = (t.episode_idx % 2) == 1;
    } else {
      to_first = ((inserted_ / options_.window) % 2) == 0;
    }
    ++inserted_;
    (to_first ? b1_ : b2_).push(t);
  }

  const ReplayBuffer& first() const { return b1_; }
  const ReplayBuffer& second() const { return b2_; }
  const TwinBufferOptions& options() const { return options_; }

  // Both buffers must exceed the warmup count and hold a full batch.
  bool ready(std::size_t m1, std::size_t m2, std::size_t warmup) const {
    return m1 > 0 && m2 > 0 && b1_.size() > warmup && b2_.size() > warmup &&
           b1_.size() >= m1 && b2_.size() >= m2;
  }

  std::optional<BatchPair> sample_pair(std::size_t m1, std::size_t m2, std::size_t warmup,
                                       Rng& rng) const {
    if (!ready(m1, m2, warmup)) return std::nullopt;
    BatchPair out;
    out.batch1 = *sample_uniform(b1_, m1, rng);
    out.batch2 = *sample_uniform(b2_, m2, rng);
    return out;
  }

 private:
  TwinBufferOptions options_;
  ReplayBuffer b1_;
  ReplayBuffer b2_;
  std::size_t inserted_ = 0;
};

}  // namespace gtdlab
