#pragma once

#include "gtdlab/buffers.hpp"
#include "gtdlab/mdp.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gtdlab {

enum class Algorithm {
  Td,
  MinibatchTd,
  Gtd,
  Gtd2,
  Tdc,
  Tdrc,
  Htd,
  Vtrace,
  ImpressionGtd,
  ExpectedGtd,
  AtopTd,
  R1Gtd,
};

inline constexpr std::array<std::pair<Algorithm, std::string_view>, 12> kAlgorithmNames{{
    {Algorithm::Td, "td"},
    {Algorithm::MinibatchTd, "minibatch-td"},
    {Algorithm::Gtd, "gtd"},
    {Algorithm::Gtd2, "gtd2"},
    {Algorithm::Tdc, "tdc"},
    {Algorithm::Tdrc, "tdrc"},
    {Algorithm::Htd, "htd"},
    {Algorithm::Vtrace, "vtrace"},
    {Algorithm::ImpressionGtd, "impression-gtd"},
    {Algorithm::ExpectedGtd, "expected-gtd"},
    {Algorithm::AtopTd, "atop-td"},
    {Algorithm::R1Gtd, "r1-gtd"},
}};

inline std::string_view to_string(Algorithm a) {
  for (const auto& [algo, name] : kAlgorithmNames) {
    if (algo == a) return name;
  }
  return "unknown";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (const auto& [algo, n] : kAlgorithmNames) {
    if (n == name) return algo;
  }
  return std::nullopt;
}

inline bool uses_helper(Algorithm a) {
  return a == Algorithm::Gtd || a == Algorithm::Gtd2 || a == Algorithm::Tdc ||
         a == Algorithm::Tdrc || a == Algorithm::Htd;
}

struct Hyperparams {
  double alpha = 0.01;
  double beta = 0.0;  // helper step-size; 0 means eta * alpha
  double eta = 1.0;
  double reg = 0.0;
  std::size_t m1 = 1;
  std::size_t m2 = 1;
  double clip = 1.0;
  std::optional<std::size_t> warmup;
  bool symmetric = false;

  double helper_step() const { return beta > 0.0 ? beta : eta * alpha; }

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (beta < 0.0 || eta < 0.0 || reg < 0.0) {
      throw std::invalid_argument("beta, eta and reg must be non-negative");
    }
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("batch sizes must be at least 1");
    if (!(clip > 0.0)) throw std::invalid_argument("clip must be positive");
  }

  bool operator==(const Hyperparams&) const = default;
};

inline constexpr double kDivergenceNorm = 1e8;

struct LearnerState {
  Vector theta;
  Vector helper;
  Matrix agg_A;
  Vector agg_b;
  std::size_t agg_count = 0;
  std::size_t step_count = 0;
  bool diverged = false;

  static LearnerState initial(const Vector& theta0) {
    LearnerState s;
    s.theta = theta0;
    s.helper = Vector::Zero(theta0.size());
    s.agg_A = Matrix::Zero(theta0.size(), theta0.size());
    s.agg_b = Vector::Zero(theta0.size());
    return s;
  }
};

namespace detail {

inline const Transition& as_ref(const Transition& t) { return t; }
inline const Transition& as_ref(const Transition* t) { return *t; }

inline LearnerState finish(LearnerState s) {
  ++s.step_count;
  if (!s.theta.allFinite() || s.theta.norm() > kDivergenceNorm ||
      (s.helper.size() > 0 && !s.helper.allFinite())) {
    s.diverged = true;
  }
  return s;
}

}  // namespace detail

// mean over the batch of rho * delta * phi, an unbiased sample of A theta + b
template <class Range>
Vector mean_td_update(const Range& batch, const Vector& theta) {
  Vector acc = Vector::Zero(theta.size());
  std::size_t n = 0;
  for (const auto& item : batch) {
    const Transition& t = detail::as_ref(item);
    acc += (t.rho * t.td_error(theta)) * t.phi;
    ++n;
  }
  return acc / static_cast<double>(n);
}

// mean over batch1 of rho_i (gamma phi_i' - phi_i) (phi_i . u), where u is the
// mean TD update over batch2. The Impression GTD step is theta -= alpha * this.
template <class Range1, class Range2>
Vector impression_direction(const Range1& batch1, const Range2& batch2, const Vector& theta) {
  const Vector u = mean_td_update(batch2, theta);
  Vector acc = Vector::Zero(theta.size());
  std::size_t n = 0;
  for (const auto& item : batch1) {
    const Transition& t = detail::as_ref(item);
    acc += (t.rho * t.phi.dot(u)) * t.td_gradient();
    ++n;
  }
  return acc / static_cast<double>(n);
}

// A1^T (A2 theta + b2) for explicit aggregate matrices
inline Vector aggregate_direction(const Matrix& a1, const Matrix& a2, const Vector& b2,
                                  const Vector& theta) {
  return a1.transpose() * (a2 * theta + b2);
}

inline LearnerState td_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  s.theta += (hp.alpha * t.rho * t.td_error(s.theta)) * t.phi;
  return detail::finish(std::move(s));
}

inline LearnerState vtrace_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  const double rho = std::min(t.rho, hp.clip);
  s.theta += (hp.alpha * rho * t.td_error(s.theta)) * t.phi;
  return detail::finish(std::move(s));
}

template <class Range>
LearnerState minibatch_td_update(LearnerState s, const Range& batch, const Hyperparams& hp) {
  if (s.diverged) return s;
  s.theta += hp.alpha * mean_td_update(batch, s.theta);
  return detail::finish(std::move(s));
}

inline LearnerState minibatch_td_step(LearnerState s, const ReplayBuffer& buffer,
                                      const Hyperparams& hp, Rng& rng) {
  if (s.diverged || buffer.size() <= hp.warmup.value_or(hp.m1)) return s;
  const auto batch = sample_uniform(buffer, hp.m1, rng);
  if (!batch) return s;
  return minibatch_td_update(std::move(s), *batch, hp);
}

inline LearnerState gtd_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  const double delta = t.td_error(s.theta);
  const Vector theta_step = (hp.alpha * t.rho * t.phi.dot(s.helper)) * t.td_gradient();
  s.helper += hp.helper_step() * ((t.rho * delta) * t.phi - s.helper);
  s.theta -= theta_step;
  return detail::finish(std::move(s));
}

inline LearnerState gtd2_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  const double delta = t.td_error(s.theta);
  const double pred = t.phi.dot(s.helper);
  s.theta -= (hp.alpha * t.rho * pred) * t.td_gradient();
  s.helper += (hp.helper_step() * (t.rho * delta - pred)) * t.phi;
  return detail::finish(std::move(s));
}

inline LearnerState tdc_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  const double delta = t.td_error(s.theta);
  const double pred = t.phi.dot(s.helper);
  s.theta += hp.alpha * t.rho * (delta * t.phi - (t.discount * pred) * t.phi_next);
  s.helper += (hp.helper_step() * (t.rho * delta - pred)) * t.phi;
  return detail::finish(std::move(s));
}

inline LearnerState tdrc_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  const double delta = t.td_error(s.theta);
  const double pred = t.phi.dot(s.helper);
  const double beta = hp.helper_step();
  s.theta += hp.alpha * t.rho * (delta * t.phi - (t.discount * pred) * t.phi_next);
  s.helper += (beta * (t.rho * delta - pred)) * t.phi - (beta * hp.reg) * s.helper;
  return detail::finish(std::move(s));
}

inline LearnerState htd_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  const double delta = t.td_error(s.theta);
  // (phi - gamma phi')^T h
  const double corr = -t.td_gradient().dot(s.helper);
  // written so that rho = 1 reproduces the TD step bit for bit
  s.theta += (hp.alpha * t.rho * delta + hp.alpha * (t.rho - 1.0) * corr) * t.phi;
  s.helper += hp.helper_step() * ((t.rho * delta) * t.phi - corr * t.phi);
  return detail::finish(std::move(s));
}

template <class Range1, class Range2>
LearnerState impression_gtd_update(LearnerState s, const Range1& batch1, const Range2& batch2,
                                   const Hyperparams& hp) {
  if (s.diverged) return s;
  Vector dir = impression_direction(batch1, batch2, s.theta);
  if (hp.symmetric) dir = 0.5 * (dir + impression_direction(batch2, batch1, s.theta));
  s.theta -= hp.alpha * dir;
  return detail::finish(std::move(s));
}

inline std::size_t impression_warmup(const Hyperparams& hp) { return hp.warmup.value_or(hp.m2); }

inline LearnerState impression_gtd_step(LearnerState s, const TwinBuffers& buffers,
                                        const Hyperparams& hp, Rng& rng) {
  if (s.diverged) return s;
  const auto pair = buffers.sample_pair(hp.m1, hp.m2, impression_warmup(hp), rng);
  if (!pair) return s;
  return impression_gtd_update(std::move(s), pair->batch1, pair->batch2, hp);
}

inline LearnerState expected_gtd_update(LearnerState s, const Matrix& a1, const Vector& b1,
                                        const Matrix& a2, const Vector& b2,
                                        const Hyperparams& hp) {
  if (s.diverged) return s;
  Vector dir = aggregate_direction(a1, a2, b2, s.theta);
  if (hp.symmetric) dir = 0.5 * (dir + aggregate_direction(a2, a1, b1, s.theta));
  s.theta -= hp.alpha * dir;
  return detail::finish(std::move(s));
}

inline LearnerState expected_gtd_step(LearnerState s, const TwinBuffers& buffers,
                                      const Hyperparams& hp) {
  if (s.diverged || !buffers.ready(1, 1, hp.warmup.value_or(0))) return s;
  const auto& b1 = buffers.first();
  const auto& b2 = buffers.second();
  return expected_gtd_update(std::move(s), b1.mean_A(), b1.mean_b(), b2.mean_A(), b2.mean_b(),
                             hp);
}

namespace detail {

inline void fold_aggregate(LearnerState& s, const Transition& t) {
  ++s.agg_count;
  const double w = 1.0 / static_cast<double>(s.agg_count);
  s.agg_A += w * (t.rho * t.phi * t.td_gradient().transpose() - s.agg_A);
  s.agg_b += w * (t.rho * t.reward * t.phi - s.agg_b);
}

}  // namespace detail

// Folds t into the running aggregates, then steps along A_t^T (rho delta phi).
inline LearnerState atop_td_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  detail::fold_aggregate(s, t);
  s.theta -= hp.alpha * s.agg_A.transpose() * ((t.rho * t.td_error(s.theta)) * t.phi);
  return detail::finish(std::move(s));
}

// Folds t into the running aggregates, then steps along
// rho (gamma phi' - phi) phi^T (A_t theta + b_t).
inline LearnerState r1gtd_step(LearnerState s, const Transition& t, const Hyperparams& hp) {
  if (s.diverged) return s;
  detail::fold_aggregate(s, t);
  const Vector residual = s.agg_A * s.theta + s.agg_b;
  s.theta -= (hp.alpha * t.rho * t.phi.dot(residual)) * t.td_gradient();
  return detail::finish(std::move(s));
}

// One learner instance of one run: owns its state, any buffers its algorithm
// samples from, and the RNG stream for batch draws.
class Learner {
 public:
  Learner(Algorithm algorithm, Hyperparams hp, const Vector& theta0, std::uint64_t sample_seed,
          TwinBufferOptions buffer_options = {})
      : algorithm_(algorithm),
        hp_(std::move(hp)),
        state_(LearnerState::initial(theta0)),
        twins_(buffer_options),
        replay_(buffer_options.capacity),
        rng_(sample_seed) {
    hp_.validate();
  }

  Algorithm algorithm() const { return algorithm_; }
  const Hyperparams& hyperparams() const { return hp_; }
  const LearnerState& state() const { return state_; }
  const TwinBuffers& buffers() const { return twins_; }
  const ReplayBuffer& replay() const { return replay_; }
  bool diverged() const { return state_.diverged; }

  void observe(const Transition& t) {
    switch (algorithm_) {
      case Algorithm::Td: state_ = td_step(std::move(state_), t, hp_); break;
      case Algorithm::Vtrace: state_ = vtrace_step(std::move(state_), t, hp_); break;
      case Algorithm::Gtd: state_ = gtd_step(std::move(state_), t, hp_); break;
      case Algorithm::Gtd2: state_ = gtd2_step(std::move(state_), t, hp_); break;
      case Algorithm::Tdc: state_ = tdc_step(std::move(state_), t, hp_); break;
      case Algorithm::Tdrc: state_ = tdrc_step(std::move(state_), t, hp_); break;
      case Algorithm::Htd: state_ = htd_step(std::move(state_), t, hp_); break;
      case Algorithm::AtopTd: state_ = atop_td_step(std::move(state_), t, hp_); break;
      case Algorithm::R1Gtd: state_ = r1gtd_step(std::move(state_), t, hp_); break;
      case Algorithm::MinibatchTd:
        replay_.push(t);
        state_ = minibatch_td_step(std::move(state_), replay_, hp_, rng_);
        break;
      case Algorithm::ImpressionGtd:
        twins_.insert(t);
        state_ = impression_gtd_step(std::move(state_), twins_, hp_, rng_);
        break;
      case Algorithm::ExpectedGtd:
        twins_.insert(t);
        state_ = expected_gtd_step(std::move(state_), twins_, hp_);
        break;
    }
  }

 private:
  Algorithm algorithm_;
  Hyperparams hp_;
  LearnerState state_;
  TwinBuffers twins_;
  ReplayBuffer replay_;
  Rng rng_;
};

}  // namespace gtdlab
