#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gtdlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kStochasticTol = 1e-12;

struct MdpModel {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  // transition[a](s, s') = P(s' | s, a); reward[a](s, s') = r(s, a, s')
  std::vector<Matrix> transition;
  std::vector<Matrix> reward;
  double gamma = 0.9;
  Vector start_dist;
  std::vector<bool> terminal;

  bool episodic() const {
    for (bool t : terminal) {
      if (t) return true;
    }
    return false;
  }

  std::vector<std::size_t> nonterminal_states() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < n_states; ++s) {
      if (!terminal[s]) out.push_back(s);
    }
    return out;
  }

  // Undiscounted episodic tasks (gamma == 1) are accepted; properness is
  // checked later by the solvers.
  void validate() const {
    if (n_states == 0 || n_actions == 0) throw ModelError("empty MDP");
    if (transition.size() != n_actions || reward.size() != n_actions) {
      throw ModelError("transition/reward tensors do not match n_actions");
    }
    if (terminal.size() != n_states) throw ModelError("terminal mask size mismatch");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ModelError("gamma must lie in (0, 1]");
    if (gamma == 1.0 && !episodic()) throw ModelError("gamma = 1 requires an episodic MDP");
    const auto n = static_cast<Eigen::Index>(n_states);
    if (start_dist.size() != n) throw ModelError("start distribution size mismatch");
    if ((start_dist.array() < 0.0).any() ||
        std::abs(start_dist.sum() - 1.0) > kStochasticTol) {
      throw ModelError("start distribution is not a probability vector");
    }
    for (std::size_t a = 0; a < n_actions; ++a) {
      const Matrix& p = transition[a];
      if (p.rows() != n || p.cols() != n || reward[a].rows() != n || reward[a].cols() != n) {
        throw ModelError("transition/reward matrix has wrong shape");
      }
      if ((p.array() < 0.0).any()) throw ModelError("negative transition probability");
      if (!reward[a].allFinite()) throw ModelError("non-finite reward");
      for (Eigen::Index s = 0; s < n; ++s) {
        if (std::abs(p.row(s).sum() - 1.0) > kStochasticTol) {
          throw ModelError("transition row " + std::to_string(s) + " does not sum to 1");
        }
        if (terminal[static_cast<std::size_t>(s)]) {
          if (p(s, s) != 1.0 || reward[a](s, s) != 0.0) {
            throw ModelError("terminal state " + std::to_string(s) +
                             " must self-loop with zero reward");
          }
        }
      }
    }
  }
};

struct Policy {
  Matrix action_probs;  // action_probs(s, a) = pi(a | s)

  double prob(std::size_t s, std::size_t a) const {
    return action_probs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
  }

  void validate(const MdpModel& mdp) const {
    if (action_probs.rows() != static_cast<Eigen::Index>(mdp.n_states) ||
        action_probs.cols() != static_cast<Eigen::Index>(mdp.n_actions)) {
      throw ModelError("policy table has wrong shape");
    }
    if ((action_probs.array() < 0.0).any()) throw ModelError("negative action probability");
    for (Eigen::Index s = 0; s < action_probs.rows(); ++s) {
      if (std::abs(action_probs.row(s).sum() - 1.0) > kStochasticTol) {
        throw ModelError("policy row " + std::to_string(s) + " does not sum to 1");
      }
    }
  }
};

enum class FeatureVariant { Tabular, Inverted, Dependent, Interpolated, Baird };

inline std::string_view to_string(FeatureVariant v) {
  switch (v) {
    case FeatureVariant::Tabular: return "tabular";
    case FeatureVariant::Inverted: return "inverted";
    case FeatureVariant::Dependent: return "dependent";
    case FeatureVariant::Interpolated: return "interpolated";
    case FeatureVariant::Baird: return "baird";
  }
  return "unknown";
}

struct FeatureMap {
  Matrix phi;  // n_states x d
  FeatureVariant variant = FeatureVariant::Tabular;

  std::size_t dim() const { return static_cast<std::size_t>(phi.cols()); }
  Vector row(std::size_t s) const { return phi.row(static_cast<Eigen::Index>(s)).transpose(); }

  void validate(const MdpModel& mdp) const {
    if (phi.rows() != static_cast<Eigen::Index>(mdp.n_states) || phi.cols() == 0) {
      throw ModelError("feature matrix has wrong shape");
    }
    if (!phi.allFinite()) throw ModelError("non-finite feature entry");
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      if (mdp.terminal[s] && !phi.row(static_cast<Eigen::Index>(s)).isZero(0.0)) {
        throw ModelError("terminal state " + std::to_string(s) + " needs a zero feature vector");
      }
    }
  }
};

struct Transition {
  Vector phi;
  Vector phi_next;
  double reward = 0.0;
  double rho = 1.0;
  double discount = 1.0;
  std::size_t episode_idx = 0;
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t next_state = 0;

  double td_error(const Vector& theta) const {
    return reward + discount * phi_next.dot(theta) - phi.dot(theta);
  }
  // gamma * phi' - phi, the gradient of the TD error in theta
  Vector td_gradient() const { return discount * phi_next - phi; }
};

struct ExpectedMatrices {
  Matrix A;
  Vector b;
  Matrix C;
  Matrix D;
  Vector occupancy;
};

// P_pi(s, s') = sum_a pi(a|s) P(s'|s,a)
inline Matrix policy_transition(const MdpModel& mdp, const Policy& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states);
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t a = 0; a < mdp.n_actions; ++a) {
    p += pi.action_probs.col(static_cast<Eigen::Index>(a)).asDiagonal() * mdp.transition[a];
  }
  return p;
}

// r_pi(s) = sum_a pi(a|s) sum_s' P(s'|s,a) r(s,a,s')
inline Vector policy_reward(const MdpModel& mdp, const Policy& pi) {
  const auto n = static_cast<Eigen::Index>(mdp.n_states);
  Vector r = Vector::Zero(n);
  for (std::size_t a = 0; a < mdp.n_actions; ++a) {
    const Vector per_state = mdp.transition[a].cwiseProduct(mdp.reward[a]).rowwise().sum();
    r += pi.action_probs.col(static_cast<Eigen::Index>(a)).cwiseProduct(per_state);
  }
  return r;
}

namespace detail {

inline Matrix restrict(const Matrix& m, const std::vector<std::size_t>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = m(idx[i], idx[j]);
  }
  return out;
}

inline Vector restrict(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

inline double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

inline Vector true_values(const MdpModel& mdp, const Policy& pi) {
  mdp.validate();
  pi.validate(mdp);
  const auto idx = mdp.nonterminal_states();
  const Matrix q = mdp.gamma * detail::restrict(policy_transition(mdp, pi), idx);
  const Vector r = detail::restrict(policy_reward(mdp, pi), idx);
  if (detail::spectral_radius(q) >= 1.0 - 1e-12) throw ModelError("non-contractive chain");
  const Matrix system = Matrix::Identity(q.rows(), q.cols()) - q;
  const Vector v = system.fullPivLu().solve(r);
  const double residual = (system * v - r).lpNorm<Eigen::Infinity>();
  if (!v.allFinite() || residual > 1e-10 * std::max(1.0, r.lpNorm<Eigen::Infinity>())) {
    throw ModelError("non-contractive chain");
  }
  Vector out = Vector::Zero(static_cast<Eigen::Index>(mdp.n_states));
  for (std::size_t i = 0; i < idx.size(); ++i) out(idx[i]) = v(static_cast<Eigen::Index>(i));
  return out;
}

// Full-length state distribution, zero on terminals. Episodic chains use
// normalized expected visit counts; chains without terminals use the
// stationary distribution.
inline Vector occupancy(const MdpModel& mdp, const Policy& pi) {
  mdp.validate();
  pi.validate(mdp);
  const Matrix p = policy_transition(mdp, pi);
  const auto idx = mdp.nonterminal_states();
  const auto k = static_cast<Eigen::Index>(idx.size());
  Vector d(k);
  if (mdp.episodic()) {
    const Matrix q = detail::restrict(p, idx);
    if (detail::spectral_radius(q) >= 1.0 - 1e-12) {
      throw ModelError("occupancy: episodes do not terminate with probability 1");
    }
    const Vector d0 = detail::restrict(mdp.start_dist, idx);
    const Matrix system = Matrix::Identity(k, k) - q.transpose();
    d = system.fullPivLu().solve(d0);
    if (!d.allFinite() || (system * d - d0).lpNorm<Eigen::Infinity>() > 1e-9) {
      throw ModelError("occupancy: expected-visit solve did not converge");
    }
  } else {
    Matrix system(k + 1, k);
    system.topRows(k) = p.transpose() - Matrix::Identity(k, k);
    system.row(k).setOnes();
    Vector rhs = Vector::Zero(k + 1);
    rhs(k) = 1.0;
    d = system.colPivHouseholderQr().solve(rhs);
    if (!d.allFinite() || (system * d - rhs).lpNorm<Eigen::Infinity>() > 1e-9) {
      throw ModelError("occupancy: no unique stationary distribution");
    }
  }
  d = d.cwiseMax(0.0);
  d /= d.sum();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(mdp.n_states));
  for (std::size_t i = 0; i < idx.size(); ++i) out(idx[i]) = d(static_cast<Eigen::Index>(i));
  return out;
}

inline void check_coverage(const MdpModel& mdp, const Policy& target, const Policy& behavior) {
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      if (target.prob(s, a) > 0.0 && behavior.prob(s, a) == 0.0) {
        throw ModelError("behavior policy does not cover target action " + std::to_string(a) +
                         " in state " + std::to_string(s));
      }
    }
  }
}

inline double importance_ratio(const Policy& target, const Policy& behavior, std::size_t s,
                               std::size_t a) {
  const double pb = behavior.prob(s, a);
  return pb > 0.0 ? target.prob(s, a) / pb : 0.0;
}

inline ExpectedMatrices expected_matrices(const MdpModel& mdp, const Policy& target,
                                          const Policy& behavior, const FeatureMap& features) {
  features.validate(mdp);
  target.validate(mdp);
  check_coverage(mdp, target, behavior);
  ExpectedMatrices out;
  out.occupancy = occupancy(mdp, behavior);
  const Matrix& phi = features.phi;
  const Matrix weighted = phi.transpose() * out.occupancy.asDiagonal();
  const Matrix p = policy_transition(mdp, target);
  out.C = weighted * phi;
  out.D = mdp.gamma * weighted * p * phi;
  out.A = out.D - out.C;
  out.b = weighted * policy_reward(mdp, target);
  return out;
}

inline Vector td_solution(const ExpectedMatrices& mats) {
  Eigen::JacobiSVD<Matrix> svd(mats.A);
  if (svd.singularValues().minCoeff() <= 1e-10) throw ModelError("no unique TD solution");
  const Vector theta = mats.A.fullPivLu().solve(-mats.b);
  if ((mats.A * theta + mats.b).norm() >= 1e-10 * std::max(1.0, mats.b.norm())) {
    throw ModelError("no unique TD solution");
  }
  return theta;
}

// Minimum-norm least-squares solution of A theta = -b; agrees with
// td_solution whenever A is non-singular.
inline Vector min_norm_td_solution(const ExpectedMatrices& mats) {
  return mats.A.completeOrthogonalDecomposition().solve(-mats.b);
}

struct SupportPoint {
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t next_state = 0;
  double prob = 0.0;
  double rho = 0.0;
  double reward = 0.0;
};

// The behavior-weighted transition distribution d_b(s) pi_b(a|s) P(s'|s,a)
// enumerated point by point, with zero-probability points dropped.
class TransitionDistribution {
 public:
  TransitionDistribution(const MdpModel& mdp, const Policy& target, const Policy& behavior,
                         const FeatureMap& features)
      : features_(features.phi), gamma_(mdp.gamma) {
    check_coverage(mdp, target, behavior);
    const Vector d = occupancy(mdp, behavior);
    std::vector<double> weights;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      if (d(static_cast<Eigen::Index>(s)) == 0.0) continue;
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        const double pa = behavior.prob(s, a);
        if (pa == 0.0) continue;
        for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
          const auto si = static_cast<Eigen::Index>(s);
          const auto s2i = static_cast<Eigen::Index>(s2);
          const double pt = mdp.transition[a](si, s2i);
          if (pt == 0.0) continue;
          SupportPoint sp{s, a, s2, d(si) * pa * pt, importance_ratio(target, behavior, s, a),
                          mdp.reward[a](si, s2i)};
          weights.push_back(sp.prob);
          points_.push_back(sp);
        }
      }
    }
    picker_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  }

  const std::vector<SupportPoint>& points() const { return points_; }

  Transition make(const SupportPoint& sp, std::size_t episode_idx = 0) const {
    Transition t;
    t.phi = features_.row(static_cast<Eigen::Index>(sp.state)).transpose();
    t.phi_next = features_.row(static_cast<Eigen::Index>(sp.next_state)).transpose();
    t.reward = sp.reward;
    t.rho = sp.rho;
    t.discount = gamma_;
    t.episode_idx = episode_idx;
    t.state = sp.state;
    t.action = sp.action;
    t.next_state = sp.next_state;
    return t;
  }

  // i.i.d. draw from the distribution; used by the Monte-Carlo oracles
  Transition sample(Rng& rng, std::size_t episode_idx = 0) {
    return make(points_[picker_(rng)], episode_idx);
  }

 private:
  Matrix features_;
  double gamma_;
  std::vector<SupportPoint> points_;
  std::discrete_distribution<std::size_t> picker_;
};

struct SigmaMatrices {
  Matrix sigma_A;
  Vector sigma_b;
};

// Exact elementwise standard deviations of rho * phi (gamma phi' - phi)^T and
// rho * phi * r over the behavior-weighted transition distribution.
inline SigmaMatrices sigma_matrices(const MdpModel& mdp, const Policy& target,
                                    const Policy& behavior, const FeatureMap& features) {
  const TransitionDistribution dist(mdp, target, behavior, features);
  const auto dim = static_cast<Eigen::Index>(features.dim());
  Matrix mean_a = Matrix::Zero(dim, dim);
  Matrix second_a = Matrix::Zero(dim, dim);
  Vector mean_b = Vector::Zero(dim);
  Vector second_b = Vector::Zero(dim);
  for (const auto& sp : dist.points()) {
    const Transition t = dist.make(sp);
    const Matrix x = t.rho * t.phi * t.td_gradient().transpose();
    const Vector y = t.rho * t.reward * t.phi;
    mean_a += sp.prob * x;
    second_a += sp.prob * x.cwiseAbs2();
    mean_b += sp.prob * y;
    second_b += sp.prob * y.cwiseAbs2();
  }
  SigmaMatrices out;
  out.sigma_A = (second_a - mean_a.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  out.sigma_b = (second_b - mean_b.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  return out;
}

namespace detail {

inline std::size_t sample_row(const Matrix& table, Eigen::Index row, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  Eigen::Index last = -1;
  for (Eigen::Index j = 0; j < table.cols(); ++j) {
    const double p = table(row, j);
    if (p <= 0.0) continue;
    acc += p;
    last = j;
    if (u < acc) return static_cast<std::size_t>(j);
  }
  return static_cast<std::size_t>(last);
}

inline std::size_t sample_vector(const Vector& probs, Rng& rng) {
  return sample_row(Matrix(probs.transpose()), 0, rng);
}

}  // namespace detail

struct EpisodeOptions {
  std::size_t max_steps = 1'000'000;
  // Segment length for MDPs without terminal states; 0 means "run to the cap".
  std::size_t horizon = 0;
};

// Streams transitions episode after episode under the behavior policy.
// Episodes are numbered from first_episode upward.
class Simulator {
 public:
  Simulator(const MdpModel& mdp, const Policy& behavior, const Policy& target,
            const FeatureMap& features, std::uint64_t seed, EpisodeOptions options = {},
            std::size_t first_episode = 1)
      : mdp_(&mdp),
        behavior_(&behavior),
        target_(&target),
        features_(&features),
        rng_(seed),
        options_(options),
        episode_(first_episode) {
    mdp.validate();
    behavior.validate(mdp);
    target.validate(mdp);
    features.validate(mdp);
    check_coverage(mdp, target, behavior);
    reset();
  }

  std::size_t episode() const { return episode_; }
  bool at_episode_start() const { return steps_in_episode_ == 0; }

  Transition step() {
    const auto s = state_;
    const auto si = static_cast<Eigen::Index>(s);
    const auto a = detail::sample_row(behavior_->action_probs, si, rng_);
    const auto s2 = detail::sample_row(mdp_->transition[a], si, rng_);
    Transition t;
    t.phi = features_->row(s);
    t.phi_next = features_->row(s2);
    t.reward = mdp_->reward[a](si, static_cast<Eigen::Index>(s2));
    t.rho = importance_ratio(*target_, *behavior_, s, a);
    t.discount = mdp_->gamma;
    t.episode_idx = episode_;
    t.state = s;
    t.action = a;
    t.next_state = s2;
    ++steps_in_episode_;
    if (mdp_->terminal[s2] ||
        (options_.horizon > 0 && steps_in_episode_ >= options_.horizon)) {
      ++episode_;
      reset();
    } else if (steps_in_episode_ >= options_.max_steps) {
      throw ModelError("non-terminating episode");
    } else {
      state_ = s2;
    }
    return t;
  }

 private:
  void reset() {
    steps_in_episode_ = 0;
    state_ = detail::sample_vector(mdp_->start_dist, rng_);
    if (mdp_->terminal[state_]) throw ModelError("episode starts in a terminal state");
  }

  const MdpModel* mdp_;
  const Policy* behavior_;
  const Policy* target_;
  const FeatureMap* features_;
  Rng rng_;
  EpisodeOptions options_;
  std::size_t episode_;
  std::size_t state_ = 0;
  std::size_t steps_in_episode_ = 0;
};

inline std::vector<Transition> sample_episode(const MdpModel& mdp, const Policy& behavior,
                                              const Policy& target, const FeatureMap& features,
                                              std::uint64_t seed, std::size_t episode_idx = 1,
                                              EpisodeOptions options = {}) {
  Simulator sim(mdp, behavior, target, features, seed, options, episode_idx);
  std::vector<Transition> out;
  while (sim.episode() == episode_idx) out.push_back(sim.step());
  return out;
}

}  // namespace gtdlab
