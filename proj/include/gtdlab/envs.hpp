#pragma once

#include "gtdlab/mdp.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace gtdlab {

struct Benchmark {
  std::string name;
  MdpModel mdp;
  FeatureMap features;
  Policy target;
  Policy behavior;
  Vector initial_theta;
  // segment length used to cut a continuing chain into restartable episodes
  std::size_t continuing_horizon = 0;

  std::size_t dim() const { return features.dim(); }
  EpisodeOptions episode_options() const {
    EpisodeOptions opts;
    opts.horizon = continuing_horizon;
    return opts;
  }
  bool on_policy() const { return target.action_probs == behavior.action_probs; }
};

namespace detail {

inline MdpModel blank_mdp(std::size_t n_states, std::size_t n_actions, double gamma) {
  MdpModel m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  const auto n = static_cast<Eigen::Index>(n_states);
  m.transition.assign(n_actions, Matrix::Zero(n, n));
  m.reward.assign(n_actions, Matrix::Zero(n, n));
  m.gamma = gamma;
  m.start_dist = Vector::Zero(n);
  m.terminal.assign(n_states, false);
  return m;
}

inline void make_absorbing(MdpModel& m, std::size_t s) {
  m.terminal[s] = true;
  const auto si = static_cast<Eigen::Index>(s);
  for (auto& p : m.transition) {
    p.row(si).setZero();
    p(si, si) = 1.0;
  }
}

inline Matrix normalize_rows(Matrix phi) {
  for (Eigen::Index r = 0; r < phi.rows(); ++r) {
    const double n = phi.row(r).norm();
    if (n > 0.0) phi.row(r) /= n;
  }
  return phi;
}

}  // namespace detail

// Boyan chain: states 12..0 at indices 12..0, terminal at index 13.
inline Benchmark boyan_chain() {
  constexpr std::size_t n_chain = 13;
  constexpr std::size_t terminal = n_chain;
  Benchmark bm;
  bm.name = "boyan";
  bm.mdp = detail::blank_mdp(n_chain + 1, 1, 1.0);
  auto& p = bm.mdp.transition[0];
  auto& r = bm.mdp.reward[0];
  for (Eigen::Index i = 2; i < static_cast<Eigen::Index>(n_chain); ++i) {
    p(i, i - 1) = 0.5;
    p(i, i - 2) = 0.5;
    r(i, i - 1) = -3.0;
    r(i, i - 2) = -3.0;
  }
  p(1, 0) = 1.0;
  r(1, 0) = -2.0;
  p(0, terminal) = 1.0;
  r(0, terminal) = -3.0;
  detail::make_absorbing(bm.mdp, terminal);
  bm.mdp.start_dist(12) = 1.0;

  Matrix phi = Matrix::Zero(n_chain + 1, 4);
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(n_chain); ++s) {
    const Eigen::Index k = s / 4;
    const double frac = static_cast<double>(s - 4 * k) / 4.0;
    phi(s, k) = 1.0 - frac;
    if (frac > 0.0) phi(s, k + 1) = frac;
  }
  bm.features = {phi, FeatureVariant::Interpolated};
  bm.target.action_probs = Matrix::Ones(n_chain + 1, 1);
  bm.behavior = bm.target;
  bm.initial_theta = Vector::Zero(4);
  bm.mdp.validate();
  return bm;
}

enum class WalkRepresentation { Tabular, Inverted, Dependent };

// Five-state random walk: terminals at indices 0 and 6, start in the middle.
// Action 0 moves left, action 1 moves right.
inline Benchmark random_walk(WalkRepresentation rep) {
  constexpr std::size_t n = 7;
  Benchmark bm;
  bm.mdp = detail::blank_mdp(n, 2, 1.0);
  for (Eigen::Index s = 1; s <= 5; ++s) {
    bm.mdp.transition[0](s, s - 1) = 1.0;
    bm.mdp.transition[1](s, s + 1) = 1.0;
  }
  bm.mdp.reward[0](1, 0) = -1.0;
  bm.mdp.reward[1](5, 6) = 1.0;
  detail::make_absorbing(bm.mdp, 0);
  detail::make_absorbing(bm.mdp, 6);
  bm.mdp.start_dist(3) = 1.0;

  bm.target.action_probs = Matrix(n, 2);
  bm.behavior.action_probs = Matrix(n, 2);
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(n); ++s) {
    bm.target.action_probs.row(s) << 0.4, 0.6;
    bm.behavior.action_probs.row(s) << 0.5, 0.5;
  }

  Matrix phi;
  switch (rep) {
    case WalkRepresentation::Tabular:
      bm.name = "rw-tab";
      phi = Matrix::Zero(n, 5);
      phi.middleRows(1, 5) = Matrix::Identity(5, 5);
      bm.features = {phi, FeatureVariant::Tabular};
      break;
    case WalkRepresentation::Inverted:
      bm.name = "rw-inv";
      phi = Matrix::Zero(n, 5);
      phi.middleRows(1, 5) = Matrix::Ones(5, 5) - Matrix::Identity(5, 5);
      bm.features = {detail::normalize_rows(phi), FeatureVariant::Inverted};
      break;
    case WalkRepresentation::Dependent:
      bm.name = "rw-dep";
      phi = Matrix::Zero(n, 3);
      phi.middleRows(1, 5) << 1, 0, 0,
                              1, 1, 0,
                              1, 1, 1,
                              0, 1, 1,
                              0, 0, 1;
      bm.features = {detail::normalize_rows(phi), FeatureVariant::Dependent};
      break;
  }
  bm.initial_theta = Vector::Zero(static_cast<Eigen::Index>(bm.features.dim()));
  bm.mdp.validate();
  return bm;
}

inline WalkRepresentation parse_walk_representation(std::string_view tag) {
  if (tag == "tabular" || tag == "tab") return WalkRepresentation::Tabular;
  if (tag == "inverted" || tag == "inv") return WalkRepresentation::Inverted;
  if (tag == "dependent" || tag == "dep") return WalkRepresentation::Dependent;
  throw ModelError("unknown random-walk representation '" + std::string(tag) + "'");
}

// Seven-state star. Index 6 is the lower state reached by the solid action;
// the dashed action jumps uniformly to one of the six upper states.
inline Benchmark baird() {
  constexpr std::size_t n = 7;
  constexpr std::size_t dash = 0;
  constexpr std::size_t solid = 1;
  Benchmark bm;
  bm.name = "baird";
  bm.mdp = detail::blank_mdp(n, 2, 0.9);
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(n); ++s) {
    for (Eigen::Index u = 0; u < 6; ++u) bm.mdp.transition[dash](s, u) = 1.0 / 6.0;
    bm.mdp.transition[solid](s, 6) = 1.0;
  }
  bm.mdp.start_dist = Vector::Constant(n, 1.0 / 7.0);

  Matrix phi = Matrix::Zero(n, 8);
  for (Eigen::Index s = 0; s < 6; ++s) {
    phi(s, s) = 2.0;
    phi(s, 7) = 1.0;
  }
  phi(6, 6) = 1.0;
  phi(6, 7) = 2.0;
  bm.features = {phi, FeatureVariant::Baird};

  bm.behavior.action_probs = Matrix(n, 2);
  bm.target.action_probs = Matrix(n, 2);
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(n); ++s) {
    bm.behavior.action_probs.row(s) << 6.0 / 7.0, 1.0 / 7.0;
    bm.target.action_probs.row(s) << 0.0, 1.0;
  }
  bm.initial_theta = Vector::Ones(8);
  bm.initial_theta(6) = 10.0;
  bm.continuing_horizon = 10;
  bm.mdp.validate();
  return bm;
}

inline const std::array<std::string_view, 5>& benchmark_names() {
  static const std::array<std::string_view, 5> names{"boyan", "rw-tab", "rw-inv", "rw-dep",
                                                     "baird"};
  return names;
}

inline Benchmark make_benchmark(std::string_view name) {
  if (name == "boyan") return boyan_chain();
  if (name == "rw-tab") return random_walk(WalkRepresentation::Tabular);
  if (name == "rw-inv") return random_walk(WalkRepresentation::Inverted);
  if (name == "rw-dep") return random_walk(WalkRepresentation::Dependent);
  if (name == "baird") return baird();
  throw ModelError("unknown benchmark '" + std::string(name) + "'");
}

}  // namespace gtdlab
