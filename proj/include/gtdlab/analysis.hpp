#pragma once

#include "gtdlab/buffers.hpp"
#include "gtdlab/envs.hpp"
#include "gtdlab/learners.hpp"
#include "gtdlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

namespace gtdlab {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

inline double min_singular_value(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues().minCoeff();
}

// ---------------------------------------------------------------- metrics

inline double neu(const Vector& theta, const ExpectedMatrices& mats) {
  return (mats.A * theta + mats.b).squaredNorm();
}

inline Vector neu_grad(const Vector& theta, const ExpectedMatrices& mats) {
  return 2.0 * mats.A.transpose() * (mats.A * theta + mats.b);
}

inline double rmspbe(const Vector& theta, const ExpectedMatrices& mats) {
  Eigen::JacobiSVD<Matrix> svd(mats.C);
  const auto& sv = svd.singularValues();
  if (sv.minCoeff() <= 1e-12 * std::max(1.0, sv(0))) {
    throw std::domain_error("ill-conditioned preconditioner");
  }
  const Vector r = mats.A * theta + mats.b;
  return std::sqrt(std::max(0.0, r.dot(mats.C.ldlt().solve(r))));
}

inline double rmsve(const Vector& theta, const Matrix& phi, const Vector& values,
                    const std::vector<std::size_t>& states) {
  double acc = 0.0;
  for (std::size_t s : states) {
    const auto si = static_cast<Eigen::Index>(s);
    const double e = values(si) - phi.row(si).dot(theta);
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(states.size()));
}

inline double rmsve(const Vector& theta, const Benchmark& bm) {
  return rmsve(theta, bm.features.phi, true_values(bm.mdp, bm.target),
               bm.mdp.nonterminal_states());
}

enum class Metric { Rmsve, Rmspbe, Neu };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Rmsve: return "rmsve";
    case Metric::Rmspbe: return "rmspbe";
    case Metric::Neu: return "neu";
  }
  return "unknown";
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "rmsve") return Metric::Rmsve;
  if (s == "rmspbe") return Metric::Rmspbe;
  if (s == "neu") return Metric::Neu;
  return std::nullopt;
}

// Precomputed exact quantities for repeated metric evaluation.
class Evaluator {
 public:
  explicit Evaluator(const Benchmark& bm)
      : phi_(bm.features.phi),
        values_(true_values(bm.mdp, bm.target)),
        states_(bm.mdp.nonterminal_states()),
        mats_(expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features)) {
    Eigen::JacobiSVD<Matrix> svd(mats_.C);
    const auto& sv = svd.singularValues();
    if (sv.minCoeff() > 1e-12 * std::max(1.0, sv(0))) c_factor_ = mats_.C.ldlt();
  }

  const ExpectedMatrices& matrices() const { return mats_; }
  const Vector& values() const { return values_; }
  bool has_rmspbe() const { return c_factor_.has_value(); }

  double rmsve(const Vector& theta) const { return gtdlab::rmsve(theta, phi_, values_, states_); }
  double neu(const Vector& theta) const { return gtdlab::neu(theta, mats_); }
  double rmspbe(const Vector& theta) const {
    if (!c_factor_) throw std::domain_error("ill-conditioned preconditioner");
    const Vector r = mats_.A * theta + mats_.b;
    return std::sqrt(std::max(0.0, r.dot(c_factor_->solve(r))));
  }
  double metric(Metric m, const Vector& theta) const {
    switch (m) {
      case Metric::Rmsve: return rmsve(theta);
      case Metric::Rmspbe: return rmspbe(theta);
      case Metric::Neu: return neu(theta);
    }
    return kNaN;
  }

 private:
  Matrix phi_;
  Vector values_;
  std::vector<std::size_t> states_;
  ExpectedMatrices mats_;
  std::optional<Eigen::LDLT<Matrix>> c_factor_;
};

// Double sum over B1 x B2 of (phi1 . phi2) rho1 delta1 rho2 delta2, normalized
// by |B1||B2|.
template <class Range1, class Range2>
double empirical_neu(const Vector& theta, const Range1& b1, const Range2& b2) {
  double acc = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  for (const auto& x : b1) {
    const Transition& t1 = detail::as_ref(x);
    const double w1 = t1.rho * t1.td_error(theta);
    n2 = 0;
    for (const auto& y : b2) {
      const Transition& t2 = detail::as_ref(y);
      acc += t1.phi.dot(t2.phi) * w1 * t2.rho * t2.td_error(theta);
      ++n2;
    }
    ++n1;
  }
  return acc / (static_cast<double>(n1) * static_cast<double>(n2));
}

inline double empirical_neu(const Vector& theta, const TwinBuffers& buffers) {
  return empirical_neu(theta, buffers.first().items(), buffers.second().items());
}

struct MspbeReport {
  double pair_objective = 0.0;   // exact double expectation with sim = phi1^T C^-1 phi2
  double mspbe = 0.0;
  double pair_identity = 0.0;    // same double expectation with sim = phi1^T phi2
  double neu = 0.0;
  double abs_diff = 0.0;
  double identity_abs_diff = 0.0;
};

// Evaluates the pair objective as an explicit double sum over the support of
// the transition distribution and compares it with the matrix forms.
inline MspbeReport mspbe_equivalence_check(const Vector& theta, const Benchmark& bm) {
  const ExpectedMatrices mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
  const TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  const auto ldlt = mats.C.ldlt();
  std::vector<Vector> phis;
  std::vector<double> weights;
  for (const auto& sp : dist.points()) {
    const Transition t = dist.make(sp);
    phis.push_back(t.phi);
    weights.push_back(sp.prob * t.rho * t.td_error(theta));
  }
  MspbeReport r;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const Vector left = ldlt.solve(phis[i]);
    for (std::size_t j = 0; j < phis.size(); ++j) {
      r.pair_objective += weights[i] * weights[j] * left.dot(phis[j]);
      r.pair_identity += weights[i] * weights[j] * phis[i].dot(phis[j]);
    }
  }
  const Vector res = mats.A * theta + mats.b;
  r.mspbe = res.dot(ldlt.solve(res));
  r.neu = res.squaredNorm();
  r.abs_diff = std::abs(r.pair_objective - r.mspbe);
  r.identity_abs_diff = std::abs(r.pair_identity - r.neu);
  return r;
}

// ------------------------------------------------------------- constants

struct ProblemConstants {
  ExpectedMatrices mats;
  SigmaMatrices sigmas;
  Vector theta_star;
  bool a_singular = false;
  std::size_t m1 = 1;
  std::size_t m2 = 1;
  double mu = 0.0;
  double norm_A = 0.0;
  double norm_SigmaA = 0.0;
  double norm_Sigmab = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  double L = 0.0;
  double lambda = 0.0;
  double sigma2 = 0.0;
  double sigma_v2 = kNaN;  // filled by sigma_v2_estimate
  double L_max = kNaN;     // filled by l_max
};

inline ProblemConstants smoothness_constants(const ExpectedMatrices& mats,
                                             const SigmaMatrices& sigmas, std::size_t m1,
                                             std::size_t m2) {
  if (m1 < 1 || m2 < 1) throw std::invalid_argument("batch sizes must be at least 1");
  ProblemConstants c;
  c.mats = mats;
  c.sigmas = sigmas;
  c.m1 = m1;
  c.m2 = m2;
  const double smin = min_singular_value(mats.A);
  c.a_singular = smin <= 1e-10;
  c.mu = c.a_singular ? 0.0 : smin * smin;
  c.theta_star = c.a_singular ? min_norm_td_solution(mats) : td_solution(mats);
  c.norm_A = spectral_norm(mats.A);
  c.norm_SigmaA = spectral_norm(sigmas.sigma_A);
  c.norm_Sigmab = sigmas.sigma_b.norm();
  const double s = c.norm_SigmaA * c.norm_SigmaA;
  const double a2 = c.norm_A * c.norm_A;
  const double f1 = static_cast<double>(m1);
  const double f2 = static_cast<double>(m2);
  c.L1 = 4.0 * (s / f1 + a2);
  c.L2 = s / f2;
  c.L = c.L1 + c.L2;
  c.lambda = 2.0 * s * s / (f1 * f2);
  c.sigma2 = 16.0 * (s / f1 + a2) *
             (s / f2 * c.theta_star.squaredNorm() + c.norm_Sigmab * c.norm_Sigmab / f2);
  return c;
}

inline ProblemConstants problem_constants(const Benchmark& bm, std::size_t m1, std::size_t m2) {
  return smoothness_constants(expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features),
                              sigma_matrices(bm.mdp, bm.target, bm.behavior, bm.features), m1,
                              m2);
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

namespace detail {

class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  McEstimate estimate() const {
    McEstimate e;
    e.mean = mean_;
    e.n = n_;
    e.std_error = n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_))
                       : 0.0;
    return e;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace detail

// Monte-Carlo estimate of E||g - f'||^2 at theta for the single-pair
// gradient sample g = rho_i (gamma phi_i' - phi_i)(phi_i . phi_j) rho_j delta_j.
// Evaluated at the TD solution this is an upper bound on sigma_v^2.
inline McEstimate pair_gradient_variance(const Benchmark& bm, const Vector& theta,
                                         std::size_t n_samples, Rng& rng) {
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  const ExpectedMatrices mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
  const Vector mean_grad = mats.A.transpose() * (mats.A * theta + mats.b);
  detail::RunningStats stats;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Transition ti = dist.sample(rng);
    const Transition tj = dist.sample(rng);
    const Vector g = (ti.rho * ti.phi.dot(tj.phi) * tj.rho * tj.td_error(theta)) * ti.td_gradient();
    stats.add((g - mean_grad).squaredNorm());
  }
  return stats.estimate();
}

inline McEstimate sigma_v2_estimate(const Benchmark& bm, std::size_t n_samples, Rng& rng) {
  const ExpectedMatrices mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
  const double smin = min_singular_value(mats.A);
  const Vector theta_star = smin > 1e-10 ? td_solution(mats) : min_norm_td_solution(mats);
  return pair_gradient_variance(bm, theta_star, n_samples, rng);
}

// Lipschitz constant of the pair gradient, via its rank-one structure:
// rho_i rho_j |phi_i . phi_j| ||gamma phi_i' - phi_i|| ||gamma phi_j' - phi_j||.
inline double pair_lipschitz(const Transition& ti, const Transition& tj) {
  return ti.rho * tj.rho * std::abs(ti.phi.dot(tj.phi)) * ti.td_gradient().norm() *
         tj.td_gradient().norm();
}

namespace detail {

inline std::vector<const Transition*> distinct_transitions(const ReplayBuffer& buf) {
  std::vector<const Transition*> out;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  for (const auto& t : buf.items()) {
    const auto key = std::make_tuple(t.state, t.action, t.next_state);
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      seen.push_back(key);
      out.push_back(&t);
    }
  }
  return out;
}

}  // namespace detail

inline double l_max(const TwinBuffers& buffers) {
  const auto b1 = detail::distinct_transitions(buffers.first());
  const auto b2 = detail::distinct_transitions(buffers.second());
  double best = 0.0;
  for (const auto* ti : b1) {
    for (const auto* tj : b2) best = std::max(best, pair_lipschitz(*ti, *tj));
  }
  return best;
}

// L_max over every pair of transitions the benchmark can generate.
inline double l_max_support(const Benchmark& bm) {
  const TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  std::vector<Transition> ts;
  for (const auto& sp : dist.points()) ts.push_back(dist.make(sp));
  double best = 0.0;
  for (const auto& ti : ts) {
    for (const auto& tj : ts) best = std::max(best, pair_lipschitz(ti, tj));
  }
  return best;
}

// ------------------------------------------------------------ rate theory

struct RatePrediction {
  double q = kNaN;
  double bias = kNaN;
  double alpha_max = kNaN;
  bool guaranteed = false;
  std::string note;
};

inline RatePrediction rate_predictor(const ProblemConstants& c, double alpha, std::size_t m) {
  RatePrediction out;
  out.alpha_max = 1.0 / c.L;
  if (!(alpha > 0.0) || alpha > out.alpha_max * (1.0 + 1e-12)) {
    throw std::domain_error("step-size must lie in (0, 1/L]");
  }
  if (c.lambda > c.L * c.mu || c.mu <= 0.0) {
    out.note = "no guarantee: lambda > L * mu";
    return out;
  }
  const double mu = c.mu;
  const double L = c.L;
  const double drift = mu - c.lambda / L;
  out.q = 1.0 - drift * alpha - mu * mu * alpha * (1.0 / L - alpha);
  const double fm = static_cast<double>(m);
  const double sv = std::isnan(c.sigma_v2) ? 0.0 : c.sigma_v2;
  const double denom = L * fm * (drift + mu * mu * (1.0 / L - alpha));
  out.bias = denom > 0.0 ? alpha * (fm * (c.sigma2 - sv) + L * alpha * sv) / denom
                         : std::numeric_limits<double>::infinity();
  out.guaranteed = out.q >= 0.0 && out.q <= 1.0;
  if (!out.guaranteed) out.note = "no guarantee: q outside [0, 1]";
  return out;
}

struct BatchThreshold {
  std::size_t exact = 1;       // smallest m with the quadratic strictly positive
  double root = 0.0;           // positive root of the quadratic
  std::size_t sufficient = 1;  // closed form ceil(||Sigma_A||^2 / (||A|| sqrt(2 mu)))
};

inline BatchThreshold batch_threshold(const ProblemConstants& c) {
  if (!(c.mu > 0.0)) throw std::domain_error("batch threshold needs a non-singular A");
  BatchThreshold out;
  const double s = c.norm_SigmaA * c.norm_SigmaA;
  if (s == 0.0) return out;
  const double qa = 4.0 * c.norm_A * c.norm_A / s;
  const double qb = 5.0;
  const double qc = -2.0 * s / c.mu;
  out.root = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
  auto poly = [&](double m) { return qa * m * m + qb * m + qc; };
  auto m = static_cast<std::size_t>(std::max(1.0, std::floor(out.root)));
  while (poly(static_cast<double>(m)) <= 0.0) ++m;
  while (m > 1 && poly(static_cast<double>(m - 1)) > 0.0) --m;
  out.exact = m;
  out.sufficient = static_cast<std::size_t>(
      std::max(1.0, std::ceil(s / (c.norm_A * std::sqrt(2.0 * c.mu)))));
  return out;
}

inline double one_over_t_bound(const ProblemConstants& c, double alpha, double t, double f0,
                               std::size_t m1, std::size_t m2) {
  if (std::isnan(c.L_max)) throw std::domain_error("L_max has not been computed");
  if (!(alpha > 0.0) || alpha > 2.0 / c.L_max) {
    throw std::domain_error("step-size must lie in (0, 2/L_max]");
  }
  if (!(c.mu > 0.0)) throw std::domain_error("bound needs a non-singular A");
  const double sv = std::isnan(c.sigma_v2) ? 0.0 : c.sigma_v2;
  const double lead = 2.0 * f0 / (t * alpha * (2.0 - alpha * c.L_max) * c.mu);
  const double relief = sv / (static_cast<double>(m1) * static_cast<double>(m2) * c.mu);
  return std::max(lead - relief, 0.0);
}

struct AlgorithmRates {
  RatePrediction expected_gtd;
  RatePrediction atop_td;
  RatePrediction r1_gtd;
};

namespace detail {

inline RatePrediction perturbed_rate(double alpha, double alpha_max, double q,
                                     double additive) {
  RatePrediction out;
  out.alpha_max = alpha_max;
  if (!(alpha > 0.0) || alpha > alpha_max * (1.0 + 1e-12)) {
    out.note = "step-size above the admissible bound";
    return out;
  }
  out.q = q;
  out.guaranteed = q >= 0.0 && q < 1.0;
  if (out.guaranteed) {
    out.bias = additive / (1.0 - q);
  } else {
    out.note = "no guarantee: q outside [0, 1)";
  }
  return out;
}

}  // namespace detail

// Linear rates for the aggregate learners after t samples, valid once the
// variance term falls below epsilon. Each formula follows the displayed
// theorem statement.
inline AlgorithmRates per_algorithm_rates(const ProblemConstants& c, double t, double epsilon,
                                          double alpha) {
  AlgorithmRates out;
  const double s = c.norm_SigmaA * c.norm_SigmaA;
  const double a2 = 4.0 * c.norm_A * c.norm_A;
  const double mu = c.mu;
  const double sv = std::isnan(c.sigma_v2) ? 0.0 : c.sigma_v2;
  auto condition_note = [](RatePrediction& r, bool ok) {
    if (!ok) {
      r.guaranteed = false;
      r.note = "no guarantee: variance condition on t not met";
    }
  };
  {
    const double q = 1.0 - mu * alpha - mu * mu * alpha * (1.0 / (a2 + 5.0 * epsilon) - alpha) +
                     (2.0 * alpha / a2) * epsilon * epsilon;
    const double add = alpha / a2 * (c.sigma2 - sv) + 4.0 * alpha * alpha * sv / (t * t);
    out.expected_gtd = detail::perturbed_rate(alpha, 1.0 / a2, q, add);
    condition_note(out.expected_gtd, 2.0 * s / t <= epsilon);
  }
  {
    const double big = std::max(a2, s);
    const double q = 1.0 - mu * alpha - mu * mu * alpha * (1.0 / (a2 + s + 4.0 * epsilon) - alpha) +
                     (s / big) * alpha * epsilon;
    const double add = alpha / big * (c.sigma2 - sv) + alpha * alpha * sv / t;
    out.atop_td = detail::perturbed_rate(alpha, 1.0 / big, q, add);
    condition_note(out.atop_td, s / t <= epsilon);
  }
  {
    const double k = 4.0 * (s + c.norm_A * c.norm_A);
    const double q = 1.0 - mu * alpha - mu * mu * alpha * (1.0 / (k + epsilon) - alpha) +
                     (s / k) * alpha * epsilon;
    const double add = alpha / k * (c.sigma2 - sv) + alpha * alpha * sv / t;
    out.r1_gtd = detail::perturbed_rate(alpha, 1.0 / k, q, add);
    condition_note(out.r1_gtd, s / t <= epsilon);
  }
  return out;
}

struct AlgorithmFactors {
  double effective_batch = 0.0;
  double L1_excess = 0.0;  // L1 - 4||A||^2
  double L2 = 0.0;
  double lambda = 0.0;
  double bias = 0.0;
};

// Smoothness factors of the generic two-batch update for each aggregate
// learner; n is the batch size m for Impression GTD and the sample count t
// otherwise. s = ||Sigma_A||^2.
inline AlgorithmFactors algorithm_factors(Algorithm algo, double s, double n, double alpha,
                                          double sigma_v2) {
  AlgorithmFactors f;
  switch (algo) {
    case Algorithm::ImpressionGtd:
      f = {n * n, 4.0 * s / n, s / n, 2.0 * s * s / (n * n), alpha * alpha * sigma_v2 / n};
      break;
    case Algorithm::ExpectedGtd:
      f = {n * n / 4.0, 8.0 * s / n, 2.0 * s / n, 8.0 * s * s / (n * n),
           4.0 * alpha * alpha * sigma_v2 / (n * n)};
      break;
    case Algorithm::AtopTd:
      f = {n, 4.0 * s / n, s, 2.0 * s * s / n, alpha * alpha * sigma_v2 / n};
      break;
    case Algorithm::R1Gtd:
      f = {n, 4.0 * s, s / n, 2.0 * s * s / n, alpha * alpha * sigma_v2 / n};
      break;
    default:
      throw std::invalid_argument("no smoothness factors for this algorithm");
  }
  return f;
}

// ----------------------------------------------------------- MC oracles

struct LLambdaPoint {
  double lhs = 0.0;
  double lhs_stderr = 0.0;
  double rhs = 0.0;
  bool passed = false;
};

struct LLambdaReport {
  std::vector<LLambdaPoint> points;
  bool all_passed() const {
    return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.passed; });
  }
};

inline Vector random_theta_near(const Vector& center, double scale, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector v(center.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = center(i) + scale * n01(rng);
  return v;
}

// Checks E||A1^T (A2 theta + b2)||^2 <= 2L (f(theta) - f*) + lambda ||theta - theta*||^2
// + sigma^2 with fresh i.i.d. batches for every Monte-Carlo sample.
inline LLambdaReport verify_l_lambda(const Benchmark& bm, const ProblemConstants& c,
                                     std::size_t n_theta, std::size_t n_mc, Rng& rng,
                                     double theta_scale = 0.0) {
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  const double scale = theta_scale > 0.0 ? theta_scale : std::max(1.0, c.theta_star.norm());
  LLambdaReport report;
  std::vector<Transition> b1(c.m1);
  std::vector<Transition> b2(c.m2);
  for (std::size_t k = 0; k < n_theta; ++k) {
    const Vector theta = random_theta_near(c.theta_star, scale, rng);
    detail::RunningStats stats;
    for (std::size_t s = 0; s < n_mc; ++s) {
      for (auto& t : b1) t = dist.sample(rng);
      for (auto& t : b2) t = dist.sample(rng);
      stats.add(impression_direction(b1, b2, theta).squaredNorm());
    }
    const McEstimate e = stats.estimate();
    LLambdaPoint p;
    p.lhs = e.mean;
    p.lhs_stderr = e.std_error;
    p.rhs = 2.0 * c.L * (neu(theta, c.mats) - neu(c.theta_star, c.mats)) +
            c.lambda * (theta - c.theta_star).squaredNorm() + c.sigma2;
    p.passed = p.lhs <= p.rhs + 3.0 * p.lhs_stderr;
    report.points.push_back(p);
  }
  return report;
}

// ------------------------------------------------------- curve analysis

inline std::vector<double> bias_subtracted_series(const std::vector<double>& series,
                                                  std::size_t tail_window = 100,
                                                  double discount = 0.8) {
  if (series.empty()) return {};
  const std::size_t n = std::min(tail_window, series.size());
  const double tail =
      std::accumulate(series.end() - static_cast<std::ptrdiff_t>(n), series.end(), 0.0) /
      static_cast<double>(n);
  std::vector<double> out;
  out.reserve(series.size());
  const double floor = std::numeric_limits<double>::epsilon();
  for (double v : series) out.push_back(std::max(v - discount * tail, floor));
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least-squares line through (x, log y) over indices [begin, end).
inline LinearFit linear_rate_fit(const std::vector<double>& x, const std::vector<double>& y,
                                 std::size_t begin, std::size_t end) {
  if (x.size() != y.size() || end > y.size() || end < begin + 2) {
    throw std::invalid_argument("linear_rate_fit needs at least two points in range");
  }
  const auto n = static_cast<double>(end - begin);
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    if (!(y[i] > 0.0)) throw std::domain_error("linear_rate_fit needs positive values");
    sx += x[i];
    sy += std::log(y[i]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double dx = x[i] - mx;
    const double dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

inline LinearFit linear_rate_fit(const std::vector<double>& y) {
  std::vector<double> x(y.size());
  std::iota(x.begin(), x.end(), 0.0);
  return linear_rate_fit(x, y, 0, y.size());
}

// Fit over the middle half of the series.
inline LinearFit linear_rate_fit_middle(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const std::size_t n = y.size();
  return linear_rate_fit(x, y, n / 4, n - n / 4);
}

}  // namespace gtdlab
