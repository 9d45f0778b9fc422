#include "gtdlab/analysis.hpp"
#include "gtdlab/envs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gtdlab;

namespace {

ExpectedMatrices mats_of(const Benchmark& bm) {
  return expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
}

ExpectedMatrices scalar_mats(double a, double b, double c) {
  ExpectedMatrices m;
  m.A = Matrix::Constant(1, 1, a);
  m.b = Vector::Constant(1, b);
  m.C = Matrix::Constant(1, 1, c);
  m.D = m.A + m.C;
  return m;
}

ProblemConstants manual_constants(double mu, double L, double lambda, double sigma2,
                                  double sigma_v2) {
  ProblemConstants c;
  c.mu = mu;
  c.L = L;
  c.lambda = lambda;
  c.sigma2 = sigma2;
  c.sigma_v2 = sigma_v2;
  return c;
}

// Single non-terminal state stepping into the terminal with reward 1.
Benchmark one_step_task() {
  Benchmark bm;
  bm.name = "one-step";
  bm.mdp = detail::blank_mdp(2, 1, 0.9);
  bm.mdp.transition[0](0, 1) = 1.0;
  bm.mdp.reward[0](0, 1) = 1.0;
  detail::make_absorbing(bm.mdp, 1);
  bm.mdp.start_dist(0) = 1.0;
  Matrix phi = Matrix::Zero(2, 1);
  phi(0, 0) = 1.0;
  bm.features = {phi, FeatureVariant::Tabular};
  bm.target.action_probs = Matrix::Ones(2, 1);
  bm.behavior = bm.target;
  bm.initial_theta = Vector::Zero(1);
  return bm;
}

}  // namespace

TEST(Rmsve, ExactRepresentationIsZero) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  const Vector v = true_values(bm.mdp, bm.target).segment(1, 5);
  EXPECT_LT(rmsve(v, bm), 1e-14);
  EXPECT_NEAR(rmsve((v.array() + 0.3).matrix(), bm), 0.3, 1e-14);
}

TEST(Rmsve, BoyanAtZero) {
  double acc = 0.0;
  for (int i = 0; i < 13; ++i) acc += (2.0 * i + 3.0) * (2.0 * i + 3.0);
  EXPECT_NEAR(rmsve(Vector::Zero(4), boyan_chain()), std::sqrt(acc / 13.0), 1e-12);
}

TEST(Rmspbe, ScalarCase) {
  EXPECT_NEAR(rmspbe(Vector::Zero(1), scalar_mats(-1.0, 1.0, 2.0)), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(rmspbe(Vector::Ones(1), scalar_mats(-1.0, 1.0, 2.0)), 0.0, 1e-15);
}

TEST(Rmspbe, SingularPreconditionerThrows) {
  const Benchmark bm = baird();
  EXPECT_THROW(rmspbe(bm.initial_theta, mats_of(bm)), std::domain_error);
  EXPECT_FALSE(Evaluator(bm).has_rmspbe());
}

TEST(Rmspbe, MatchesMonteCarlo) {
  const Benchmark bm = random_walk(WalkRepresentation::Dependent);
  const auto mats = mats_of(bm);
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  const Vector theta = (Vector(3) << 0.4, -0.2, 0.1).finished();
  Rng rng(3);
  const int n = 1000000;
  Vector r = Vector::Zero(3);
  for (int k = 0; k < n; ++k) {
    const Transition t = dist.sample(rng);
    r += (t.rho * t.td_error(theta)) * t.phi;
  }
  r /= n;
  const double mc = std::sqrt(r.dot(mats.C.ldlt().solve(r)));
  EXPECT_NEAR(mc, rmspbe(theta, mats), 0.02 * rmspbe(theta, mats));
}

TEST(Neu, ZeroAtTdSolution) {
  const auto mats = mats_of(boyan_chain());
  const Vector theta = td_solution(mats);
  EXPECT_LT(neu(theta, mats), 1e-18);
  EXPECT_LT(neu_grad(theta, mats).norm(), 1e-9);
}

TEST(Neu, GradientMatchesFiniteDifferences) {
  Rng rng(13);
  for (const auto view : benchmark_names()) {
    const Benchmark bm = make_benchmark(view);
    const auto mats = mats_of(bm);
    for (int k = 0; k < 20; ++k) {
      const Vector theta = random_theta_near(Vector::Zero(mats.b.size()), 3.0, rng);
      const Vector g = neu_grad(theta, mats);
      Vector fd(theta.size());
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = 1e-4 * std::max(1.0, std::abs(theta(i)));
        Vector up = theta, down = theta;
        up(i) += h;
        down(i) -= h;
        fd(i) = (neu(up, mats) - neu(down, mats)) / (2.0 * h);
      }
      EXPECT_LT((fd - g).norm(), 1e-6 * std::max(1.0, g.norm())) << bm.name;
    }
  }
}

TEST(EmpiricalNeu, TwoTransitionHandCase) {
  Transition a, b;
  a.phi = (Vector(2) << 1, 0).finished();
  a.phi_next = (Vector(2) << 0, 1).finished();
  a.reward = 1.0;
  a.discount = 0.5;
  b.phi = (Vector(2) << 1, 1).finished();
  b.phi_next = Vector::Zero(2);
  b.reward = 2.0;
  b.discount = 0.5;
  b.rho = 2.0;
  const Vector theta = (Vector(2) << 1, 1).finished();
  // delta_a = 1 + 0.5 - 1 = 0.5, delta_b = 2 - 2 = 0 -> 0; move b's reward
  EXPECT_EQ(empirical_neu(theta, std::vector<Transition>{a}, std::vector<Transition>{b}), 0.0);
  b.reward = 3.0;  // delta_b = 1, sim = 1, rho_b = 2
  EXPECT_NEAR(empirical_neu(theta, std::vector<Transition>{a}, std::vector<Transition>{b}), 1.0,
              1e-15);
}

TEST(EmpiricalNeu, EqualsAggregateInnerProduct) {
  const Benchmark bm = random_walk(WalkRepresentation::Inverted);
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 4);
  TwinBuffers buf;
  for (int k = 0; k < 2000; ++k) buf.insert(sim.step());
  Rng rng(5);
  for (int k = 0; k < 5; ++k) {
    const Vector theta = random_theta_near(Vector::Zero(5), 1.0, rng);
    const Vector r1 = buf.first().mean_A() * theta + buf.first().mean_b();
    const Vector r2 = buf.second().mean_A() * theta + buf.second().mean_b();
    const double direct = empirical_neu(theta, buf);
    EXPECT_NEAR(direct, r1.dot(r2), 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST(EmpiricalNeu, ApproachesNeuAsBuffersGrow) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  const auto mats = mats_of(bm);
  const Vector theta = (Vector(5) << 0.5, -0.5, 0.2, 0.8, -0.1).finished();
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 6);
  TwinBuffers buf;
  double small_gap = 0.0;
  for (int k = 0; k < 20000; ++k) {
    buf.insert(sim.step());
    if (k == 499) small_gap = std::abs(empirical_neu(theta, buf) - neu(theta, mats));
  }
  const double gap = std::abs(empirical_neu(theta, buf) - neu(theta, mats));
  EXPECT_LT(gap, 0.02 * neu(theta, mats));
  EXPECT_LT(gap, small_gap);
}

TEST(MspbeEquivalence, PairObjectiveMatchesMatrixForms) {
  Rng rng(7);
  for (const char* name : {"boyan", "rw-tab", "rw-inv", "rw-dep"}) {
    const Benchmark bm = make_benchmark(name);
    for (int k = 0; k < 20; ++k) {
      const Vector theta = random_theta_near(Vector::Zero(bm.initial_theta.size()), 3.0, rng);
      const auto r = mspbe_equivalence_check(theta, bm);
      EXPECT_LT(r.abs_diff, 1e-10) << name;
      EXPECT_LT(r.identity_abs_diff, 1e-10) << name;
    }
    const Vector theta_star = td_solution(mats_of(bm));
    const auto at_star = mspbe_equivalence_check(theta_star, bm);
    EXPECT_LT(at_star.mspbe, 1e-15);
    EXPECT_LT(std::abs(at_star.pair_objective), 1e-15);
  }
}

TEST(SmoothnessConstants, ZeroVarianceLimit) {
  const auto mats = mats_of(boyan_chain());
  SigmaMatrices zero{Matrix::Zero(4, 4), Vector::Zero(4)};
  const auto c = smoothness_constants(mats, zero, 3, 5);
  EXPECT_NEAR(c.L, 4.0 * c.norm_A * c.norm_A, 1e-12);
  EXPECT_EQ(c.lambda, 0.0);
  EXPECT_EQ(c.sigma2, 0.0);
}

TEST(SmoothnessConstants, SingleBatchSizeFactors) {
  const Benchmark bm = random_walk(WalkRepresentation::Dependent);
  for (std::size_t m : {1u, 4u, 32u}) {
    const auto c = problem_constants(bm, m, m);
    const double s = c.norm_SigmaA * c.norm_SigmaA;
    EXPECT_NEAR(c.L2, s / m, 1e-14);
    EXPECT_NEAR(c.lambda, 2.0 * s * s / (m * m), 1e-14);
    EXPECT_NEAR(c.L, c.L1 + c.L2, 1e-14);
    EXPECT_NEAR(c.L1, 4.0 * (s / m + c.norm_A * c.norm_A), 1e-13);
    const auto f = algorithm_factors(Algorithm::ImpressionGtd, s, m, 0.1, 0.0);
    EXPECT_NEAR(f.L2, c.L2, 1e-14);
    EXPECT_NEAR(f.lambda, c.lambda, 1e-14);
  }
}

TEST(SmoothnessConstants, BairdHasNoBias) {
  const auto c = problem_constants(baird(), 10, 10);
  EXPECT_TRUE(c.a_singular);
  EXPECT_EQ(c.mu, 0.0);
  EXPECT_EQ(c.norm_Sigmab, 0.0);
  EXPECT_LT(c.sigma2, 1e-20);
}

TEST(SigmaV2, DeterministicTaskIsZero) {
  Rng rng(1);
  EXPECT_EQ(sigma_v2_estimate(one_step_task(), 1000, rng).mean, 0.0);
}

TEST(SigmaV2, BairdIsZero) {
  Rng rng(2);
  EXPECT_LT(sigma_v2_estimate(baird(), 20000, rng).mean, 1e-20);
}

TEST(SigmaV2, RandomWalkIsStableAcrossSeeds) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  Rng a(10), b(20);
  const double ea = sigma_v2_estimate(bm, 1000000, a).mean;
  const double eb = sigma_v2_estimate(bm, 1000000, b).mean;
  EXPECT_GT(ea, 0.0);
  EXPECT_NEAR(ea, eb, 0.02 * ea);
}

TEST(PairLipschitz, OrthogonalFeaturesGiveZero) {
  Transition a, b;
  a.phi = Vector::Unit(3, 0);
  a.phi_next = Vector::Unit(3, 1);
  b.phi = Vector::Unit(3, 2);
  b.phi_next = Vector::Unit(3, 0);
  EXPECT_EQ(pair_lipschitz(a, b), 0.0);
}

TEST(PairLipschitz, MatchesSpectralNormOfPairJacobian) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto random_vec = [&](int d) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = n01(rng);
    return v;
  };
  for (int k = 0; k < 100; ++k) {
    Transition a, b;
    a.phi = random_vec(4);
    a.phi_next = random_vec(4);
    a.discount = 0.9;
    a.rho = 1.5;
    b.phi = random_vec(4);
    b.phi_next = random_vec(4);
    b.discount = 0.9;
    b.rho = 0.5;
    const Matrix jac =
        a.rho * b.rho * a.td_gradient() * a.phi.dot(b.phi) * b.td_gradient().transpose();
    EXPECT_NEAR(pair_lipschitz(a, b), spectral_norm(jac), 1e-10);
  }
}

TEST(PairLipschitz, BufferMaximumOverDistinctPairs) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 3);
  TwinBuffers buf;
  for (int k = 0; k < 2000; ++k) buf.insert(sim.step());
  // every transition type shows up in both buffers after 2000 steps
  EXPECT_NEAR(l_max(buf), l_max_support(bm), 1e-12);
}

TEST(RatePredictor, OneStepExact) {
  const auto p = rate_predictor(manual_constants(1.0, 1.0, 0.0, 0.0, 0.0), 1.0, 1);
  EXPECT_NEAR(p.q, 0.0, 1e-15);
  EXPECT_NEAR(p.bias, 0.0, 1e-15);
  EXPECT_TRUE(p.guaranteed);
}

TEST(RatePredictor, BoundaryLambda) {
  const double mu = 0.3, L = 2.0, alpha = 0.2;
  const auto p = rate_predictor(manual_constants(mu, L, L * mu, 1.0, 0.5), alpha, 4);
  EXPECT_NEAR(p.q, 1.0 - mu * mu * alpha * (1.0 / L - alpha), 1e-15);
  EXPECT_GT(p.q, 0.0);
  EXPECT_LT(p.q, 1.0);
}

TEST(RatePredictor, Errors) {
  EXPECT_THROW(rate_predictor(manual_constants(0.5, 2.0, 0.1, 0, 0), 0.6, 1), std::domain_error);
  const auto p = rate_predictor(manual_constants(0.1, 2.0, 1.0, 0, 0), 0.1, 1);
  EXPECT_FALSE(p.guaranteed);
  EXPECT_NE(p.note.find("no guarantee"), std::string::npos);
}

TEST(RatePredictor, Monotonicity) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double L = 1.0 + 10.0 * u01(rng);
    const double mu = 0.9 * L * u01(rng) + 1e-3;
    const double lam = 0.5 * L * mu * u01(rng);
    const double alpha = u01(rng) / L;
    const auto base = rate_predictor(manual_constants(mu, L, lam, 1.0, 0.1), alpha, 2);
    const auto more_mu = rate_predictor(manual_constants(mu * 1.1, L, lam, 1.0, 0.1), alpha, 2);
    const auto more_lam = rate_predictor(manual_constants(mu, L, lam * 1.5, 1.0, 0.1), alpha, 2);
    EXPECT_LE(more_mu.q, base.q);
    EXPECT_GE(more_lam.q, base.q);
  }
}

TEST(RatePredictor, BoyanLargeBatch) {
  const auto c = problem_constants(boyan_chain(), 32, 32);
  const auto p = rate_predictor(c, 1.0 / c.L, 32);
  EXPECT_TRUE(p.guaranteed);
  EXPECT_GT(p.q, 0.0);
  EXPECT_LT(p.q, 1.0);
}

TEST(BatchThreshold, ZeroVarianceNeedsOne) {
  ProblemConstants c = manual_constants(0.5, 1, 0, 0, 0);
  c.norm_A = 1.0;
  c.norm_SigmaA = 0.0;
  EXPECT_EQ(batch_threshold(c).exact, 1u);
}

TEST(BatchThreshold, ClosedFormBoundsTheRoot) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int k = 0; k < 100; ++k) {
    ProblemConstants c;
    c.norm_A = u(rng);
    c.norm_SigmaA = u(rng);
    c.mu = std::min(c.norm_A * c.norm_A, u(rng));
    const auto t = batch_threshold(c);
    EXPECT_GE(static_cast<double>(t.sufficient), t.root);
    EXPECT_GE(t.sufficient, t.exact > 1 ? t.exact - 1 : 1);
  }
}

TEST(BatchThreshold, BenchmarkValues) {
  // frozen from the exact constants of each benchmark
  EXPECT_EQ(batch_threshold(problem_constants(boyan_chain(), 1, 1)).exact, 18u);
  EXPECT_EQ(batch_threshold(problem_constants(make_benchmark("rw-tab"), 1, 1)).exact, 51u);
  EXPECT_EQ(batch_threshold(problem_constants(make_benchmark("rw-inv"), 1, 1)).exact, 136u);
  EXPECT_EQ(batch_threshold(problem_constants(make_benchmark("rw-dep"), 1, 1)).exact, 17u);
  EXPECT_THROW(batch_threshold(problem_constants(baird(), 1, 1)), std::domain_error);
}

TEST(BatchThreshold, ThresholdGivesLinearRate) {
  for (const char* name : {"boyan", "rw-tab", "rw-inv", "rw-dep"}) {
    const Benchmark bm = make_benchmark(name);
    const std::size_t m = batch_threshold(problem_constants(bm, 1, 1)).exact;
    const auto c = problem_constants(bm, m, m);
    EXPECT_LE(c.lambda, c.L * c.mu) << name;
    EXPECT_TRUE(rate_predictor(c, 1.0 / c.L, m).guaranteed) << name;
  }
}

TEST(OneOverT, Limits) {
  ProblemConstants c = manual_constants(0.5, 1, 0, 0, 0.2);
  c.L_max = 2.0;
  EXPECT_EQ(one_over_t_bound(c, 0.5, 10.0, 0.0, 1, 1), 0.0);
  EXPECT_EQ(one_over_t_bound(c, 0.5, 1e12, 3.0, 1, 1), 0.0);
  c.sigma_v2 = 0.0;
  // 2 f0 / (t alpha (2 - alpha L_max) mu) = 2 * 3 / (10 * 0.5 * 1 * 0.5)
  EXPECT_NEAR(one_over_t_bound(c, 0.5, 10.0, 3.0, 1, 1), 2.4, 1e-14);
  EXPECT_THROW(one_over_t_bound(c, 1.5, 10.0, 3.0, 1, 1), std::domain_error);
}

TEST(PerAlgorithmRates, NoPerturbationReducesToPlainForm) {
  const auto c = problem_constants(boyan_chain(), 1, 1);
  const double a2 = 4.0 * c.norm_A * c.norm_A;
  const double s = c.norm_SigmaA * c.norm_SigmaA;
  const double alpha = 0.5 / std::max(a2 + s, 4.0 * (s + c.norm_A * c.norm_A));
  const auto r = per_algorithm_rates(c, 1e9, 0.0, alpha);
  const double mu = c.mu;
  auto plain = [&](double k) { return 1.0 - mu * alpha - mu * mu * alpha * (1.0 / k - alpha); };
  EXPECT_NEAR(r.expected_gtd.q, plain(a2), 1e-15);
  EXPECT_NEAR(r.atop_td.q, plain(a2 + s), 1e-15);
  EXPECT_NEAR(r.r1_gtd.q, plain(4.0 * (s + c.norm_A * c.norm_A)), 1e-15);
}

TEST(PerAlgorithmRates, TableOrdering) {
  const double s = 2.5;
  for (double t : {5.0, 10.0, 1000.0}) {
    const auto ex = algorithm_factors(Algorithm::ExpectedGtd, s, t, 0.1, 1.0);
    const auto at = algorithm_factors(Algorithm::AtopTd, s, t, 0.1, 1.0);
    EXPECT_NEAR(ex.lambda, 8.0 * s * s / (t * t), 1e-12);
    EXPECT_NEAR(at.lambda, 2.0 * s * s / t, 1e-12);
    EXPECT_LT(ex.lambda, at.lambda);
  }
  EXPECT_THROW(algorithm_factors(Algorithm::Td, s, 1, 0.1, 1.0), std::invalid_argument);
}

TEST(LLambda, BairdAtSolutionIsZero) {
  const Benchmark bm = baird();
  const auto c = problem_constants(bm, 2, 2);
  Rng rng(1);
  // a zero scale puts every sampled theta on the solution
  const auto rep = verify_l_lambda(bm, c, 3, 200, rng, 1e-300);
  for (const auto& p : rep.points) {
    EXPECT_LT(p.lhs, 1e-20);
    EXPECT_LT(p.rhs, 1e-20);
  }
}

TEST(LLambda, RandomWalkHolds) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  const auto c = problem_constants(bm, 2, 3);
  Rng rng(2);
  const auto rep = verify_l_lambda(bm, c, 20, 2000, rng);
  EXPECT_TRUE(rep.all_passed());
}

TEST(BiasSubtraction, ConstantSeries) {
  const auto out = bias_subtracted_series(std::vector<double>(300, 5.0), 100, 0.8);
  for (double v : out) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(BiasSubtraction, ClampsAtMachineEpsilon) {
  std::vector<double> y(200, 1.0);
  y[0] = 0.1;
  const auto out = bias_subtracted_series(y, 100, 0.8);
  EXPECT_EQ(out[0], std::numeric_limits<double>::epsilon());
  EXPECT_TRUE(bias_subtracted_series({}).empty());
}

TEST(BiasSubtraction, GeometricSeriesBecomesLogLinear) {
  std::vector<double> y, x;
  for (int t = 0; t < 400; ++t) {
    x.push_back(t);
    y.push_back(std::pow(0.95, t) + 1e-9);
  }
  const auto out = bias_subtracted_series(y, 100);
  EXPECT_GT(linear_rate_fit(x, out, 0, 200).r_squared, 0.999);
}

TEST(LinearRateFit, ExactGeometric) {
  std::vector<double> y;
  for (int t = 0; t < 50; ++t) y.push_back(3.0 * std::pow(0.9, t));
  const auto f = linear_rate_fit(y);
  EXPECT_NEAR(f.slope, std::log(0.9), 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(LinearRateFit, WhiteNoiseHasNoTrend) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  std::vector<double> y;
  for (int t = 0; t < 2000; ++t) y.push_back(u(rng));
  EXPECT_LT(linear_rate_fit(y).r_squared, 0.01);
}

TEST(LinearRateFit, RejectsBadInput) {
  EXPECT_THROW(linear_rate_fit(std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(linear_rate_fit(std::vector<double>{1.0, -1.0}), std::domain_error);
}
