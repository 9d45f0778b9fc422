#include "gtdlab/analysis.hpp"
#include "gtdlab/envs.hpp"
#include "gtdlab/learners.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gtdlab;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Transition tr(Vector phi, Vector phi_next, double reward, double gamma, double rho = 1.0,
              std::size_t episode = 1) {
  Transition t;
  t.phi = std::move(phi);
  t.phi_next = std::move(phi_next);
  t.reward = reward;
  t.discount = gamma;
  t.rho = rho;
  t.episode_idx = episode;
  return t;
}

LearnerState state_with(const Vector& theta, const Vector& helper) {
  LearnerState s = LearnerState::initial(theta);
  s.helper = helper;
  return s;
}

Hyperparams two_rates(double alpha, double beta) {
  Hyperparams hp;
  hp.alpha = alpha;
  hp.beta = beta;
  return hp;
}

// one-dimensional transition used by the hand checks of the two-time-scale methods
Transition self_loop() { return tr(vec({1}), vec({1}), 0.0, 0.9); }

std::vector<Transition> draw(TransitionDistribution& dist, std::size_t n, Rng& rng) {
  std::vector<Transition> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(dist.sample(rng));
  return out;
}

}  // namespace

TEST(Td, HandStep) {
  const Transition t = tr(vec({1}), vec({0}), 1.0, 0.9);
  Hyperparams hp;
  hp.alpha = 0.5;
  const auto s = td_step(LearnerState::initial(vec({0})), t, hp);
  EXPECT_DOUBLE_EQ(s.theta(0), 0.5);
  EXPECT_EQ(s.step_count, 1u);
}

TEST(Td, ZeroErrorLeavesThetaUnchanged) {
  const Transition t = tr(vec({1, 0}), vec({0, 1}), 0.1, 0.9);
  const Vector theta = vec({1.0, 1.0});  // delta = 0.1 + 0.9 - 1 = 0
  const auto s = td_step(LearnerState::initial(theta), t, Hyperparams{});
  EXPECT_EQ(s.theta, theta);
}

TEST(Td, DivergesOnBaird) {
  const Benchmark bm = baird();
  Hyperparams hp;
  hp.alpha = 0.0625;
  Learner td(Algorithm::Td, hp, bm.initial_theta, 3);
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 4, bm.episode_options());
  for (int k = 0; k < 10000 && !td.diverged(); ++k) td.observe(sim.step());
  EXPECT_TRUE(td.diverged());
}

TEST(MinibatchTd, IdenticalBatchEqualsTd) {
  const Transition t = tr(vec({1, 0.5}), vec({0, 1}), 2.0, 0.9);
  Hyperparams hp;
  hp.alpha = 0.1;
  const auto start = LearnerState::initial(vec({0.3, -0.2}));
  const std::vector<Transition> batch{t, t, t};
  const auto a = minibatch_td_update(start, batch, hp);
  const auto b = td_step(start, t, hp);
  EXPECT_LT((a.theta - b.theta).norm(), 1e-15);
}

TEST(MinibatchTd, TwoTransitionAverage) {
  const Transition t1 = tr(vec({1, 0}), vec({0, 1}), 1.0, 0.5);
  const Transition t2 = tr(vec({0, 1}), vec({0, 0}), -2.0, 0.5);
  Hyperparams hp;
  hp.alpha = 0.2;
  const auto s = minibatch_td_update(LearnerState::initial(vec({0, 0})),
                                     std::vector<Transition>{t1, t2}, hp);
  // TD updates: 1 * e0 and -2 * e1, averaged and scaled by 0.2
  EXPECT_NEAR(s.theta(0), 0.1, 1e-15);
  EXPECT_NEAR(s.theta(1), -0.2, 1e-15);
}

TEST(MinibatchTd, ZeroMeanAtTdSolution) {
  const Benchmark bm = boyan_chain();
  const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
  const Vector theta_star = td_solution(mats);
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  Rng rng(31);
  const int n = 100000;
  Vector sum = Vector::Zero(4), sq = Vector::Zero(4);
  for (int k = 0; k < n; ++k) {
    const Vector u = mean_td_update(draw(dist, 4, rng), theta_star);
    sum += u;
    sq += u.cwiseAbs2();
  }
  const Vector mean = sum / n;
  const Vector se = ((sq / n - mean.cwiseAbs2()) / n).cwiseSqrt();
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_LT(std::abs(mean(i)), 3.0 * se(i)) << i;
}

TEST(MinibatchTd, WaitsForWarmup) {
  Hyperparams hp;
  hp.m1 = hp.m2 = 3;
  Learner l(Algorithm::MinibatchTd, hp, vec({0, 0}), 1);
  for (int k = 0; k < 3; ++k) l.observe(tr(vec({1, 0}), vec({0, 1}), 1.0, 0.9));
  EXPECT_EQ(l.state().step_count, 0u);
  l.observe(tr(vec({1, 0}), vec({0, 1}), 1.0, 0.9));
  EXPECT_EQ(l.state().step_count, 1u);
}

TEST(Gtd, HandStep) {
  const auto s = gtd_step(state_with(vec({1}), vec({2})), self_loop(), two_rates(0.1, 0.5));
  EXPECT_NEAR(s.theta(0), 1.02, 1e-15);
  EXPECT_NEAR(s.helper(0), 0.95, 1e-15);
}

TEST(Gtd, ZeroHelperKeepsTheta) {
  const Transition t = tr(vec({1, 2}), vec({0, 1}), 3.0, 0.9);
  const auto s = gtd_step(LearnerState::initial(vec({0.5, 0.5})), t, two_rates(0.1, 0.5));
  EXPECT_EQ(s.theta, vec({0.5, 0.5}));
  const double delta = t.td_error(vec({0.5, 0.5}));
  EXPECT_LT((s.helper - 0.5 * delta * t.phi).norm(), 1e-15);
}

TEST(Gtd, ExpectedThetaUpdateIsATransposeU) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  const Vector theta = vec({0.1, -0.3, 0.2, 0.5, -0.1});
  const Vector u = vec({0.4, -0.2, 0.3, 0.1, 0.6});
  const Hyperparams hp = two_rates(1.0, 0.5);
  Rng rng(41);
  const int n = 100000;
  Vector sum = Vector::Zero(5), sq = Vector::Zero(5);
  for (int k = 0; k < n; ++k) {
    const auto s = gtd_step(state_with(theta, u), dist.sample(rng), hp);
    const Vector d = s.theta - theta;
    sum += d;
    sq += d.cwiseAbs2();
  }
  const Vector mean = sum / n;
  const Vector se = ((sq / n - mean.cwiseAbs2()) / n).cwiseSqrt();
  const Vector expected = -mats.A.transpose() * u;
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_LT(std::abs(mean(i) - expected(i)), 3.0 * se(i));
}

TEST(Gtd2, HandStep) {
  // delta = -0.1, phi^T w = 2
  const auto s = gtd2_step(state_with(vec({1}), vec({2})), self_loop(), two_rates(0.1, 0.5));
  EXPECT_NEAR(s.theta(0), 1.02, 1e-15);
  EXPECT_NEAR(s.helper(0), 0.95, 1e-15);
}

TEST(Gtd2, ZeroHelperKeepsTheta) {
  const Transition t = tr(vec({1, 2}), vec({0, 1}), 3.0, 0.9);
  const auto s = gtd2_step(LearnerState::initial(vec({0.5, 0.5})), t, two_rates(0.1, 0.5));
  EXPECT_EQ(s.theta, vec({0.5, 0.5}));
}

TEST(Gtd2, ExpectedHelperDrift) {
  const Benchmark bm = random_walk(WalkRepresentation::Dependent);
  const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  const Vector theta = vec({0.2, -0.4, 0.3});
  const Vector w = vec({0.1, 0.2, -0.3});
  const Hyperparams hp = two_rates(0.1, 1.0);
  Rng rng(43);
  const int n = 100000;
  Vector sum = Vector::Zero(3), sq = Vector::Zero(3);
  for (int k = 0; k < n; ++k) {
    const auto s = gtd2_step(state_with(theta, w), dist.sample(rng), hp);
    const Vector d = s.helper - w;
    sum += d;
    sq += d.cwiseAbs2();
  }
  const Vector mean = sum / n;
  const Vector se = ((sq / n - mean.cwiseAbs2()) / n).cwiseSqrt();
  const Vector expected = -(mats.C * w - (mats.A * theta + mats.b));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LT(std::abs(mean(i) - expected(i)), 3.0 * se(i));
}

TEST(Tdc, HandStep) {
  // theta += 0.1 * (delta phi - gamma (phi^T w) phi') = 1 + 0.1 * (-0.1 - 1.8)
  const auto s = tdc_step(state_with(vec({1}), vec({2})), self_loop(), two_rates(0.1, 0.5));
  EXPECT_NEAR(s.theta(0), 0.81, 1e-15);
  EXPECT_NEAR(s.helper(0), 0.95, 1e-15);
}

TEST(Tdc, ZeroHelperIsTd) {
  const Transition t = tr(vec({1, 2}), vec({0, 1}), 3.0, 0.9, 1.3);
  const auto start = LearnerState::initial(vec({0.5, -0.5}));
  const Hyperparams hp = two_rates(0.1, 0.5);
  EXPECT_LT((tdc_step(start, t, hp).theta - td_step(start, t, hp).theta).norm(), 1e-15);
}

TEST(Tdrc, HandStep) {
  Hyperparams hp = two_rates(0.1, 0.5);
  hp.reg = 1.0;
  const auto s = tdrc_step(state_with(vec({1}), vec({2})), self_loop(), hp);
  EXPECT_NEAR(s.theta(0), 0.81, 1e-15);
  // 2 + 0.5 * (-0.1 - 2) - 0.5 * 1 * 2
  EXPECT_NEAR(s.helper(0), -0.05, 1e-15);
}

TEST(Tdrc, HeavyRegularizationRecoversTd) {
  const Benchmark bm = boyan_chain();
  Hyperparams hp;
  hp.alpha = 0.05;
  hp.beta = 1e-6;
  hp.reg = 1e6;
  Hyperparams td_hp;
  td_hp.alpha = 0.05;
  Learner tdrc(Algorithm::Tdrc, hp, bm.initial_theta, 1);
  Learner td(Algorithm::Td, td_hp, bm.initial_theta, 1);
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 6);
  for (int k = 0; k < 2000; ++k) {
    const Transition t = sim.step();
    tdrc.observe(t);
    td.observe(t);
  }
  EXPECT_LT(tdrc.state().helper.norm(), 1e-3);
  EXPECT_LT((tdrc.state().theta - td.state().theta).norm(), 1e-2);
}

TEST(Htd, HandStep) {
  const Transition t = tr(vec({1}), vec({0}), 1.0, 0.9, 2.0);
  // delta = 1, (phi - gamma phi')^T h = 1
  const auto s = htd_step(state_with(vec({0}), vec({1})), t, two_rates(0.5, 0.5));
  EXPECT_NEAR(s.theta(0), 1.5, 1e-15);
  EXPECT_NEAR(s.helper(0), 1.5, 1e-15);
}

TEST(Htd, OnPolicyEqualsTd) {
  const Benchmark bm = boyan_chain();
  Hyperparams hp;
  hp.alpha = 0.1;
  Learner htd(Algorithm::Htd, hp, bm.initial_theta, 1);
  Learner td(Algorithm::Td, hp, bm.initial_theta, 1);
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 7);
  for (int k = 0; k < 3000; ++k) {
    const Transition t = sim.step();
    htd.observe(t);
    td.observe(t);
    ASSERT_EQ(htd.state().theta, td.state().theta) << k;
  }
}

TEST(Vtrace, SmallRatiosMatchTd) {
  const Transition t = tr(vec({1, 0}), vec({0, 1}), 1.0, 0.9, 0.8);
  const auto start = LearnerState::initial(vec({0.2, 0.1}));
  Hyperparams hp;
  hp.alpha = 0.3;
  EXPECT_EQ(vtrace_step(start, t, hp).theta, td_step(start, t, hp).theta);
}

TEST(Vtrace, LargeRatioIsClipped) {
  const Transition t = tr(vec({1, 0}), vec({0, 1}), 1.0, 0.9, 7.0);
  Transition unit = t;
  unit.rho = 1.0;
  const auto start = LearnerState::initial(vec({0.2, 0.1}));
  Hyperparams hp;
  hp.alpha = 0.3;
  EXPECT_EQ(vtrace_step(start, t, hp).theta, td_step(start, unit, hp).theta);
}

TEST(Vtrace, ConvergesToBiasedFixedPoint) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  Matrix a = Matrix::Zero(5, 5);
  Vector b = Vector::Zero(5);
  for (const auto& sp : dist.points()) {
    const Transition t = dist.make(sp);
    const double w = sp.prob * std::min(t.rho, 1.0);
    a += w * t.phi * t.td_gradient().transpose();
    b += w * t.reward * t.phi;
  }
  const Vector fixed = a.fullPivLu().solve(-b);
  EXPECT_GT(rmsve(fixed, bm), 0.05);

  Hyperparams hp;
  hp.alpha = 0.01;
  Learner vt(Algorithm::Vtrace, hp, bm.initial_theta, 1);
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 8);
  Vector avg = Vector::Zero(5);
  const int burn = 20000, keep = 40000;
  for (int k = 0; k < burn + keep; ++k) {
    vt.observe(sim.step());
    if (k >= burn) avg += vt.state().theta / keep;
  }
  EXPECT_LT((avg - fixed).lpNorm<Eigen::Infinity>(), 0.05);
}

TEST(ImpressionGtd, HandStep) {
  const Transition t1 = tr(vec({1, 0}), vec({0, 1}), 0.0, 0.9, 1.0, 1);
  const Transition t2 = tr(vec({1, 0}), vec({0, 0}), 1.0, 0.9, 1.0, 2);
  Hyperparams hp;
  hp.alpha = 1.0;
  const auto s = impression_gtd_update(LearnerState::initial(vec({0, 0})),
                                       std::vector<Transition>{t1}, std::vector<Transition>{t2}, hp);
  EXPECT_NEAR(s.theta(0), 1.0, 1e-15);
  EXPECT_NEAR(s.theta(1), -0.9, 1e-15);
}

TEST(ImpressionGtd, ZeroTdErrorsKeepTheta) {
  const Transition t1 = tr(vec({1, 0}), vec({0, 1}), 0.0, 0.9, 1.0, 1);
  const Transition t2 = tr(vec({0, 1}), vec({0, 0}), 2.0, 0.9, 1.0, 2);
  const Vector theta = vec({0.3, 2.0});  // delta2 = 2 - 2 = 0
  Hyperparams hp;
  hp.alpha = 1.0;
  const auto s = impression_gtd_update(LearnerState::initial(theta), std::vector<Transition>{t1},
                                       std::vector<Transition>{t2}, hp);
  EXPECT_EQ(s.theta, theta);
}

TEST(ImpressionGtd, SymmetricVariantAveragesBothDirections) {
  const Transition t1 = tr(vec({1, 0}), vec({0, 1}), 0.5, 0.9, 1.0, 1);
  const Transition t2 = tr(vec({1, 1}), vec({0, 0}), 1.0, 0.9, 1.0, 2);
  const std::vector<Transition> b1{t1}, b2{t2};
  const Vector theta = vec({0.2, -0.1});
  Hyperparams hp;
  hp.alpha = 0.5;
  hp.symmetric = true;
  const auto s = impression_gtd_update(LearnerState::initial(theta), b1, b2, hp);
  const Vector dir = 0.5 * (impression_direction(b1, b2, theta) + impression_direction(b2, b1, theta));
  EXPECT_LT((s.theta - (theta - 0.5 * dir)).norm(), 1e-15);
}

TEST(ImpressionGtd, UnbiasedDirection) {
  const Benchmark bm = random_walk(WalkRepresentation::Inverted);
  const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  const Vector theta = vec({0.5, -0.5, 0.2, 0.1, -0.3});
  Rng rng(51);
  const int n = 100000;
  Vector sum = Vector::Zero(5), sq = Vector::Zero(5);
  for (int k = 0; k < n; ++k) {
    const Vector d = impression_direction(draw(dist, 2, rng), draw(dist, 3, rng), theta);
    sum += d;
    sq += d.cwiseAbs2();
  }
  const Vector mean = sum / n;
  const Vector se = ((sq / n - mean.cwiseAbs2()) / n).cwiseSqrt();
  const Vector expected = mats.A.transpose() * (mats.A * theta + mats.b);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_LT(std::abs(mean(i) - expected(i)), 3.0 * se(i));
}

TEST(ImpressionGtd, FullFrozenBuffersGiveExpectedGtdDirection) {
  for (const char* name : {"boyan", "rw-inv", "baird"}) {
    const Benchmark bm = make_benchmark(name);
    Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 9, bm.episode_options());
    TwinBuffers buf;
    for (int k = 0; k < 3000; ++k) buf.insert(sim.step());
    Rng rng(10);
    const Vector theta = random_theta_near(bm.initial_theta, 1.0, rng);
    const Vector im = impression_direction(buf.first().items(), buf.second().items(), theta);
    const Vector ex = aggregate_direction(buf.first().mean_A(), buf.second().mean_A(),
                                          buf.second().mean_b(), theta);
    EXPECT_LT((im - ex).norm(), 1e-10 * std::max(1.0, ex.norm())) << name;

    Hyperparams hp;
    hp.alpha = 0.1;
    const auto start = LearnerState::initial(theta);
    const auto a = impression_gtd_update(start, buf.first().items(), buf.second().items(), hp);
    const auto b = expected_gtd_update(start, buf.first().mean_A(), buf.first().mean_b(),
                                       buf.second().mean_A(), buf.second().mean_b(), hp);
    EXPECT_LT((a.theta - b.theta).norm(), 1e-10 * std::max(1.0, theta.norm())) << name;
  }
}

TEST(ImpressionGtd, LearnerWaitsForBothBuffers) {
  Hyperparams hp;
  hp.m1 = hp.m2 = 2;
  Learner l(Algorithm::ImpressionGtd, hp, vec({0, 0}), 1);
  std::size_t episode = 1;
  for (int k = 0; k < 5; ++k) l.observe(tr(vec({1, 0}), vec({0, 1}), 1.0, 0.9, 1.0, episode++));
  // B1 holds 3, B2 holds 2: the default warmup of m2 = 2 is not yet passed
  EXPECT_EQ(l.state().step_count, 0u);
  l.observe(tr(vec({1, 0}), vec({0, 1}), 1.0, 0.9, 1.0, episode++));
  EXPECT_EQ(l.state().step_count, 1u);
}

TEST(ExpectedGtd, TwoTransitionHandStep) {
  TwinBuffers buf;
  buf.insert(tr(vec({1, 0}), vec({0, 1}), 0.0, 0.9, 1.0, 1));
  buf.insert(tr(vec({1, 0}), vec({0, 0}), 1.0, 0.9, 1.0, 2));
  Hyperparams hp;
  hp.alpha = 1.0;
  hp.warmup = 0;
  const auto s = expected_gtd_step(LearnerState::initial(vec({0, 0})), buf, hp);
  EXPECT_NEAR(s.theta(0), 1.0, 1e-15);
  EXPECT_NEAR(s.theta(1), -0.9, 1e-15);
}

TEST(ExpectedGtd, ZeroResidualMeansNoUpdate) {
  const Matrix a1 = Matrix::Random(3, 3);
  const Matrix a2 = Matrix::Identity(3, 3);
  const Vector theta = vec({1, 2, 3});
  const auto s = expected_gtd_update(LearnerState::initial(theta), a1, Vector::Zero(3), a2,
                                     -theta, Hyperparams{});
  EXPECT_EQ(s.theta, theta);
}

TEST(AtopTd, HandSteps) {
  const Transition t1 = tr(vec({1, 0}), vec({0, 1}), 0.0, 0.9);
  const Transition t2 = tr(vec({1, 0}), vec({0, 0}), 1.0, 0.9);
  Hyperparams hp;
  hp.alpha = 1.0;
  auto s = atop_td_step(LearnerState::initial(vec({0, 0})), t1, hp);
  EXPECT_EQ(s.theta, vec({0, 0}));  // delta = 0 on the first transition
  s = atop_td_step(s, t2, hp);
  // aggregate [[-1, 0.45], [0, 0]], rho delta phi = e0
  EXPECT_NEAR(s.theta(0), 1.0, 1e-15);
  EXPECT_NEAR(s.theta(1), -0.45, 1e-15);
  EXPECT_EQ(s.agg_count, 2u);
}

TEST(AtopTd, ExpectedUpdateWithFrozenAggregate) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
  TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
  Rng rng(61);
  LearnerState frozen = LearnerState::initial(vec({0.3, 0.1, -0.2, 0.4, 0.0}));
  for (int k = 0; k < 50; ++k) detail::fold_aggregate(frozen, dist.sample(rng));
  const Matrix agg = frozen.agg_A;
  const int n = 100000;
  Vector sum = Vector::Zero(5), sq = Vector::Zero(5);
  for (int k = 0; k < n; ++k) {
    const Transition t = dist.sample(rng);
    const Vector d = agg.transpose() * ((t.rho * t.td_error(frozen.theta)) * t.phi);
    sum += d;
    sq += d.cwiseAbs2();
  }
  const Vector mean = sum / n;
  const Vector se = ((sq / n - mean.cwiseAbs2()) / n).cwiseSqrt();
  const Vector expected = agg.transpose() * (mats.A * frozen.theta + mats.b);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_LT(std::abs(mean(i) - expected(i)), 3.0 * se(i));
}

TEST(R1Gtd, HandSteps) {
  const Transition t1 = tr(vec({1, 0}), vec({0, 1}), 0.0, 0.9);
  const Transition t2 = tr(vec({1, 0}), vec({0, 0}), 1.0, 0.9);
  Hyperparams hp;
  hp.alpha = 1.0;
  auto s = r1gtd_step(LearnerState::initial(vec({0, 0})), t1, hp);
  EXPECT_EQ(s.theta, vec({0, 0}));  // aggregate residual is zero
  s = r1gtd_step(s, t2, hp);
  // residual [0.5, 0], phi2 . residual = 0.5, gradient [-1, 0]
  EXPECT_NEAR(s.theta(0), 0.5, 1e-15);
  EXPECT_NEAR(s.theta(1), 0.0, 1e-15);
}

TEST(Learners, DivergenceIsFlaggedAndFreezesState) {
  const Transition t = tr(vec({1}), vec({1}), 0.0, 0.9);
  Hyperparams hp;
  hp.alpha = 1.0;
  LearnerState s = LearnerState::initial(vec({2e8}));
  s = td_step(s, t, hp);
  EXPECT_TRUE(s.diverged);
  const auto again = td_step(s, t, hp);
  EXPECT_EQ(again.theta, s.theta);
  EXPECT_EQ(again.step_count, s.step_count);
}

TEST(Learners, NamesRoundTrip) {
  for (const auto& [algo, name] : kAlgorithmNames) {
    ASSERT_TRUE(parse_algorithm(name).has_value());
    EXPECT_EQ(*parse_algorithm(name), algo);
    EXPECT_EQ(to_string(algo), name);
  }
  EXPECT_FALSE(parse_algorithm("q-learning").has_value());
}

TEST(Learners, HyperparamValidation) {
  Hyperparams hp;
  hp.alpha = 0.0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp.alpha = 0.1;
  hp.m1 = 0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp.m1 = 1;
  hp.reg = -1;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  EXPECT_THROW(Learner(Algorithm::Td, Hyperparams{.alpha = -1.0}, vec({0}), 1),
               std::invalid_argument);
}

TEST(Learners, SameSeedSameTrajectory) {
  const Benchmark bm = random_walk(WalkRepresentation::Tabular);
  Hyperparams hp;
  hp.alpha = 0.5;
  hp.m1 = hp.m2 = 4;
  Learner a(Algorithm::ImpressionGtd, hp, bm.initial_theta, 77);
  Learner b(Algorithm::ImpressionGtd, hp, bm.initial_theta, 77);
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, 5);
  for (int k = 0; k < 1000; ++k) {
    const Transition t = sim.step();
    a.observe(t);
    b.observe(t);
  }
  EXPECT_EQ(a.state().theta, b.state().theta);
}
