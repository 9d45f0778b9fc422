#pragma once

#include "gtdlab/analysis.hpp"
#include "gtdlab/buffers.hpp"
#include "gtdlab/envs.hpp"
#include "gtdlab/harness/experiment.hpp"
#include "gtdlab/harness/figures.hpp"
#include "gtdlab/learners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace gtdlab {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

template <class F>
CheckResult timed(int id, std::string name, F&& body) {
  CheckResult r;
  r.id = id;
  r.name = std::move(name);
  const auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

inline const RunSeries& find_series(const ExperimentResult& res, const std::string& label) {
  for (const auto& s : res.series) {
    if (s.label == label) return s;
  }
  throw std::runtime_error("no series labelled '" + label + "'");
}

inline std::size_t point_at(const RunSeries& s, std::size_t step) {
  const auto it = std::find(s.steps.begin(), s.steps.end(), step);
  if (it == s.steps.end()) throw std::runtime_error("step not recorded");
  return static_cast<std::size_t>(it - s.steps.begin());
}

// Three non-terminal states with sticky dynamics, so states inside one
// episode are strongly correlated.
inline Benchmark sticky_chain() {
  Benchmark bm;
  bm.name = "sticky-chain";
  bm.mdp = blank_mdp(4, 1, 1.0);
  auto& p = bm.mdp.transition[0];
  for (Eigen::Index s = 0; s < 3; ++s) {
    p(s, s) = 0.6;
    p(s, (s + 1) % 3) = 0.3;
    p(s, 3) = 0.1;
    bm.mdp.reward[0](s, 3) = 1.0;
  }
  make_absorbing(bm.mdp, 3);
  bm.mdp.start_dist << 0.5, 0.3, 0.2, 0.0;
  Matrix phi = Matrix::Zero(4, 3);
  phi.topLeftCorner(3, 3).setIdentity();
  bm.features = {phi, FeatureVariant::Tabular};
  bm.target.action_probs = Matrix::Ones(4, 1);
  bm.behavior = bm.target;
  bm.initial_theta = Vector::Zero(3);
  bm.mdp.validate();
  return bm;
}

}  // namespace detail

// 1. analytic NEU gradient against central differences
inline CheckResult check_neu_gradient(std::uint64_t seed = 1) {
  return detail::timed(1, "NEU gradient vs finite differences", [&](CheckResult& r) {
    Rng rng(seed);
    double worst = 0.0;
    for (const auto view : benchmark_names()) {
      const std::string name(view);
      const Benchmark bm = make_benchmark(name);
      const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
      for (int k = 0; k < 20; ++k) {
        const Vector theta = random_theta_near(Vector::Zero(bm.dim()), 5.0, rng);
        const Vector g = neu_grad(theta, mats);
        Vector fd(theta.size());
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
          const double h = 1e-4 * std::max(1.0, std::abs(theta(i)));
          Vector up = theta, down = theta;
          up(i) += h;
          down(i) -= h;
          fd(i) = (neu(up, mats) - neu(down, mats)) / (2.0 * h);
        }
        worst = std::max(worst, (fd - g).norm() / std::max(g.norm(), 1e-300));
      }
    }
    r.passed = worst < 1e-6;
    r.detail = "max relative error " + detail::fmt(worst) + " (limit 1e-6)";
  });
}

// 2. pair objective with sim = phi^T C^-1 phi equals MSPBE
inline CheckResult check_mspbe_identity(std::uint64_t seed = 2) {
  return detail::timed(2, "pair objective equals MSPBE", [&](CheckResult& r) {
    Rng rng(seed);
    double worst = 0.0;
    std::size_t n_bench = 0;
    for (const auto view : benchmark_names()) {
      const std::string name(view);
      const Benchmark bm = make_benchmark(name);
      const Evaluator eval(bm);
      if (!eval.has_rmspbe()) continue;
      ++n_bench;
      for (int k = 0; k < 20; ++k) {
        const Vector theta = random_theta_near(Vector::Zero(bm.dim()), 1.0, rng);
        worst = std::max(worst, mspbe_equivalence_check(theta, bm).abs_diff);
      }
    }
    r.passed = worst < 1e-10 && n_bench > 0;
    r.detail = "max |N - MSPBE| " + detail::fmt(worst) + " over " + std::to_string(n_bench) +
               " benchmarks with invertible C";
  });
}

// 3. states drawn from the two buffers are independent
inline CheckResult check_buffer_independence(std::uint64_t seed = 3) {
  return detail::timed(3, "twin-buffer independence", [&](CheckResult& r) {
    const Benchmark bm = detail::sticky_chain();
    Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, seed, bm.episode_options());
    Rng draw_rng(seed + 1);
    constexpr std::size_t kDraws = 100000;
    double joint[3][3] = {};
    for (std::size_t k = 0; k < kDraws; ++k) {
      // two fresh episodes per draw, routed by parity
      TwinBuffers buffers;
      const std::size_t first = sim.episode();
      while (sim.episode() < first + 2) buffers.insert(sim.step());
      const auto pair = buffers.sample_pair(1, 1, 0, draw_rng);
      if (!pair) throw std::runtime_error("empty buffer after two episodes");
      joint[pair->batch1[0]->state][pair->batch2[0]->state] += 1.0;
    }
    double row[3] = {}, col[3] = {};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        joint[i][j] /= static_cast<double>(kDraws);
        row[i] += joint[i][j];
        col[j] += joint[i][j];
      }
    }
    double worst = 0.0, chi2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double expect = row[i] * col[j];
        worst = std::max(worst, std::abs(joint[i][j] - expect));
        if (expect > 0.0) {
          chi2 += static_cast<double>(kDraws) * (joint[i][j] - expect) * (joint[i][j] - expect) /
                  expect;
        }
      }
    }
    r.passed = worst < 0.01;
    r.detail = "max |P(s1,s2) - P(s1)P(s2)| " + detail::fmt(worst) + ", chi-square " +
               detail::fmt(chi2) + " on 4 dof";
  });
}

// 4. E||avg_m||^2 = E||g||^2 / m + (1 - 1/m) ||E g||^2
inline CheckResult check_average_identity(std::uint64_t seed = 4) {
  return detail::timed(4, "mini-batch second-moment identity", [&](CheckResult& r) {
    const Benchmark bm = make_benchmark("rw-tab");
    TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
    Rng rng(seed);
    const Vector theta = random_theta_near(Vector::Zero(bm.dim()), 1.0, rng);
    auto sample_of = [&](const Transition& t) -> Vector {
      return (t.rho * t.td_error(theta)) * t.phi;
    };
    Vector mean = Vector::Zero(bm.dim());
    double second = 0.0;
    for (const auto& sp : dist.points()) {
      const Vector g = sample_of(dist.make(sp));
      mean += sp.prob * g;
      second += sp.prob * g.squaredNorm();
    }
    double worst = 0.0;
    std::string parts;
    for (std::size_t m : {1, 8, 32}) {
      const double fm = static_cast<double>(m);
      const double predicted = second / fm + (1.0 - 1.0 / fm) * mean.squaredNorm();
      double acc = 0.0;
      constexpr std::size_t kDraws = 100000;
      for (std::size_t k = 0; k < kDraws; ++k) {
        Vector avg = Vector::Zero(bm.dim());
        for (std::size_t i = 0; i < m; ++i) avg += sample_of(dist.sample(rng));
        acc += (avg / fm).squaredNorm();
      }
      const double observed = acc / static_cast<double>(kDraws);
      const double rel = std::abs(observed - predicted) / predicted;
      worst = std::max(worst, rel);
      parts += " m=" + std::to_string(m) + ":" + detail::fmt(rel);
    }
    r.passed = worst < 0.02;
    r.detail = "relative gaps" + parts + " (limit 0.02)";
  });
}

// 5. mean Impression GTD step equals the negative NEU half-gradient
inline CheckResult check_unbiased_direction(std::uint64_t seed = 5) {
  return detail::timed(5, "Impression GTD step is unbiased", [&](CheckResult& r) {
    const Benchmark bm = make_benchmark("rw-tab");
    TransitionDistribution dist(bm.mdp, bm.target, bm.behavior, bm.features);
    const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
    Rng rng(seed);
    double worst_z = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Vector theta = random_theta_near(Vector::Zero(bm.dim()), 1.0, rng);
      const Vector expected = -mats.A.transpose() * (mats.A * theta + mats.b);
      const auto d = static_cast<std::size_t>(bm.dim());
      std::vector<detail::RunningStats> stats(d);
      std::vector<Transition> b1(1), b2(1);
      for (std::size_t s = 0; s < 100000; ++s) {
        b1[0] = dist.sample(rng);
        b2[0] = dist.sample(rng);
        const Vector step = -impression_direction(b1, b2, theta);
        for (std::size_t i = 0; i < d; ++i) stats[i].add(step(static_cast<Eigen::Index>(i)));
      }
      for (std::size_t i = 0; i < d; ++i) {
        const auto e = stats[i].estimate();
        const double gap = std::abs(e.mean - expected(static_cast<Eigen::Index>(i)));
        worst_z = std::max(worst_z, e.std_error > 0.0 ? gap / e.std_error : (gap > 0 ? 1e9 : 0));
      }
    }
    r.passed = worst_z <= 3.0;
    r.detail = "largest coordinate gap " + detail::fmt(worst_z) + " standard errors (limit 3)";
  });
}

// 6. L-lambda smoothness inequality at random points
inline CheckResult check_l_lambda(std::uint64_t seed = 6) {
  return detail::timed(6, "L-lambda smoothness", [&](CheckResult& r) {
    Rng rng(seed);
    bool ok = true;
    std::string parts;
    for (const auto view : benchmark_names()) {
      const std::string name(view);
      const Benchmark bm = make_benchmark(name);
      const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
      if (min_singular_value(mats.A) <= 1e-10) continue;
      for (std::size_t m : {1, 4}) {
        const ProblemConstants c = problem_constants(bm, m, m);
        const LLambdaReport rep = verify_l_lambda(bm, c, 100, 4000, rng);
        std::size_t failed = 0;
        double worst = 0.0;
        for (const auto& p : rep.points) {
          failed += p.passed ? 0 : 1;
          worst = std::max(worst, (p.lhs - 3.0 * p.lhs_stderr) / p.rhs);
        }
        ok = ok && failed == 0;
        parts += " " + name + "/m=" + std::to_string(m) + ":" + std::to_string(failed) +
                 " fail, max lhs/rhs " + detail::fmt(worst) + ";";
      }
    }
    r.passed = ok;
    r.detail = "100 points each," + parts;
  });
}

// 7. min_k NEU(theta_k) under the O(1/t) bound on the tabular walk
inline CheckResult check_one_over_t(std::uint64_t seed = 7) {
  return detail::timed(7, "O(1/t) bound on rw-tab", [&](CheckResult& r) {
    const Benchmark bm = make_benchmark("rw-tab");
    ProblemConstants c = problem_constants(bm, 1, 1);
    Rng rng(seed);
    c.sigma_v2 = sigma_v2_estimate(bm, 200000, rng).mean;
    c.L_max = l_max_support(bm);
    const double alpha = 1.0 / c.L_max;
    const Evaluator eval(bm);
    const double f0 = eval.neu(bm.initial_theta);
    constexpr std::size_t kSeeds = 10;
    constexpr std::size_t kSteps = 20000;
    constexpr std::size_t kEvery = 10;
    Hyperparams hp;
    hp.alpha = alpha;
    std::vector<double> mean_neu(kSteps / kEvery + 1, 0.0);
    std::vector<std::size_t> updates(mean_neu.size(), 0);
    for (std::size_t k = 0; k < kSeeds; ++k) {
      Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, stream_seed(seed + k, 0),
                    bm.episode_options());
      Learner learner(Algorithm::ImpressionGtd, hp, bm.initial_theta, stream_seed(seed + k, 1));
      mean_neu[0] += eval.neu(learner.state().theta) / kSeeds;
      for (std::size_t step = 1; step <= kSteps; ++step) {
        learner.observe(sim.step());
        if (step % kEvery == 0) {
          mean_neu[step / kEvery] += eval.neu(learner.state().theta) / kSeeds;
          updates[step / kEvery] = std::max(updates[step / kEvery], learner.state().step_count);
        }
      }
    }
    double running_min = mean_neu[0];
    std::size_t violations = 0, checked = 0;
    double worst_ratio = 0.0;
    for (std::size_t p = 1; p < mean_neu.size(); ++p) {
      running_min = std::min(running_min, mean_neu[p]);
      if (updates[p] == 0) continue;
      const double bound =
          one_over_t_bound(c, alpha, static_cast<double>(updates[p]), f0, 1, 1);
      ++checked;
      if (running_min > bound) {
        ++violations;
        worst_ratio = std::max(worst_ratio, bound > 0 ? running_min / bound : 1e300);
      }
    }
    // past this many updates the subtracted variance term zeroes the bound
    const double zero_from = 2.0 * f0 / (alpha * (2.0 - alpha * c.L_max) * c.sigma_v2);
    r.passed = violations == 0 && checked > 0;
    r.detail = "alpha=1/L_max=" + detail::fmt(alpha) + ", sigma_v2~" + detail::fmt(c.sigma_v2) +
               ", bound is 0 once t > " + detail::fmt(zero_from) +
               ", " + std::to_string(violations) + "/" + std::to_string(checked) +
               " recorded t above the bound";
  });
}

// 8. exact expected-GTD iteration contracts at ||I - alpha A^T A||
inline CheckResult check_expected_contraction() {
  return detail::timed(8, "expected-GTD contraction on boyan", [&](CheckResult& r) {
    const Benchmark bm = make_benchmark("boyan");
    const auto mats = expected_matrices(bm.mdp, bm.target, bm.behavior, bm.features);
    const Vector theta_star = td_solution(mats);
    const double a2 = spectral_norm(mats.A) * spectral_norm(mats.A);
    Hyperparams hp;
    hp.alpha = 0.5 / a2;
    const Matrix iter = Matrix::Identity(bm.dim(), bm.dim()) - hp.alpha * mats.A.transpose() * mats.A;
    const double predicted = spectral_norm(iter);
    LearnerState s = LearnerState::initial(bm.initial_theta);
    double worst = 0.0;
    double err = (s.theta - theta_star).norm();
    for (int k = 1; k <= 300; ++k) {
      s = expected_gtd_update(std::move(s), mats.A, mats.b, mats.A, mats.b, hp);
      const double next = (s.theta - theta_star).norm();
      if (k > 150) worst = std::max(worst, std::abs(next / err - predicted) / predicted);
      err = next;
    }
    r.passed = worst < 0.01;
    r.detail = "predicted ratio " + detail::fmt(predicted) + ", max relative gap after step 150 " +
               detail::fmt(worst);
  });
}

// 9. Baird: linear decay of RMSVE and TD divergence
inline CheckResult check_baird(std::size_t jobs = 0, std::uint64_t seed = 9) {
  return detail::timed(9, "Baird linear rate and TD divergence", [&](CheckResult& r) {
    BuiltinFigure fig = builtin_figure("baird");
    fig.config.n_runs = 100;
    fig.config.base_seed = seed;
    const auto res = run_experiment(fig.config, resolve_jobs(jobs));
    const auto& im = detail::find_series(res, "impression-gtd");
    const auto& td = detail::find_series(res, "td");
    const double initial = im.mean.front();
    const double best = *std::min_element(im.mean.begin(), im.mean.end());
    std::vector<double> x(im.steps.begin(), im.steps.end());
    const LinearFit fit = linear_rate_fit_middle(x, im.mean);
    const bool reached = best < 0.05 * initial;
    const bool linear = fit.r_squared > 0.95;
    const bool diverged = td.diverged_count() > 0;
    r.passed = reached && linear && diverged && im.diverged_count() == 0;
    r.detail = "lowest RMSVE " + detail::fmt(best / initial) + " of initial (limit 0.05), R^2 " +
               detail::fmt(fit.r_squared) + " (limit 0.95), td diverged in " +
               std::to_string(td.diverged_count()) + "/100 runs, impression-gtd diverged in " +
               std::to_string(im.diverged_count());
  });
}

// 10. rank orders of the comparison figures
inline CheckResult check_rank_orders(std::size_t jobs = 0, std::uint64_t seed = 10) {
  return detail::timed(10, "figure rank orders", [&](CheckResult& r) {
    auto run = [&](const char* name) {
      BuiltinFigure fig = builtin_figure(name);
      fig.config.n_runs = 100;
      fig.config.base_seed = seed;
      return run_experiment(fig.config, resolve_jobs(jobs));
    };
    auto at = [](const ExperimentResult& res, const std::string& label, std::size_t step) {
      const auto& s = detail::find_series(res, label);
      return s.mean[detail::point_at(s, step)];
    };
    std::string detail_text;
    bool ok = true;
    auto note = [&](const std::string& part, bool pass) {
      ok = ok && pass;
      detail_text += part + (pass ? " ok; " : " FAILED; ");
    };

    const auto boyan = run("boyan-compare");
    const double b_im = at(boyan, "impression-gtd", 2000);
    const double b_td = at(boyan, "td", 2000);
    note("(a) boyan@2000 im " + detail::fmt(b_im) + " < td " + detail::fmt(b_td), b_im < b_td);

    const auto tab = run("rw-tab-compare");
    const double t_im = at(tab, "impression-gtd", 6000);
    const double t_td = at(tab, "td", 6000);
    const double t_rc = at(tab, "tdrc", 6000);
    note("(b) rw-tab@6000 im " + detail::fmt(t_im) + " < td " + detail::fmt(t_td) + ", tdrc " +
             detail::fmt(t_rc),
         t_im < t_td && t_im < t_rc);

    const auto inv = run("rw-inv-rmsve");
    const double i_g2 = at(inv, "gtd2", 6000);
    const double i_tdc = at(inv, "tdc", 6000);
    const double i_rc = at(inv, "tdrc", 6000);
    const double i_im = at(inv, "impression-gtd", 6000);
    bool lowest = true;
    for (const auto& s : inv.series) {
      if (s.label != "impression-gtd" && !(i_im < s.mean[detail::point_at(s, 6000)])) {
        lowest = false;
      }
    }
    note("(c) rw-inv@6000 gtd2 " + detail::fmt(i_g2) + ", tdc " + detail::fmt(i_tdc) +
             " < tdrc " + detail::fmt(i_rc) + ", im " + detail::fmt(i_im) + " lowest",
         i_g2 < i_rc && i_tdc < i_rc && lowest);

    // plateau: mean over the last fifth of the recorded points
    auto plateau = [](const RunSeries& s) {
      const std::size_t n = s.mean.size();
      const std::size_t from = n - n / 5;
      double m = 0.0, se = 0.0;
      for (std::size_t p = from; p < n; ++p) {
        m += s.mean[p];
        se += s.std_error[p];
      }
      return std::pair{m / static_cast<double>(n - from), se / static_cast<double>(n - from)};
    };
    const auto [v_mean, v_se] = plateau(detail::find_series(tab, "vtrace"));
    const auto [d_mean, d_se] = plateau(detail::find_series(tab, "td"));
    note("(d) rw-tab plateau vtrace " + detail::fmt(v_mean) + " > td " + detail::fmt(d_mean) +
             " by >3 se",
         v_mean - d_mean > 3.0 * std::hypot(v_se, d_se));
    r.passed = ok;
    r.detail = detail_text;
  });
}

// 11. bias-subtracted Boyan curves: Impression GTD m=128 is closer to linear
inline CheckResult check_linear_replot(std::size_t jobs = 0, std::uint64_t seed = 11) {
  return detail::timed(11, "Boyan bias-subtracted linear rate", [&](CheckResult& r) {
    BuiltinFigure fig = builtin_figure("boyan-linear-rate");
    fig.config.n_runs = 100;
    fig.config.base_seed = seed;
    const auto res = run_experiment(fig.config, resolve_jobs(jobs));
    auto r2 = [&](const std::string& label) {
      const auto& s = detail::find_series(res, label);
      const auto y = bias_subtracted_series(s.mean, fig.tail_points);
      std::vector<double> x(s.steps.begin(), s.steps.end());
      return linear_rate_fit_middle(x, y).r_squared;
    };
    const double im = r2("impression-gtd m=128");
    const double td = r2("td");
    r.passed = im - td >= 0.1;
    r.detail = "R^2 impression-gtd m=128 " + detail::fmt(im) + ", td " + detail::fmt(td) +
               " (need a gap of at least 0.1)";
  });
}

// 12. batch threshold implies a valid rate; m=1 on rw-tab has no guarantee
inline CheckResult check_rate_consistency() {
  return detail::timed(12, "rate predictor self-consistency", [&](CheckResult& r) {
    bool ok = true;
    std::string parts;
    for (const auto view : benchmark_names()) {
      const std::string name(view);
      const Benchmark bm = make_benchmark(name);
      const ProblemConstants base = problem_constants(bm, 1, 1);
      if (base.a_singular) {
        parts += " " + name + ": singular A, skipped;";
        continue;
      }
      const std::size_t m = batch_threshold(base).exact;
      for (std::size_t mm : {m, 2 * m}) {
        const ProblemConstants c = problem_constants(bm, mm, mm);
        const RatePrediction p = rate_predictor(c, 1.0 / c.L, mm);
        const bool good = p.guaranteed && p.q > 0.0 && p.q < 1.0;
        ok = ok && good;
        if (mm == m) parts += " " + name + ": m=" + std::to_string(m) + " q=" + detail::fmt(p.q) + ";";
      }
    }
    const ProblemConstants one = problem_constants(make_benchmark("rw-tab"), 1, 1);
    const RatePrediction p1 = rate_predictor(one, 1.0 / one.L, 1);
    const bool flagged = one.lambda > one.L * one.mu && !p1.guaranteed &&
                         p1.note.find("no guarantee") != std::string::npos;
    ok = ok && flagged;
    parts += " rw-tab m=1: lambda " + detail::fmt(one.lambda) + " vs L*mu " +
             detail::fmt(one.L * one.mu) + (flagged ? ", flagged" : ", NOT flagged");
    r.passed = ok;
    r.detail = parts;
  });
}

// Checks that only need exact computation or Monte-Carlo oracles.
inline std::vector<std::function<CheckResult()>> oracle_checks() {
  return {[] { return check_neu_gradient(); },       [] { return check_mspbe_identity(); },
          [] { return check_buffer_independence(); }, [] { return check_average_identity(); },
          [] { return check_unbiased_direction(); },  [] { return check_l_lambda(); },
          [] { return check_one_over_t(); },          [] { return check_expected_contraction(); },
          [] { return check_rate_consistency(); }};
}

inline std::vector<std::function<CheckResult()>> experiment_checks(std::size_t jobs) {
  return {[jobs] { return check_baird(jobs); }, [jobs] { return check_rank_orders(jobs); },
          [jobs] { return check_linear_replot(jobs); }};
}

inline std::string format_check(const CheckResult& r) {
  std::ostringstream ss;
  ss << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " ("
     << detail::fmt(r.seconds) << " s): " << r.detail;
  return ss.str();
}

}  // namespace gtdlab
