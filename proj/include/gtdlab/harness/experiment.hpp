#pragma once

#include "gtdlab/analysis.hpp"
#include "gtdlab/envs.hpp"
#include "gtdlab/harness/config.hpp"
#include "gtdlab/learners.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gtdlab {

struct RunSeries {
  std::string label;
  Algorithm algorithm = Algorithm::Td;
  std::string benchmark;
  Metric metric = Metric::Rmsve;
  std::vector<std::size_t> steps;
  std::vector<std::vector<double>> per_run;  // per_run[run][point]
  std::vector<double> mean;
  std::vector<double> std_error;
  std::vector<std::size_t> n_runs;  // runs contributing at each point
  std::vector<bool> diverged;       // per run, by the end of the run

  std::size_t diverged_count() const {
    return static_cast<std::size_t>(std::count(diverged.begin(), diverged.end(), true));
  }
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunSeries> series;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Run r uses seed base_seed + r; each consumer inside the run gets its own
// stream derived from that seed.
inline std::uint64_t stream_seed(std::uint64_t run_seed, std::uint64_t stream) {
  return splitmix64(splitmix64(run_seed) ^ splitmix64(stream + 0x5851F42D4C957F2DULL));
}

inline std::vector<std::size_t> record_steps(std::size_t n_steps, std::size_t every) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s <= n_steps; s += every) out.push_back(s);
  return out;
}

namespace detail {

struct RunOutput {
  std::vector<std::vector<double>> values;  // values[series][point]
  std::vector<bool> diverged;               // per algorithm
};

inline RunOutput run_once(const ExperimentConfig& cfg, const Benchmark& bm,
                          const Evaluator& eval, std::size_t run) {
  const std::uint64_t run_seed = cfg.base_seed + run;
  TwinBufferOptions buffer_options;
  buffer_options.routing = cfg.routing;
  buffer_options.window = cfg.window;
  std::vector<Learner> learners;
  learners.reserve(cfg.algorithms.size());
  for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
    learners.emplace_back(cfg.algorithms[k].algorithm, cfg.hyperparams(k), bm.initial_theta,
                          stream_seed(run_seed, k + 1), buffer_options);
  }
  Simulator sim(bm.mdp, bm.behavior, bm.target, bm.features, stream_seed(run_seed, 0),
                bm.episode_options());
  const std::size_t n_metrics = cfg.metrics.size();
  RunOutput out;
  out.values.assign(learners.size() * n_metrics, {});
  auto record = [&] {
    for (std::size_t k = 0; k < learners.size(); ++k) {
      const auto& st = learners[k].state();
      for (std::size_t j = 0; j < n_metrics; ++j) {
        out.values[k * n_metrics + j].push_back(st.diverged ? kNaN
                                                            : eval.metric(cfg.metrics[j], st.theta));
      }
    }
  };
  record();
  for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
    const Transition t = sim.step();
    for (auto& l : learners) l.observe(t);
    if (step % cfg.record_every == 0) record();
  }
  for (const auto& l : learners) out.diverged.push_back(l.diverged());
  return out;
}

}  // namespace detail

inline std::size_t resolve_jobs(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GTDLAB_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  const Benchmark bm = make_benchmark(cfg.benchmark);
  const Evaluator eval(bm);
  for (Metric m : cfg.metrics) {
    if (m == Metric::Rmspbe && !eval.has_rmspbe()) {
      throw ConfigError("metrics: rmspbe is undefined on '" + cfg.benchmark +
                        "' (ill-conditioned preconditioner)");
    }
  }
  for (const auto& spec : cfg.algorithms) {
    if (spec.hp.m1 < 1 || spec.hp.m2 < 1) throw ConfigError("batch sizes must be at least 1");
  }

  std::vector<detail::RunOutput> runs(cfg.n_runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.n_runs; r = next++) {
      try {
        runs[r] = detail::run_once(cfg, bm, eval, r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(std::max<std::size_t>(jobs, 1), cfg.n_runs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  result.config = cfg;
  const auto steps = record_steps(cfg.n_steps, cfg.record_every);
  const std::size_t n_metrics = cfg.metrics.size();
  for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
    for (std::size_t j = 0; j < n_metrics; ++j) {
      RunSeries s;
      s.label = cfg.algorithms[k].label;
      s.algorithm = cfg.algorithms[k].algorithm;
      s.benchmark = cfg.benchmark;
      s.metric = cfg.metrics[j];
      s.steps = steps;
      for (const auto& run : runs) {
        s.per_run.push_back(run.values[k * n_metrics + j]);
        s.diverged.push_back(run.diverged[k]);
      }
      for (std::size_t p = 0; p < steps.size(); ++p) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& v : s.per_run) {
          if (std::isfinite(v[p])) {
            sum += v[p];
            ++n;
          }
        }
        const double mean = n > 0 ? sum / static_cast<double>(n) : kNaN;
        double ss = 0.0;
        for (const auto& v : s.per_run) {
          if (std::isfinite(v[p])) ss += (v[p] - mean) * (v[p] - mean);
        }
        s.mean.push_back(mean);
        s.std_error.push_back(
            n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n))
                  : 0.0);
        s.n_runs.push_back(n);
      }
      result.series.push_back(std::move(s));
    }
  }
  return result;
}

}  // namespace gtdlab
