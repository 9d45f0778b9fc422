#pragma once

#include "gtdlab/analysis.hpp"
#include "gtdlab/envs.hpp"
#include "gtdlab/harness/config.hpp"
#include "gtdlab/harness/experiment.hpp"
#include "gtdlab/harness/figures.hpp"
#include "gtdlab/harness/output.hpp"
#include "gtdlab/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace gtdlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::string> out;
  std::size_t jobs = 0;

  void apply(ExperimentConfig& cfg) const {
    if (seed) cfg.base_seed = *seed;
    if (runs) cfg.n_runs = *runs;
    if (out) cfg.output_dir = *out;
  }
};

namespace detail {

inline std::string metric_label(Metric m) {
  switch (m) {
    case Metric::Rmsve: return "RMSVE";
    case Metric::Rmspbe: return "RMSPBE";
    case Metric::Neu: return "NEU";
  }
  return "";
}

// Writes <out>/<name>.csv, <out>/<name>.diverged.csv and one SVG per metric.
inline void write_outputs(const ExperimentResult& res, const PlotSpec& base_plot,
                          bool bias_subtract, std::size_t tail_points, std::ostream& out) {
  const auto& cfg = res.config;
  const std::filesystem::path dir(cfg.output_dir);
  const auto csv = dir / (cfg.name + ".csv");
  emit_csv(res.series, csv);
  write_file(dir / (cfg.name + ".diverged.csv"), divergence_csv_text(res.series));
  out << "wrote " << csv.string() << "\n";
  for (Metric m : cfg.metrics) {
    std::vector<RunSeries> subset;
    for (const auto& s : res.series) {
      if (s.metric == m) subset.push_back(s);
    }
    PlotSpec plot = base_plot;
    if (plot.y_label.empty() || cfg.metrics.size() > 1) plot.y_label = metric_label(m);
    const std::string stem =
        cfg.metrics.size() > 1 ? cfg.name + "-" + std::string(to_string(m)) : cfg.name;
    const auto svg = dir / (stem + ".svg");
    if (bias_subtract) {
      emit_svg(bias_subtracted_plot(subset, tail_points), plot, svg);
    } else {
      emit_svg(subset, plot, svg);
    }
    out << "wrote " << svg.string() << "\n";
  }
  for (const auto& s : res.series) {
    const double last = s.mean.empty() ? kNaN : s.mean.back();
    out << "  " << s.label << " [" << to_string(s.metric) << "] final mean " << format_double(last)
        << ", diverged " << s.diverged_count() << "/" << s.diverged.size() << "\n";
  }
}

inline int run_and_write(ExperimentConfig cfg, const RunOverrides& ov, PlotSpec plot,
                         bool bias_subtract, std::size_t tail_points, std::ostream& out) {
  ov.apply(cfg);
  if (plot.title.empty()) plot.title = cfg.name;
  const auto res = run_experiment(cfg, resolve_jobs(ov.jobs));
  write_outputs(res, plot, bias_subtract, tail_points, out);
  return kExitOk;
}

inline nlohmann::json constants_json(const ProblemConstants& c, double alpha,
                                     const std::optional<RatePrediction>& rate,
                                     const std::optional<BatchThreshold>& threshold) {
  nlohmann::json j;
  j["m1"] = c.m1;
  j["m2"] = c.m2;
  j["mu"] = c.mu;
  j["a_singular"] = c.a_singular;
  j["norm_A"] = c.norm_A;
  j["norm_Sigma_A"] = c.norm_SigmaA;
  j["norm_Sigma_b"] = c.norm_Sigmab;
  j["L1"] = c.L1;
  j["L2"] = c.L2;
  j["L"] = c.L;
  j["lambda"] = c.lambda;
  j["sigma2"] = c.sigma2;
  j["sigma_v2_upper"] = c.sigma_v2;
  j["L_max"] = c.L_max;
  j["theta_star"] = std::vector<double>(c.theta_star.data(),
                                        c.theta_star.data() + c.theta_star.size());
  j["alpha"] = alpha;
  if (rate) {
    j["q"] = rate->q;
    j["bias"] = rate->bias;
    j["guaranteed"] = rate->guaranteed;
    j["note"] = rate->note;
  }
  if (threshold) {
    j["batch_threshold"] = threshold->exact;
    j["batch_threshold_root"] = threshold->root;
    j["batch_threshold_sufficient"] = threshold->sufficient;
  }
  return j;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Policy-evaluation lab for Impression GTD and its baselines", "gtdlab"};
  app.require_subcommand(1);

  RunOverrides ov;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", ov.seed, "base seed; run r uses seed + r");
    sub->add_option("--runs", ov.runs, "number of independent runs")->check(CLI::PositiveNumber);
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--jobs", ov.jobs, "worker threads (0: GTDLAB_JOBS or all cores)");
  };

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config file");
  run->add_option("config", config_path, "config file")->required();
  add_run_flags(run);

  std::string figure_name;
  bool list_figures = false;
  bool print_config = false;
  auto* figure = app.add_subcommand("figure", "run a built-in figure configuration");
  figure->add_option("name", figure_name, "figure name (see --list)");
  figure->add_flag("--list", list_figures, "list built-in figure names");
  figure->add_flag("--print-config", print_config, "print the config as JSON and exit");
  add_run_flags(figure);

  std::string bench_name;
  std::size_t m1 = 1, m2 = 1, samples = 100000;
  std::optional<double> alpha;
  std::uint64_t const_seed = 0;
  bool as_json = false;
  auto* constants = app.add_subcommand("constants", "print smoothness constants and rates");
  constants->add_option("benchmark", bench_name, "benchmark name")->required();
  constants->add_option("--m1", m1, "first batch size")->check(CLI::PositiveNumber);
  constants->add_option("--m2", m2, "second batch size")->check(CLI::PositiveNumber);
  constants->add_option("--alpha", alpha, "step-size for the rate (default 1/L)");
  constants->add_option("--samples", samples, "Monte-Carlo samples for sigma_v^2");
  constants->add_option("--seed", const_seed, "seed for the Monte-Carlo estimate");
  constants->add_flag("--json", as_json, "print JSON instead of text");

  bool verify_all = false;
  std::size_t verify_jobs = 0;
  auto* verify = app.add_subcommand("verify", "run the Monte-Carlo and exact oracles");
  verify->add_flag("--all", verify_all, "also run the 100-run experiment checks");
  verify->add_option("--jobs", verify_jobs, "worker threads for experiment checks");

  if (argc <= 1) {
    err << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*run) {
      const ExperimentConfig cfg = load_config(config_path);
      PlotSpec plot;
      plot.y_label = detail::metric_label(cfg.metrics.front());
      return detail::run_and_write(cfg, ov, plot, false, 100, out);
    }
    if (*figure) {
      if (list_figures) {
        for (auto n : kFigureNames) out << n << "\n";
        return kExitOk;
      }
      if (figure_name.empty()) {
        err << "error: figure name required\n\n" << figure->help();
        return kExitUsage;
      }
      if (!is_figure_name(figure_name)) {
        err << "error: unknown figure '" << figure_name << "' (try --list)\n";
        return kExitUsage;
      }
      BuiltinFigure fig = builtin_figure(figure_name);
      if (print_config) {
        ov.apply(fig.config);
        out << figure_config_text(fig);
        return kExitOk;
      }
      return detail::run_and_write(fig.config, ov, fig.plot, fig.bias_subtract, fig.tail_points,
                                   out);
    }
    if (*constants) {
      const Benchmark bm = make_benchmark(bench_name);
      ProblemConstants c = problem_constants(bm, m1, m2);
      Rng rng(const_seed);
      c.sigma_v2 = sigma_v2_estimate(bm, samples, rng).mean;
      c.L_max = l_max_support(bm);
      const double a = alpha.value_or(1.0 / c.L);
      std::optional<RatePrediction> rate;
      std::string rate_error;
      try {
        rate = rate_predictor(c, a, std::max(m1, m2));
      } catch (const std::domain_error& e) {
        rate_error = e.what();
      }
      std::optional<BatchThreshold> threshold;
      if (!c.a_singular) threshold = batch_threshold(c);
      if (as_json) {
        auto j = detail::constants_json(c, a, rate, threshold);
        j["benchmark"] = bench_name;
        if (!rate_error.empty()) j["rate_error"] = rate_error;
        out << j.dump(2) << "\n";
      } else {
        out << "benchmark      " << bench_name << " (m1=" << m1 << ", m2=" << m2 << ")\n"
            << "mu             " << format_double(c.mu) << (c.a_singular ? "  (A singular)" : "")
            << "\n"
            << "||A||          " << format_double(c.norm_A) << "\n"
            << "||Sigma_A||    " << format_double(c.norm_SigmaA) << "\n"
            << "||Sigma_b||    " << format_double(c.norm_Sigmab) << "\n"
            << "L1             " << format_double(c.L1) << "\n"
            << "L2             " << format_double(c.L2) << "\n"
            << "L              " << format_double(c.L) << "\n"
            << "lambda         " << format_double(c.lambda) << "\n"
            << "sigma^2        " << format_double(c.sigma2) << "\n"
            << "sigma_v^2 <=   " << format_double(c.sigma_v2) << "  (at the TD solution)\n"
            << "L_max          " << format_double(c.L_max) << "\n"
            << "alpha          " << format_double(a) << "\n";
        if (rate) {
          out << "q              " << format_double(rate->q) << "\n"
              << "bias           " << format_double(rate->bias) << "\n";
          if (!rate->note.empty()) out << "note           " << rate->note << "\n";
        } else {
          out << "rate           unavailable: " << rate_error << "\n";
        }
        if (threshold) {
          out << "batch needed   " << threshold->exact << " (closed form " << threshold->sufficient
              << ")\n";
        }
      }
      return rate ? kExitOk : kExitUsage;
    }
    if (*verify) {
      bool ok = true;
      auto report = [&](const CheckResult& r) {
        out << format_check(r) << std::endl;
        ok = ok && r.passed;
      };
      for (const auto& check : oracle_checks()) report(check());
      if (verify_all) {
        for (const auto& check : experiment_checks(verify_jobs)) report(check());
      }
      return ok ? kExitOk : kExitFailure;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace gtdlab
