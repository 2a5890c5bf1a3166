// riskmppi: risk-aware receding-horizon motion planning at desk scale.
// Pipeline: collect tracking data -> fit the risk model -> run laps.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "riskmppi/error.hpp"
#include "riskmppi/environment.hpp"
#include "riskmppi/minjerk.hpp"
#include "riskmppi/mppi.hpp"
#include "riskmppi/risk.hpp"
#include "riskmppi/sim.hpp"

namespace fs = std::filesystem;
using riskmppi::Error;

namespace {

struct Options {
  // shared
  std::uint64_t seed = 0;
  double T = 2.5;
  std::string out = ".";
  std::string config;
  // collect
  int n = 200;
  // fit
  std::string summary;
  double q = 0.95;
  std::string fit_out = "risk_model.txt";
  // laps / bench
  std::string course;
  bool risk = true;
  std::string risk_model;
  int laps = 20;
  int n_samples = 50;
  int n_iter = 200;
  double sigma = 0.15;
  double beta = 1.0;
  double w_g = 10.0;
  double w_obs = 1e4;
  double w_rho = 100.0;
  double w_ct = 1e3;
  double fail_planner_at = -1.0;
};

// Config files use the same line-oriented key-value format as course files.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;
    if (!(ls >> value) || (ls >> extra))
      throw Error("parse", "config line " + std::to_string(line_no) +
                               ": expected 'key value'");
    kv[key] = value;
  }
  return kv;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

bool truthy(const std::string& v) {
  return v == "1" || v == "true" || v == "yes" || v == "on";
}

// Precedence: command-line flag > config file > built-in default. Config
// entries are injected as flags right after the subcommand, only for flags
// the user did not pass.
std::vector<std::string> merge_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty() || args.empty()) return args;

  std::vector<std::string> injected;
  for (const auto& [raw_key, value] : load_config(config_path)) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (key == "risk") {
      if (!has_flag(args, "--risk") && !has_flag(args, "--no-risk"))
        injected.push_back(truthy(value) ? "--risk" : "--no-risk");
      continue;
    }
    if (!has_flag(args, flag)) injected.push_back(flag + "=" + value);
  }
  std::vector<std::string> merged;
  merged.push_back(args[0]);  // subcommand first
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  return out;
}

riskmppi::mppi::MppiConfig mppi_config(const Options& o) {
  riskmppi::mppi::MppiConfig cfg;
  cfg.n_samples = o.n_samples;
  cfg.n_iter = o.n_iter;
  cfg.sigma_x = cfg.sigma_y = o.sigma;
  cfg.beta = o.beta;
  cfg.seed = o.seed;
  cfg.T = o.T;
  return cfg;
}

riskmppi::mppi::CostWeights cost_weights(const Options& o) {
  riskmppi::mppi::CostWeights w;
  w.w_g = o.w_g;
  w.w_obs = o.w_obs;
  w.w_rho = o.w_rho;
  w.w_ct = o.w_ct;
  return w;
}

int cmd_collect(const Options& o) {
  if (o.n < 1) throw Error("usage", "--n must be >= 1");
  const auto specs = riskmppi::sim::random_trajectory_specs(o.n, o.seed);
  riskmppi::sim::PlantConfig plant;
  plant.seed = o.seed;
  const auto runs =
      riskmppi::sim::collect_tracking_data(plant, specs, o.T);

  fs::create_directories(o.out);
  const fs::path raw_path = fs::path(o.out) / "tracking_raw.csv";
  const fs::path summary_path = fs::path(o.out) / "tracking_summary.csv";
  auto raw = open_out(raw_path);
  auto summary = open_out(summary_path);
  riskmppi::risk::write_tracking_log_header(raw);
  riskmppi::risk::write_tracking_summary_header(summary);
  for (const auto& run : runs) {
    riskmppi::risk::write_tracking_log_rows(raw, run.traj_id, run.commanded,
                                            run.actual);
    const auto sample = riskmppi::risk::summarize_log(run.commanded, run.actual);
    riskmppi::risk::write_tracking_summary_row(summary, run.traj_id, sample);
  }
  std::printf("samples=%d\nraw=%s\nsummary=%s\n", o.n,
              raw_path.string().c_str(), summary_path.string().c_str());
  return 0;
}

int cmd_fit(const Options& o) {
  std::ifstream in(o.summary);
  if (!in) throw Error("io", "cannot open summary file: " + o.summary);
  const auto samples = riskmppi::risk::read_tracking_summary(in);
  const auto model = riskmppi::risk::fit_risk_model(samples, o.q);
  const double coverage = riskmppi::risk::coverage_fraction(model, samples);

  const fs::path out_path(o.fit_out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  auto out = open_out(out_path);
  riskmppi::risk::write_risk_model(out, model);
  std::printf("a=%.12g\nb=%.12g\nq=%.12g\ncoverage=%.6g\nmodel=%s\n",
              model.intercept, model.slope, model.quantile, coverage,
              out_path.string().c_str());
  return 0;
}

int cmd_laps(const Options& o) {
  if (o.laps < 1) throw Error("usage", "--laps must be >= 1");
  const auto course = riskmppi::env::load_course_file(o.course);

  riskmppi::risk::RiskModel model;
  if (o.risk) {
    if (o.risk_model.empty())
      throw Error("config",
                  "risk enabled but no --risk-model given (use --no-risk to "
                  "plan without one)");
    model = riskmppi::risk::read_risk_model_file(o.risk_model);
  }

  riskmppi::sim::PlantConfig plant;
  plant.seed = o.seed;
  riskmppi::sim::RunOptions run_opts;
  run_opts.fail_planner_at = o.fail_planner_at;

  const auto summary = riskmppi::sim::run_laps(
      course, o.laps, o.risk, mppi_config(o), cost_weights(o),
      o.risk ? &model : nullptr, plant, run_opts);

  fs::create_directories(o.out);
  const fs::path dir(o.out);
  {
    auto f = open_out(dir / "run.csv");
    riskmppi::sim::write_run_csv(f, summary.record);
  }
  {
    auto f = open_out(dir / "summary.txt");
    riskmppi::sim::write_summary(f, summary);
  }
  {
    auto f = open_out(dir / "dist_vs_progress.csv");
    riskmppi::sim::write_dist_vs_progress(f, summary.record);
  }
  {
    auto f = open_out(dir / "speed_profile.csv");
    riskmppi::sim::write_speed_profile(f, summary.record);
  }
  std::ostringstream ss;
  riskmppi::sim::write_summary(ss, summary);
  std::fputs(ss.str().c_str(), stdout);
  return 0;
}

int cmd_bench(const Options& o) {
  // Fixture scene: two obstacles between start and goal, model from the
  // shipped defaults, so every cost term is exercised.
  riskmppi::env::Course course;
  course.start.position = {0, 0, 1};
  course.goals.push_back({6, 0.5, 1});
  course.obstacles.push_back(riskmppi::env::Obstacle::cylinder(2.5, 0.4, 0.5));
  course.obstacles.push_back(riskmppi::env::Obstacle::box(4.0, -0.8, 0.6, 0.6));
  const riskmppi::risk::RiskModel model{0.05, 0.1, 0.95};

  riskmppi::BoundaryState start = course.start;
  const auto warm =
      riskmppi::mppi::default_warm_start(start.position, course.goals[0]);

  constexpr int kReps = 20;
  std::vector<double> times;
  std::vector<double> iter_sums;
  double last_r2x = 0.0;
  for (int rep = 0; rep < kReps; ++rep) {
    auto cfg = mppi_config(o);
    cfg.seed = o.seed + static_cast<std::uint64_t>(rep);
    const auto sol =
        riskmppi::mppi::solve(start, course, course.goals[0], warm, cfg,
                              cost_weights(o), &model);
    times.push_back(sol.elapsed);
    double s = 0.0;
    for (const double it : sol.iter_seconds) s += it;
    iter_sums.push_back(s);
    last_r2x = sol.waypoints.r2.x;
  }
  double mean = 0.0;
  for (const double t : times) mean += t;
  mean /= kReps;
  double var = 0.0;
  for (const double t : times) var += (t - mean) * (t - mean);
  const double stddev = std::sqrt(var / (kReps - 1));
  double mean_iter_sum = 0.0;
  for (const double s : iter_sums) mean_iter_sum += s;
  mean_iter_sum /= kReps;

  std::printf(
      "solves=%d\nn_samples=%d\nn_iter=%d\nmean_solve_s=%.6f\n"
      "std_solve_s=%.6f\nmean_iter_sum_s=%.6f\nlast_r2_x=%.9g\n",
      kReps, o.n_samples, o.n_iter, mean, stddev, mean_iter_sum, last_r2x);
  return 0;
}

void add_planner_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--n-samples", o.n_samples, "MPPI samples per iteration");
  cmd->add_option("--n-iter", o.n_iter, "MPPI iterations per solve");
  cmd->add_option("--sigma", o.sigma, "waypoint perturbation std dev (m)");
  cmd->add_option("--beta", o.beta, "inverse temperature");
  cmd->add_option("--T", o.T, "segment duration (s)");
  cmd->add_option("--w-g", o.w_g, "goal weight");
  cmd->add_option("--w-obs", o.w_obs, "obstacle weight");
  cmd->add_option("--w-rho", o.w_rho, "risk weight");
  cmd->add_option("--w-ct", o.w_ct, "constraint weight");
  cmd->add_option("--config", o.config, "config file (key value lines)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"risk-aware receding-horizon motion planner"};
  app.require_subcommand(1);
  Options o;

  auto* collect = app.add_subcommand(
      "collect", "track random trajectories and log commanded vs actual");
  collect->add_option("--n", o.n, "number of trajectories");
  collect->add_option("--seed", o.seed, "random seed");
  collect->add_option("--T", o.T, "segment duration (s)");
  collect->add_option("--out", o.out, "output directory");
  collect->add_option("--config", o.config, "config file");

  auto* fit = app.add_subcommand(
      "fit", "fit the conservative tracking-error line from a summary log");
  fit->add_option("--summary", o.summary, "tracking_summary.csv path")
      ->required();
  fit->add_option("--q", o.q, "quantile to capture");
  fit->add_option("--out", o.fit_out, "risk-model output file");
  fit->add_option("--config", o.config, "config file");

  auto* laps = app.add_subcommand(
      "laps", "run the receding-horizon planner around a course");
  laps->add_option("--course", o.course, "course file")->required();
  laps->add_flag("--risk,!--no-risk", o.risk, "enable the risk cost term");
  laps->add_option("--risk-model", o.risk_model, "fitted risk-model file");
  laps->add_option("--laps", o.laps, "laps to run");
  laps->add_option("--out", o.out, "output directory");
  laps->add_option("--fail-planner-at", o.fail_planner_at,
                   "sim time (s) after which replanning stops");
  add_planner_flags(laps, o);

  auto* bench = app.add_subcommand(
      "bench", "time the planner on a built-in fixture scene");
  add_planner_flags(bench, o);

  try {
    auto args = merge_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (collect->parsed()) return cmd_collect(o);
    if (fit->parsed()) return cmd_fit(o);
    if (laps->parsed()) return cmd_laps(o);
    if (bench->parsed()) return cmd_bench(o);
    throw Error("usage", "no subcommand given");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::fprintf(stderr, "error: usage: %s\n", msg.c_str());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.code().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
}
