// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Heavy end-to-end criteria reuse one collect->fit->run
// pipeline, the same wiring the CLI exposes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "riskmppi/environment.hpp"
#include "riskmppi/minjerk.hpp"
#include "riskmppi/mppi.hpp"
#include "riskmppi/risk.hpp"
#include "riskmppi/sim.hpp"

namespace fs = std::filesystem;
using namespace riskmppi;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double axis_value(const Vec3& v, int axis) {
  return axis == 0 ? v.x : axis == 1 ? v.y : v.z;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const fs::path out_file = "acceptance_work/cli_out.txt";
  const std::string cmd = std::string(RISKMPPI_CLI_BIN) + " " + args + " > " +
                          out_file.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (out != nullptr) *out = slurp(out_file);
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string kv(const std::string& text, const std::string& key) {
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

env::Course bench_fixture() {
  env::Course c;
  c.start.position = {0, 0, 1};
  c.goals.push_back({6, 0.5, 1});
  c.obstacles.push_back(env::Obstacle::cylinder(2.5, 0.4, 0.5));
  c.obstacles.push_back(env::Obstacle::box(4.0, -0.8, 0.6, 0.6));
  return c;
}

// ---- criterion 1: min-jerk correctness ----
void criterion_1() {
  const double t0 = now_seconds();
  oracles::TestRng rng(101);
  double worst_residual = 0.0;
  double worst_fd = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto rv = [&] {
      return Vec3{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    };
    const BoundaryState start{rv(), rv(), rv()};
    const WaypointPair wps{rv(), rv()};
    const Vec3 ve = rv(), ae = rv();
    const double T = rng.uniform(0.5, 5.0);
    const auto traj = minjerk::solve_two_segment(start, wps, ve, ae, T);

    for (int axis = 0; axis < 3; ++axis) {
      std::array<double, 12> u{};
      for (int j = 0; j < 6; ++j) {
        u[j] = traj.coeffs[axis][0][j];
        u[6 + j] = traj.coeffs[axis][1][j];
      }
      worst_residual = std::max(
          worst_residual,
          oracles::minjerk_axis_residual(
              u, axis_value(start.position, axis), axis_value(start.velocity, axis),
              axis_value(start.acceleration, axis), axis_value(wps.r1, axis),
              axis_value(wps.r2, axis), axis_value(ve, axis),
              axis_value(ae, axis), T));
    }

    // derivative check away from the jerk step at t = T
    const double h = 1e-4;
    for (int k = 0; k < 2; ++k) {
      const double t = k == 0 ? rng.uniform(h, T - 5 * h)
                              : rng.uniform(T + 5 * h, 2 * T - h);
      const auto mid = minjerk::eval(traj, t);
      const auto lo = minjerk::eval(traj, t - h);
      const auto hi = minjerk::eval(traj, t + h);
      const Vec3 fd_vel = (hi.position - lo.position) * (1.0 / (2 * h));
      const double rel = distance(fd_vel, mid.velocity) /
                         std::max(mid.velocity.norm(), 1.0);
      worst_fd = std::max(worst_fd, rel);
    }
  }
  const double elapsed = now_seconds() - t0;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "max residual %.2e <= 1e-9, max FD error %.2e <= 1e-5, %.2f s "
                "< 5 s",
                worst_residual, worst_fd, elapsed);
  report(1, "min-jerk correctness on 1000 random instances",
         worst_residual <= 1e-9 && worst_fd <= 1e-5 && elapsed < 5.0, detail);
}

// ---- criterion 2: Hausdorff oracle equivalence ----
void criterion_2() {
  oracles::TestRng rng(202);
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    SampledPath a, b;
    const int na = 30 + trial % 40;
    const int nb = 25 + trial % 35;
    Vec3 pa{rng.uniform(-3, 3), rng.uniform(-3, 3), 1};
    Vec3 pb{rng.uniform(-3, 3), rng.uniform(-3, 3), 1};
    for (int i = 0; i < na; ++i) {
      pa += {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0};
      a.points.push_back(pa);
      a.timestamps.push_back(0.02 * i);
    }
    for (int i = 0; i < nb; ++i) {
      pb += {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0};
      b.points.push_back(pb);
      b.timestamps.push_back(0.02 * i);
    }
    const double got = risk::hausdorff_distance(a, b);
    ok = ok && got == oracles::hausdorff_brute_force(a, b);
    ok = ok && risk::hausdorff_distance(b, a) == got;
    ok = ok && risk::hausdorff_distance(a, a) == 0.0;
  }
  report(2, "Hausdorff equals brute force on 100 pairs", ok,
         ok ? "exact match, symmetric, zero on identity"
            : "mismatch against the double-loop oracle");
}

// ---- criterion 3: risk measure ----
void criterion_3() {
  bool ok = risk::risk_measure(0.4, 0.2) == 1.0;
  oracles::TestRng rng(303);
  for (int trial = 0; trial < 10000 && ok; ++trial) {
    const double dhat = rng.uniform(0, 2);
    const double dobs = rng.uniform(0, 2);
    const double rho = risk::risk_measure(dhat, dobs);
    const bool zero_expected = std::max(dobs, 1e-3) >= dhat;
    ok = ok && rho >= 0.0;
    ok = ok && ((rho == 0.0) == zero_expected);
    ok = ok && risk::risk_measure(dhat + 0.05, dobs) >= rho;
    ok = ok && risk::risk_measure(dhat, dobs + 0.05) <= rho;
  }
  report(3, "risk measure axioms over 1e4 pairs", ok,
         ok ? "rho(0.4,0.2)=1, zero iff clamped d_obs >= d_hat, monotone"
            : "risk measure property violated");
}

// ---- criterion 4: quantile fit coverage ----
void criterion_4() {
  const double t0 = now_seconds();
  oracles::TestRng rng(404);
  bool ok = true;
  std::string worst;
  for (int scenario = 0; scenario < 3; ++scenario) {
    std::vector<risk::TrackingSample> samples;
    for (int i = 0; i < 500; ++i) {
      const double v = rng.uniform(0.2, 4.0);
      double noise = 0.0;
      if (scenario == 0) noise = std::fabs(rng.normal()) * 0.03;
      if (scenario == 1) noise = rng.uniform(0, 0.08);
      if (scenario == 2) noise = std::fabs(rng.normal()) * 0.01 * (1 + v);
      samples.push_back({v, 0.02 + 0.05 * v + noise});
    }
    const auto model = risk::fit_risk_model(samples, 0.95);
    const double cov = risk::coverage_fraction(model, samples);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "scenario %d coverage %.3f", scenario, cov);
    worst = buf;
    ok = ok && cov >= 0.92 && cov <= 0.98 && model.slope >= 0.0;
    if (!ok) break;
  }
  const double elapsed = now_seconds() - t0;
  char detail[160];
  std::snprintf(detail, sizeof(detail), "%s, in [0.92, 0.98], %.2f s < 10 s",
                worst.c_str(), elapsed);
  report(4, "quantile fit coverage on 500-sample logs",
         ok && elapsed < 10.0, detail);
}

// shared pipeline artifacts
struct Pipeline {
  std::vector<risk::TrackingSample> samples;
  risk::RiskModel model;
  double spearman = 0.0;
};

// ---- criterion 5: tracking-error trend ----
Pipeline criterion_5() {
  Pipeline p;
  const auto specs = sim::random_trajectory_specs(200, 7);
  sim::PlantConfig plant;
  plant.seed = 7;
  const auto runs = sim::collect_tracking_data(plant, specs);
  std::vector<double> v, d;
  for (const auto& run : runs) {
    const auto s = risk::summarize_log(run.commanded, run.actual);
    p.samples.push_back(s);
    v.push_back(s.v_max);
    d.push_back(s.d_h);
  }
  p.spearman = oracles::spearman(v, d);
  p.model = risk::fit_risk_model(p.samples, 0.95);
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "Spearman %.3f > 0.5 over 200 runs; fitted d_hat = %.3f + "
                "%.3f v",
                p.spearman, p.model.intercept, p.model.slope);
  report(5, "tracking error grows with commanded speed", p.spearman > 0.5,
         detail);
  return p;
}

// ---- criteria 6 + 7: collision comparison and speed adaptation ----
void criteria_6_7(const Pipeline& pipeline) {
  const double t0 = now_seconds();
  const auto course = env::load_course_file(std::string(RISKMPPI_COURSE_DIR) +
                                            "/loop_gap.course");
  mppi::MppiConfig cfg;  // stock planner settings: N = 50, n_iter = 200
  cfg.seed = 1;
  const mppi::CostWeights weights;
  sim::PlantConfig plant;
  plant.seed = 1;
  const std::vector<sim::RegionSpec> regions{{"gap", 5.0, 6.1, 0.5},
                                             {"corridor", 5.0, 1.4, 1.0}};

  const auto with_risk = sim::run_laps(course, 20, true, cfg, weights,
                                       &pipeline.model, plant, {}, regions);
  const auto no_risk = sim::run_laps(course, 20, false, cfg, weights, nullptr,
                                     plant, {}, regions);
  const double elapsed = now_seconds() - t0;

  char detail6[200];
  std::snprintf(detail6, sizeof(detail6),
                "risk on: %d collisions (want 0), risk off: %d (want >= 1), "
                "%d+%d laps, %.0f s < 600 s",
                with_risk.collision_count, no_risk.collision_count,
                with_risk.laps, no_risk.laps, elapsed);
  report(6, "20-lap collision comparison on the gap course",
         with_risk.collision_count == 0 && no_risk.collision_count >= 1 &&
             with_risk.laps == 20 && no_risk.laps == 20 && elapsed < 600.0,
         detail6);

  const double gap_on = with_risk.regions[0].mean_plan_vmax;
  const double corr_on = with_risk.regions[1].mean_plan_vmax;
  const double corr_off = no_risk.regions[1].mean_plan_vmax;
  const bool slow_at_gap = gap_on <= 0.8 * corr_on;
  const bool fast_in_corridor = std::fabs(corr_on - corr_off) <= 0.15 * corr_off;
  char detail7[200];
  std::snprintf(detail7, sizeof(detail7),
                "commanded v_max: gap %.2f vs corridor %.2f (ratio %.2f <= "
                "0.8); corridor on/off %.2f/%.2f (delta %.1f%% <= 15%%)",
                gap_on, corr_on, corr_on > 0 ? gap_on / corr_on : 0.0, corr_on,
                corr_off,
                corr_off > 0 ? 100.0 * std::fabs(corr_on - corr_off) / corr_off
                             : 0.0);
  report(7, "slows near the gap, full speed in the open",
         slow_at_gap && fast_in_corridor, detail7);
}

// ---- criterion 8: solver timing ----
void criterion_8() {
  std::string out;
  const int rc = run_cli("bench --seed 3", &out);
  const std::string mean_str = kv(out, "mean_solve_s");
  const double mean = mean_str.empty() ? 1e9 : std::stod(mean_str);
  const double iter_sum = kv(out, "mean_iter_sum_s").empty()
                              ? 0.0
                              : std::stod(kv(out, "mean_iter_sum_s"));
  const bool breakdown_ok =
      mean > 0.0 && std::fabs(iter_sum - mean) <= 0.05 * mean;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "mean %.3f s < 1.0 s at N=50, n_iter=200; iteration breakdown "
                "sums to %.3f s (within 5%%)",
                mean, iter_sum);
  report(8, "cmd_bench solve time", rc == 0 && mean < 1.0 && breakdown_ok,
         detail);
}

// ---- criterion 9: optimizer properties ----
void criterion_9() {
  oracles::TestRng rng(909);
  bool ok = true;
  std::string why = "all properties hold";

  // normalization and shift invariance at N = 1000 (costs quantized so the
  // +1e6 shift is exactly representable)
  std::vector<double> costs, shifted;
  for (int i = 0; i < 1000; ++i)
    costs.push_back(std::ldexp(std::round(std::ldexp(rng.uniform(0, 1e4), 16)), -16));
  for (const double c : costs) shifted.push_back(c + 1e6);
  const auto w0 = mppi::compute_weights(costs, 1.0);
  const auto w1 = mppi::compute_weights(shifted, 1.0);
  double sum = 0.0;
  double max_dw = 0.0;
  for (std::size_t i = 0; i < w0.size(); ++i) {
    sum += w0[i];
    max_dw = std::max(max_dw, std::fabs(w0[i] - w1[i]));
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    ok = false;
    why = "weight normalization off";
  }
  if (max_dw > 1e-12) {
    ok = false;
    why = "additive shift changed weights";
  }

  // zero-variance fixed point, exact
  const auto course = bench_fixture();
  BoundaryState start = course.start;
  mppi::MppiConfig cfg;
  cfg.sigma_x = cfg.sigma_y = 0.0;
  cfg.n_samples = 10;
  cfg.n_iter = 5;
  const auto warm = mppi::default_warm_start(start.position, course.goals[0]);
  const auto fixed = mppi::solve(start, course, course.goals[0], warm, cfg,
                                 mppi::CostWeights{}, nullptr);
  if (fixed.waypoints.r1.x != warm.r1.x || fixed.waypoints.r2.y != warm.r2.y) {
    ok = false;
    why = "sigma=0 moved the waypoints";
  }

  // statistical cost decrease over 50 seeds
  const risk::RiskModel model{0.05, 0.1, 0.95};
  int improved = 0;
  std::vector<double> initial, final_;
  for (int s = 0; s < 50; ++s) {
    mppi::MppiConfig c2;
    c2.n_samples = 50;
    c2.n_iter = 60;
    c2.seed = 1000 + static_cast<std::uint64_t>(s);
    const auto sol = mppi::solve(start, course, course.goals[0], warm, c2,
                                 mppi::CostWeights{}, &model);
    if (sol.cost <= sol.cost_trace.front()) ++improved;
    initial.push_back(sol.cost_trace.front());
    final_.push_back(sol.cost);
  }
  std::sort(initial.begin(), initial.end());
  std::sort(final_.begin(), final_.end());
  if (improved < 48) {  // 95% of 50, rounded up
    ok = false;
    why = "cost decreased in fewer than 95% of runs";
  }
  if (final_[25] >= initial[25]) {
    ok = false;
    why = "median final cost did not improve";
  }
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "sum-1 %.1e, shift delta %.1e, sigma-0 fixed, improved %d/50; "
                "%s",
                std::fabs(sum - 1.0), max_dw, improved, why.c_str());
  report(9, "MPPI optimizer properties", ok, detail);
}

// ---- criterion 10: safety-stop fallback ----
void criterion_10() {
  env::Course course;
  course.start.position = {0, 0, 1};
  course.goals.push_back({6, 0, 1});
  mppi::MppiConfig cfg;
  cfg.n_samples = 50;
  cfg.n_iter = 100;
  cfg.seed = 4;
  sim::PlantConfig plant;
  plant.accel_noise_std = 0.0;  // isolates the fallback semantics
  sim::RunOptions opts;
  opts.fail_planner_at = 0.5;
  opts.duration = 9.0;
  const auto rec = sim::run_receding_horizon(course, cfg, mppi::CostWeights{},
                                             nullptr, plant, opts);
  const auto& rows = rec.rows;
  const double final_speed =
      distance(rows[rows.size() - 1].act_pos, rows[rows.size() - 2].act_pos) /
      0.02;
  const double stop_error =
      rec.plans.empty()
          ? 1e9
          : distance(rows.back().act_pos, rec.plans.back().waypoints.r2);
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "final speed %.2e < 1e-2 m/s, stop error %.3f m < 0.1 m, "
                "plans=%zu",
                final_speed, stop_error, rec.plans.size());
  report(10, "planner failure falls back to the safety stop",
         rec.plans.size() == 1 && final_speed < 1e-2 && stop_error < 0.1,
         detail);
}

// ---- criterion 11: determinism across reruns and worker counts ----
void criterion_11() {
  bool ok = true;
  std::string why = "library and CLI outputs identical";

  const auto course = bench_fixture();
  BoundaryState start = course.start;
  mppi::MppiConfig cfg;
  cfg.n_samples = 50;
  cfg.n_iter = 30;
  cfg.seed = 11;
  const risk::RiskModel model{0.05, 0.1, 0.95};
  const auto warm = mppi::default_warm_start(start.position, course.goals[0]);
  const auto one = mppi::solve(start, course, course.goals[0], warm, cfg,
                               mppi::CostWeights{}, &model, 1);
  const auto four = mppi::solve(start, course, course.goals[0], warm, cfg,
                                mppi::CostWeights{}, &model, 4);
  if (one.waypoints.r1.x != four.waypoints.r1.x ||
      one.waypoints.r1.y != four.waypoints.r1.y ||
      one.waypoints.r2.x != four.waypoints.r2.x ||
      one.waypoints.r2.y != four.waypoints.r2.y) {
    ok = false;
    why = "solve differs across worker counts";
  }

  fs::create_directories("acceptance_work");
  std::ofstream("acceptance_work/mini.course")
      << "start 0 0 1 0 0 0\ngoal 2 0.5 1\n";
  const std::string base =
      "laps --course acceptance_work/mini.course --no-risk --laps 1 "
      "--n-samples 8 --n-iter 10 --seed 5 --out ";
  setenv("RISKMPPI_THREADS", "1", 1);
  const int rc1 = run_cli(base + "acceptance_work/t1");
  setenv("RISKMPPI_THREADS", "4", 1);
  const int rc4 = run_cli(base + "acceptance_work/t4");
  unsetenv("RISKMPPI_THREADS");
  if (rc1 != 0 || rc4 != 0 ||
      slurp("acceptance_work/t1/run.csv") !=
          slurp("acceptance_work/t4/run.csv")) {
    ok = false;
    why = "laps output differs across RISKMPPI_THREADS";
  }

  const int ca = run_cli("collect --n 10 --seed 9 --out acceptance_work/c1");
  const int cb = run_cli("collect --n 10 --seed 9 --out acceptance_work/c2");
  if (ca != 0 || cb != 0 ||
      slurp("acceptance_work/c1/tracking_raw.csv") !=
          slurp("acceptance_work/c2/tracking_raw.csv")) {
    ok = false;
    why = "collect rerun not byte-identical";
  }
  report(11, "determinism under fixed seed and RISKMPPI_THREADS in {1,4}", ok,
         why);
}

}  // namespace

int main() {
  fs::remove_all("acceptance_work");
  fs::create_directories("acceptance_work");

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  const auto pipeline = criterion_5();
  criteria_6_7(pipeline);
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();

  std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures;
}
