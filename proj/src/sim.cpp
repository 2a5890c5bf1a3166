#include "riskmppi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>

#include "riskmppi/error.hpp"

namespace riskmppi::sim {

namespace {

constexpr double kTimeEps = 1e-9;

double signed_obstacle_distance(const env::Course& course, const Vec3& p) {
  if (course.obstacles.empty())
    return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const env::Obstacle& o : course.obstacles)
    best = std::min(best, env::distance_to_surface(o, p));
  return best;
}

// Normalized arc length along the closed goal polyline. Leg i runs from
// goals[i-1] (cyclically) to goals[i]; the active goal index selects the leg.
class ProgressMap {
 public:
  explicit ProgressMap(const env::Course& course) : goals_(course.goals) {
    const std::size_t n = goals_.size();
    cum_before_.resize(n, 0.0);
    lengths_.resize(n, 0.0);
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& from = goals_[(i + n - 1) % n];
      cum_before_[i] = cum;
      lengths_[i] = distance(from, goals_[i]);
      cum += lengths_[i];
    }
    total_ = cum;
  }

  double raw(const Vec3& p, int active) const {
    if (total_ <= 0.0) return 0.0;
    const std::size_t n = goals_.size();
    const Vec3& from = goals_[(static_cast<std::size_t>(active) + n - 1) % n];
    const Vec3& to = goals_[static_cast<std::size_t>(active)];
    const double len = lengths_[static_cast<std::size_t>(active)];
    double along = 0.0;
    if (len > 0.0) {
      const Vec3 u = (to - from) * (1.0 / len);
      along = std::clamp((p - from).dot(u), 0.0, len);
    }
    return (cum_before_[static_cast<std::size_t>(active)] + along) / total_;
  }

 private:
  std::vector<Vec3> goals_;
  std::vector<double> cum_before_;
  std::vector<double> lengths_;
  double total_ = 0.0;
};

}  // namespace

PlantState plant_step(const PlantState& state, const CommandPoint& command,
                      const PlantConfig& config, GaussianStream& rng) {
  if (!(config.dt_sim > 0.0) || !(config.kp > 0.0) || !(config.kd > 0.0))
    throw Error("config", "plant needs positive kp, kd and dt_sim");
  // Partial feedforward: the realized thrust mapping undershoots the
  // commanded acceleration, so tracking lag grows with command aggressiveness.
  const Vec3 noise = rng.next_vec3() * config.accel_noise_std;
  Vec3 a = command.acceleration * config.ff_gain +
           (command.position - state.position) * config.kp +
           (command.velocity - state.velocity) * config.kd + noise;
  const double mag = a.norm();
  if (mag > config.a_sat) a = a * (config.a_sat / mag);
  PlantState next;
  next.velocity = state.velocity + a * config.dt_sim;
  next.position = state.position + next.velocity * config.dt_sim;
  return next;
}

std::vector<TrajectorySpec> random_trajectory_specs(int n,
                                                    std::uint64_t seed) {
  std::vector<TrajectorySpec> specs;
  specs.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const auto id = static_cast<std::uint32_t>(i);
    auto u = [&](std::uint32_t field) {
      return uniform_draw(seed, kStreamSpecGen, id, field, 0);
    };
    const double heading = 2.0 * M_PI * u(0);
    // kinks harder than any course corner: the fitted line then bounds the
    // turning lag the planner will actually see, with margin
    const double kink = (2.0 * u(1) - 1.0) * 2.6;
    const double scale = u(2) * u(2);  // more mass at the slow end
    const double d1 = 0.25 + scale * 5.75 * u(3);
    const double d2 = 0.25 + scale * 5.75 * (1.0 - 0.5 * u(3));
    const double z1 = (2.0 * u(4) - 1.0) * 0.3;
    const double z2 = (2.0 * u(5) - 1.0) * 0.3;
    const double v0 = u(6) * std::min(2.5, 0.4 * (d1 + d2));

    const Vec3 dir1{std::cos(heading), std::sin(heading), 0.0};
    const Vec3 dir2{std::cos(heading + kink), std::sin(heading + kink), 0.0};

    TrajectorySpec spec;
    spec.start.position = {0.0, 0.0, 1.0};
    spec.start.velocity = dir1 * v0;
    spec.start.acceleration = {};
    spec.waypoints.r1 = spec.start.position + dir1 * d1 + Vec3{0, 0, z1};
    spec.waypoints.r2 = spec.waypoints.r1 + dir2 * d2 + Vec3{0, 0, z2};
    specs.push_back(spec);
  }
  return specs;
}

std::vector<TrackingRun> collect_tracking_data(
    const PlantConfig& plant_config, std::span<const TrajectorySpec> specs,
    double T, double dt) {
  if (specs.empty()) throw Error("usage", "no trajectory specs to collect");
  const auto terminal = minjerk::safety_terminal();
  const long total_steps = std::lround(2.0 * T / plant_config.dt_sim);
  const long stride = std::max(1L, std::lround(dt / plant_config.dt_sim));

  std::vector<TrackingRun> runs;
  runs.reserve(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const TrajectorySpec& spec = specs[k];
    const auto traj =
        minjerk::solve_two_segment(spec.start, spec.waypoints, terminal, T);
    PlantState plant{spec.start.position, spec.start.velocity};
    GaussianStream noise(plant_config.seed, kStreamPlantNoise,
                         static_cast<std::uint32_t>(k));

    TrackingRun run;
    run.traj_id = static_cast<int>(k);
    for (long step = 0; step <= total_steps; ++step) {
      const double t =
          std::min(step * plant_config.dt_sim, traj.horizon());
      const auto s = minjerk::eval(traj, t);
      if (step % stride == 0) {
        run.commanded.points.push_back(s.position);
        run.commanded.timestamps.push_back(t);
        run.actual.points.push_back(plant.position);
        run.actual.timestamps.push_back(t);
      }
      if (step == total_steps) break;
      plant = plant_step(plant, {s.position, s.velocity, s.acceleration},
                         plant_config, noise);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

RunRecord run_receding_horizon(const env::Course& course,
                               const mppi::MppiConfig& mppi_config,
                               const mppi::CostWeights& weights,
                               const risk::RiskModel* model,
                               const PlantConfig& plant_config,
                               const RunOptions& options) {
  if (options.n_laps <= 0 && options.duration <= 0.0)
    throw Error("config", "run needs n_laps or duration");
  if (!(options.replan_period > 0.0))
    throw Error("config", "replan period must be positive");

  RunRecord rec;
  PlantState plant{course.start.position, course.start.velocity};
  env::GoalTracker tracker;
  Vec3 goal = course.goals[0];
  GaussianStream noise(plant_config.seed, kStreamPlantNoise, 0);
  const ProgressMap progress(course);

  std::optional<minjerk::TwoSegmentTrajectory> traj;
  double t_plan = 0.0;
  double plan_vmax = 0.0;
  int replan_count = 0;
  double next_replan = 0.0;
  WaypointPair last_waypoints;
  Vec3 last_goal{1e30, 1e30, 1e30};

  std::vector<char> inside_prev(course.obstacles.size(), 0);
  const long stride =
      std::max(1L, std::lround(minjerk::kDefaultDt / plant_config.dt_sim));
  double lap_start = 0.0;
  double progress_runmax = 0.0;

  long step = 0;
  double t = 0.0;

  auto command_at = [&](double now) -> CommandPoint {
    if (!traj) {
      return {plant.position, Vec3{}, Vec3{}};
    }
    const double rel = std::clamp(now - t_plan, 0.0, traj->horizon());
    const auto s = minjerk::eval(*traj, rel);
    return {s.position, s.velocity, s.acceleration};
  };

  auto record_row = [&](double now) {
    const CommandPoint cmd = command_at(now);
    const double raw = progress.raw(plant.position, tracker.active_index);
    progress_runmax = std::max(progress_runmax, raw);
    bool inside_any = false;
    for (const env::Obstacle& o : course.obstacles)
      if (env::contains(o, plant.position)) {
        inside_any = true;
        break;
      }
    RunRow row;
    row.t = now;
    row.cmd_pos = cmd.position;
    row.act_pos = plant.position;
    row.cmd_speed = cmd.velocity.norm();
    row.plan_vmax = plan_vmax;
    row.dist_obs = signed_obstacle_distance(course, plant.position);
    row.progress = progress_runmax;
    row.collision = inside_any;
    rec.rows.push_back(row);
  };

  while (true) {
    const bool laps_done =
        options.n_laps > 0 && tracker.laps_completed >= options.n_laps;
    const bool duration_done =
        options.duration > 0.0 && t >= options.duration - kTimeEps;
    const bool capped = t >= options.max_duration - kTimeEps;

    // replanning schedule (sim time)
    if (!laps_done && !duration_done && !capped && t >= next_replan - kTimeEps) {
      const bool planner_failed =
          options.fail_planner_at >= 0.0 && t >= options.fail_planner_at - kTimeEps;
      if (!planner_failed) {
        BoundaryState bstate;
        bstate.position = plant.position;
        if (traj) {
          const auto s = minjerk::eval(
              *traj, std::clamp(t - t_plan, 0.0, traj->horizon()));
          bstate.velocity = options.replan_velocity_from_plant
                                ? plant.velocity
                                : s.velocity;
          bstate.acceleration = s.acceleration;
        } else {
          bstate.velocity = plant.velocity;
          bstate.acceleration = course.start.acceleration;
        }

        // Warm start: re-seed toward a fresh goal, otherwise time-shift the
        // previous solution (r1 where it would be one segment later).
        WaypointPair warm;
        const bool goal_changed =
            distance(goal, last_goal) > 1e-12 || !traj;
        if (goal_changed) {
          warm = mppi::default_warm_start(bstate.position, goal);
        } else {
          const auto ahead = minjerk::eval(
              *traj, std::clamp(t - t_plan + mppi_config.T, 0.0,
                                traj->horizon()));
          warm = {ahead.position, last_waypoints.r2};
        }

        mppi::MppiConfig cfg = mppi_config;
        cfg.seed = mppi_config.seed +
                   0x9E3779B97F4A7C15ULL *
                       static_cast<std::uint64_t>(replan_count + 1);
        const auto sol = mppi::solve(bstate, course, goal, warm, cfg, weights,
                                     model, options.workers);
        ++replan_count;
        rec.replan_durations.push_back(sol.elapsed);

        // Execute the new plan only if it is predicted collision-free;
        // otherwise keep following the current one, which ends in a safety
        // stop if it is never replaced.
        auto candidate = minjerk::solve_two_segment(
            bstate, sol.waypoints, minjerk::safety_terminal(), cfg.T);
        const auto breakdown = mppi::cost_breakdown(candidate, course, goal,
                                                    weights, model, cfg.dt);
        if (breakdown.obstacle == 0.0) {
          traj = std::move(candidate);
          t_plan = t;
          plan_vmax = minjerk::max_speed(*traj, cfg.dt);
          last_waypoints = sol.waypoints;
          rec.plans.push_back({t, sol.waypoints, plan_vmax, sol.elapsed});
        }
        last_goal = goal;
      }
      next_replan += options.replan_period;
    }

    if (step % stride == 0) record_row(t);
    if (laps_done || duration_done || capped) break;

    // advance the plant one sim step
    const CommandPoint cmd = command_at(t);
    plant = plant_step(plant, cmd, plant_config, noise);
    ++step;
    t = static_cast<double>(step) * plant_config.dt_sim;

    // collision entry events, per obstacle
    for (std::size_t j = 0; j < course.obstacles.size(); ++j) {
      const bool in = env::contains(course.obstacles[j], plant.position);
      if (in && !inside_prev[j])
        rec.collisions.push_back({t, plant.position, static_cast<int>(j)});
      inside_prev[j] = in ? 1 : 0;
    }

    // goal switching and lap accounting
    const auto adv = env::advance_goal(tracker, course, plant.position);
    goal = adv.goal;
    if (adv.lap_event) {
      rec.lap_times.push_back(t - lap_start);
      lap_start = t;
      progress_runmax = 0.0;
    }
  }

  rec.laps_completed = tracker.laps_completed;
  return rec;
}

RegionStats region_stats(const RunRecord& record, const RegionSpec& region) {
  RegionStats stats;
  stats.name = region.name;
  double sum_vmax = 0.0, sum_speed = 0.0;
  for (const RunRow& row : record.rows) {
    const double dx = row.act_pos.x - region.cx;
    const double dy = row.act_pos.y - region.cy;
    if (dx * dx + dy * dy > region.radius * region.radius) continue;
    ++stats.samples;
    sum_vmax += row.plan_vmax;
    sum_speed += row.cmd_speed;
    stats.max_cmd_speed = std::max(stats.max_cmd_speed, row.cmd_speed);
  }
  if (stats.samples > 0) {
    stats.mean_plan_vmax = sum_vmax / stats.samples;
    stats.mean_cmd_speed = sum_speed / stats.samples;
  }
  return stats;
}

LapSummary run_laps(const env::Course& course, int n_laps, bool risk_enabled,
                    const mppi::MppiConfig& mppi_config,
                    const mppi::CostWeights& weights,
                    const risk::RiskModel* model,
                    const PlantConfig& plant_config,
                    const RunOptions& base_options,
                    std::span<const RegionSpec> regions) {
  if (risk_enabled && model == nullptr)
    throw Error("config", "risk enabled but no risk model provided");
  RunOptions options = base_options;
  options.n_laps = n_laps;

  LapSummary summary;
  summary.record = run_receding_horizon(course, mppi_config, weights,
                                        risk_enabled ? model : nullptr,
                                        plant_config, options);
  const RunRecord& rec = summary.record;
  summary.collision_count = static_cast<int>(rec.collisions.size());
  summary.laps = rec.laps_completed;
  summary.lap_times = rec.lap_times;
  if (!rec.replan_durations.empty()) {
    double s = 0.0;
    for (const double d : rec.replan_durations) s += d;
    summary.mean_replan_s = s / static_cast<double>(rec.replan_durations.size());
  }
  if (!rec.rows.empty()) {
    double s = 0.0;
    for (const RunRow& row : rec.rows) {
      s += row.cmd_speed;
      summary.max_cmd_speed = std::max(summary.max_cmd_speed, row.cmd_speed);
    }
    summary.mean_cmd_speed = s / static_cast<double>(rec.rows.size());
  }
  for (const RegionSpec& region : regions)
    summary.regions.push_back(region_stats(rec, region));
  return summary;
}

void write_run_csv(std::ostream& os, const RunRecord& record) {
  os << "t,cmd_x,cmd_y,cmd_z,act_x,act_y,act_z,cmd_speed,dist_obs,progress,"
        "collision\n";
  char buf[360];
  for (const RunRow& r : record.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6g,%.6f,%d\n",
                  r.t, r.cmd_pos.x, r.cmd_pos.y, r.cmd_pos.z, r.act_pos.x,
                  r.act_pos.y, r.act_pos.z, r.cmd_speed, r.dist_obs,
                  r.progress, r.collision ? 1 : 0);
    os << buf;
  }
}

void write_summary(std::ostream& os, const LapSummary& summary) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "collisions=%d\nlaps=%d\nmean_replan_s=%.6g\n",
                summary.collision_count, summary.laps, summary.mean_replan_s);
  os << buf;
  std::snprintf(buf, sizeof(buf), "mean_cmd_speed=%.6g\nmax_cmd_speed=%.6g\n",
                summary.mean_cmd_speed, summary.max_cmd_speed);
  os << buf;
  for (std::size_t i = 0; i < summary.lap_times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "lap_%zu_s=%.6g\n", i + 1,
                  summary.lap_times[i]);
    os << buf;
  }
  for (const RegionStats& r : summary.regions) {
    std::snprintf(buf, sizeof(buf),
                  "region_%s_samples=%d\nregion_%s_mean_plan_vmax=%.6g\n"
                  "region_%s_mean_cmd_speed=%.6g\n",
                  r.name.c_str(), r.samples, r.name.c_str(), r.mean_plan_vmax,
                  r.name.c_str(), r.mean_cmd_speed);
    os << buf;
  }
}

void write_dist_vs_progress(std::ostream& os, const RunRecord& record) {
  os << "progress,dist_obs\n";
  char buf[96];
  for (const RunRow& r : record.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6g\n", r.progress, r.dist_obs);
    os << buf;
  }
}

void write_speed_profile(std::ostream& os, const RunRecord& record) {
  os << "x,y,cmd_speed\n";
  char buf[128];
  for (const RunRow& r : record.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f\n", r.act_pos.x,
                  r.act_pos.y, r.cmd_speed);
    os << buf;
  }
}

}  // namespace riskmppi::sim
