#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "riskmppi/mppi.hpp"
#include "riskmppi/philox.hpp"
#include "riskmppi/types.hpp"

// Closed-loop harness: a PD tracking plant standing in for the real
// vehicle + low-level controller, the 1 Hz receding-horizon loop, and the
// tracking-data collection mode used to fit the risk model.

namespace riskmppi::sim {

struct PlantState {
  Vec3 position;
  Vec3 velocity;
};

struct PlantConfig {
  double kp = 6.0;               // s^-2
  double kd = 4.0;               // s^-1
  double ff_gain = 0.0;          // feedforward fraction actually realized
  double a_sat = 4.0;            // m/s^2, magnitude saturation
  double accel_noise_std = 0.3;  // m/s^2 per axis
  double dt_sim = 0.005;         // s
  std::uint64_t seed = 0;
};

struct CommandPoint {
  Vec3 position;
  Vec3 velocity;
  Vec3 acceleration;
};

// One semi-implicit Euler step: feedforward acceleration plus PD feedback
// plus per-axis Gaussian noise, saturated in magnitude.
PlantState plant_step(const PlantState& state, const CommandPoint& command,
                      const PlantConfig& config, GaussianStream& rng);

// ---- tracking-data collection ----

struct TrajectorySpec {
  BoundaryState start;
  WaypointPair waypoints;
};

// Deterministic family of kinked two-waypoint trajectories whose commanded
// max speeds span roughly [0.2, 4] m/s.
std::vector<TrajectorySpec> random_trajectory_specs(int n, std::uint64_t seed);

struct TrackingRun {
  int traj_id = 0;
  SampledPath commanded;
  SampledPath actual;
};

// Track each spec's trajectory over [0, 2T] and log commanded vs actual at
// the sampling step dt.
std::vector<TrackingRun> collect_tracking_data(
    const PlantConfig& plant_config, std::span<const TrajectorySpec> specs,
    double T = 2.5, double dt = minjerk::kDefaultDt);

// ---- receding-horizon runs ----

struct RunOptions {
  int n_laps = 0;          // stop after this many laps (0 = use duration)
  double duration = 0.0;   // s of sim time (0 = until laps)
  double replan_period = 1.0;
  double fail_planner_at = -1.0;  // sim time after which no replans happen
  bool replan_velocity_from_plant = false;
  double max_duration = 1800.0;  // hard cap, s
  int workers = 0;
};

struct RunRow {
  double t = 0.0;
  Vec3 cmd_pos;
  Vec3 act_pos;
  double cmd_speed = 0.0;
  double plan_vmax = 0.0;  // max speed of the active plan
  double dist_obs = 0.0;   // signed distance, actual position to nearest obstacle
  double progress = 0.0;   // [0,1] along the goal loop
  bool collision = false;
};

struct CollisionEvent {
  double t = 0.0;
  Vec3 position;
  int obstacle_index = -1;
};

struct PlanEntry {
  double t = 0.0;
  WaypointPair waypoints;
  double v_max = 0.0;
  double solve_seconds = 0.0;
};

struct RunRecord {
  std::vector<RunRow> rows;
  std::vector<CollisionEvent> collisions;
  int laps_completed = 0;
  std::vector<double> lap_times;
  std::vector<double> replan_durations;
  std::vector<PlanEntry> plans;
};

// Replan at replan_period from the current commanded state (position taken
// from the plant), track the newest plan, record rows at the sampling step.
// model == nullptr plans without the risk term. A collision is recorded when
// the actual position enters an obstacle; the run continues through it.
RunRecord run_receding_horizon(const env::Course& course,
                               const mppi::MppiConfig& mppi_config,
                               const mppi::CostWeights& weights,
                               const risk::RiskModel* model,
                               const PlantConfig& plant_config,
                               const RunOptions& options);

struct RegionSpec {
  std::string name;
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

struct RegionStats {
  std::string name;
  int samples = 0;
  double mean_plan_vmax = 0.0;
  double mean_cmd_speed = 0.0;
  double max_cmd_speed = 0.0;
};

struct LapSummary {
  int collision_count = 0;
  int laps = 0;
  std::vector<double> lap_times;
  double mean_replan_s = 0.0;
  double mean_cmd_speed = 0.0;
  double max_cmd_speed = 0.0;
  std::vector<RegionStats> regions;
  RunRecord record;
};

LapSummary run_laps(const env::Course& course, int n_laps, bool risk_enabled,
                    const mppi::MppiConfig& mppi_config,
                    const mppi::CostWeights& weights,
                    const risk::RiskModel* model,
                    const PlantConfig& plant_config,
                    const RunOptions& base_options = {},
                    std::span<const RegionSpec> regions = {});

RegionStats region_stats(const RunRecord& record, const RegionSpec& region);

// run.csv: t,cmd_x,cmd_y,cmd_z,act_x,act_y,act_z,cmd_speed,dist_obs,progress,collision
void write_run_csv(std::ostream& os, const RunRecord& record);
// summary: collisions=, laps=, mean_replan_s=, lap_<i>_s=, speed stats.
void write_summary(std::ostream& os, const LapSummary& summary);
void write_dist_vs_progress(std::ostream& os, const RunRecord& record);
void write_speed_profile(std::ostream& os, const RunRecord& record);

}  // namespace riskmppi::sim
