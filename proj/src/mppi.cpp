#include "riskmppi/mppi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "riskmppi/error.hpp"
#include "riskmppi/parallel.hpp"
#include "riskmppi/philox.hpp"

namespace riskmppi::mppi {

namespace {

void validate(const MppiConfig& config) {
  if (config.n_samples < 1) throw Error("config", "n_samples must be >= 1");
  if (config.n_iter < 1) throw Error("config", "n_iter must be >= 1");
  if (config.sigma_x < 0.0 || config.sigma_y < 0.0)
    throw Error("config", "sigma must be nonnegative");
  if (!(config.beta > 0.0)) throw Error("config", "beta must be positive");
  if (!(config.dt > 0.0)) throw Error("config", "dt must be positive");
  if (!(config.T > 0.0)) throw Error("config", "T must be positive");
}

WaypointPair apply_perturbation(const WaypointPair& base,
                                const PerturbationSet& e) {
  WaypointPair out = base;
  out.r1.x += e.dx1;
  out.r1.y += e.dy1;
  out.r2.x += e.dx2;
  out.r2.y += e.dy2;
  return out;
}

}  // namespace

std::vector<PerturbationSet> sample_perturbations(const MppiConfig& config,
                                                  std::uint32_t iteration) {
  std::vector<PerturbationSet> out(static_cast<std::size_t>(config.n_samples));
  for (int i = 0; i < config.n_samples; ++i) {
    const auto g1 = gaussian_draw(config.seed, kStreamPerturbation, iteration,
                                  static_cast<std::uint32_t>(i), 0);
    const auto g2 = gaussian_draw(config.seed, kStreamPerturbation, iteration,
                                  static_cast<std::uint32_t>(i), 1);
    out[i].dx1 = config.sigma_x * g1.z0;
    out[i].dy1 = config.sigma_y * g1.z1;
    out[i].dx2 = config.sigma_x * g2.z0;
    out[i].dy2 = config.sigma_y * g2.z1;
  }
  return out;
}

double terminal_cost(const Vec3& final_position, const Vec3& goal,
                     double w_g) {
  return w_g * distance(final_position, goal);
}

double constraint_cost(std::span<const Vec3> velocities,
                       std::span<const Vec3> accelerations, double v_limit,
                       double a_limit, double w_ct) {
  const double v2 = v_limit * v_limit;
  const double a2 = a_limit * a_limit;
  long violations = 0;
  const std::size_t n = std::min(velocities.size(), accelerations.size());
  for (std::size_t i = 0; i < n; ++i)
    if (velocities[i].norm2() > v2 || accelerations[i].norm2() > a2)
      ++violations;
  return w_ct * static_cast<double>(violations);
}

CostBreakdown cost_breakdown(const minjerk::TwoSegmentTrajectory& traj,
                             const env::Course& course, const Vec3& goal,
                             const CostWeights& weights,
                             const risk::RiskModel* model, double dt) {
  thread_local minjerk::SampledTrajectory scratch;
  minjerk::sample_trajectory(traj, dt, scratch);

  CostBreakdown b;
  b.terminal = terminal_cost(scratch.path.points.back(), goal, weights.w_g);
  b.obstacle = env::obstacle_cost(course, scratch.path, weights.w_obs, dt);
  if (model != nullptr && weights.w_rho != 0.0) {
    // Same grid and evaluation core as minjerk::max_speed.
    double v_max = 0.0;
    for (const Vec3& v : scratch.velocity) v_max = std::max(v_max, v.norm());
    const double d_obs = env::min_distance(course, scratch.path);
    const double rho =
        risk::risk_measure(risk::predict_dhat(*model, v_max), d_obs);
    b.risk = weights.w_rho * rho * traj.horizon();
  }
  b.constraint = constraint_cost(scratch.velocity, scratch.acceleration,
                                 weights.v_limit, weights.a_limit,
                                 weights.w_ct);
  return b;
}

double total_cost(const minjerk::TwoSegmentTrajectory& traj,
                  const env::Course& course, const Vec3& goal,
                  const CostWeights& weights, const risk::RiskModel* model,
                  double dt) {
  return cost_breakdown(traj, course, goal, weights, model, dt).total();
}

std::vector<double> compute_weights(std::span<const double> costs,
                                    double beta) {
  if (costs.empty()) throw Error("domain", "compute_weights of no costs");
  double min_cost = std::numeric_limits<double>::infinity();
  for (const double c : costs)
    if (std::isfinite(c)) min_cost = std::min(min_cost, c);
  if (!std::isfinite(min_cost))
    throw Error("domain", "all sample costs are non-finite");

  std::vector<double> weights(costs.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (!std::isfinite(costs[i])) continue;
    weights[i] = std::exp(-beta * (costs[i] - min_cost));
    sum += weights[i];
  }
  for (double& w : weights) w /= sum;
  return weights;
}

WaypointPair update_waypoints(const WaypointPair& waypoints,
                              std::span<const PerturbationSet> perturbations,
                              std::span<const double> weights) {
  if (perturbations.size() != weights.size())
    throw Error("domain", "perturbation/weight count mismatch");
  double dx1 = 0.0, dy1 = 0.0, dx2 = 0.0, dy2 = 0.0;
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    dx1 += weights[i] * perturbations[i].dx1;
    dy1 += weights[i] * perturbations[i].dy1;
    dx2 += weights[i] * perturbations[i].dx2;
    dy2 += weights[i] * perturbations[i].dy2;
  }
  WaypointPair out = waypoints;
  out.r1.x += dx1;
  out.r1.y += dy1;
  out.r2.x += dx2;
  out.r2.y += dy2;
  return out;
}

WaypointPair default_warm_start(const Vec3& start_position, const Vec3& goal) {
  const Vec3 delta = goal - start_position;
  const double dist = delta.norm();
  if (dist == 0.0) return {start_position, start_position};
  const double reach = std::min(dist, 2.0);
  const Vec3 unit = delta * (1.0 / dist);
  return {start_position + unit * (0.5 * reach),
          start_position + unit * reach};
}

Solution solve(const BoundaryState& start, const env::Course& course,
               const Vec3& goal, const WaypointPair& warm_start,
               const MppiConfig& config, const CostWeights& weights,
               const risk::RiskModel* model, int workers) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();
  const int n_workers = resolve_workers(workers);
  const auto terminal = minjerk::safety_terminal();

  auto score = [&](const WaypointPair& wp) {
    const auto traj =
        minjerk::solve_two_segment(start, wp, terminal, config.T);
    return total_cost(traj, course, goal, weights, model, config.dt);
  };

  Solution sol;
  sol.cost_trace.reserve(static_cast<std::size_t>(config.n_iter) + 1);
  sol.iter_seconds.reserve(static_cast<std::size_t>(config.n_iter));

  WaypointPair nominal = warm_start;
  sol.cost_trace.push_back(score(nominal));

  std::vector<double> costs(static_cast<std::size_t>(config.n_samples));
  for (int iter = 0; iter < config.n_iter; ++iter) {
    const auto it0 = std::chrono::steady_clock::now();
    const auto perturbations =
        sample_perturbations(config, static_cast<std::uint32_t>(iter));
    parallel_for(config.n_samples, n_workers, [&](int i) {
      costs[static_cast<std::size_t>(i)] =
          score(apply_perturbation(nominal, perturbations[i]));
    });
    const auto sample_weights = compute_weights(costs, config.beta);
    nominal = update_waypoints(nominal, perturbations, sample_weights);
    sol.cost_trace.push_back(score(nominal));
    sol.iter_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - it0)
            .count());
  }

  sol.waypoints = nominal;
  sol.cost = sol.cost_trace.back();
  sol.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return sol;
}

}  // namespace riskmppi::mppi
