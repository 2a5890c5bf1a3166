#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riskmppi/environment.hpp"
#include "riskmppi/minjerk.hpp"
#include "riskmppi/risk.hpp"
#include "riskmppi/types.hpp"

// Sampling-based waypoint optimizer. Each iteration perturbs the xy
// positions of both waypoints with Gaussian noise, scores the resulting
// trajectories with the composite cost, and moves the nominal waypoints by
// the softmin-weighted average of the perturbations.

namespace riskmppi::mppi {

struct PerturbationSet {
  double dx1 = 0.0;  // xy offset of r1
  double dy1 = 0.0;
  double dx2 = 0.0;  // xy offset of r2
  double dy2 = 0.0;
};

struct MppiConfig {
  int n_samples = 50;
  int n_iter = 200;
  double sigma_x = 0.15;  // m; z is never perturbed
  double sigma_y = 0.15;
  double beta = 1.0;  // inverse temperature on shifted costs
  std::uint64_t seed = 0;
  double dt = minjerk::kDefaultDt;
  double T = 2.5;  // s per segment
};

struct CostWeights {
  double w_g = 10.0;     // per m of terminal goal error
  double w_obs = 1e4;    // per s inside an obstacle
  double w_rho = 100.0;  // per s of risk
  double w_ct = 1e3;     // per constraint-violating sample
  double v_limit = 4.0;  // m/s
  double a_limit = 8.0;  // m/s^2
};

struct Solution {
  WaypointPair waypoints;
  double cost = 0.0;
  std::vector<double> cost_trace;  // S(R_k), k = 0..n_iter
  double elapsed = 0.0;            // wall-clock s
  std::vector<double> iter_seconds;
};

struct CostBreakdown {
  double terminal = 0.0;
  double obstacle = 0.0;
  double risk = 0.0;
  double constraint = 0.0;

  double total() const { return terminal + obstacle + risk + constraint; }
};

// N perturbation sets for one iteration, keyed by (seed, iteration, sample)
// so any worker can regenerate any sample independently.
std::vector<PerturbationSet> sample_perturbations(const MppiConfig& config,
                                                  std::uint32_t iteration);

double terminal_cost(const Vec3& final_position, const Vec3& goal, double w_g);

// Count of samples whose speed or acceleration magnitude exceeds its limit.
double constraint_cost(std::span<const Vec3> velocities,
                       std::span<const Vec3> accelerations, double v_limit,
                       double a_limit, double w_ct);

// Composite trajectory cost:
//   terminal + obstacle + w_rho * rho * horizon + constraint,
// where rho compares the model-predicted tracking deviation at the
// trajectory's max speed against its clearance from the course. rho is a
// whole-trajectory constant, so its running-cost integral is rho * 2T.
// model == nullptr drops the risk term.
double total_cost(const minjerk::TwoSegmentTrajectory& traj,
                  const env::Course& course, const Vec3& goal,
                  const CostWeights& weights, const risk::RiskModel* model,
                  double dt = minjerk::kDefaultDt);

CostBreakdown cost_breakdown(const minjerk::TwoSegmentTrajectory& traj,
                             const env::Course& course, const Vec3& goal,
                             const CostWeights& weights,
                             const risk::RiskModel* model,
                             double dt = minjerk::kDefaultDt);

// Softmin weights of shifted costs: w_i ∝ exp(-beta (S_i - min S)).
// The shift is exact (the normalizer absorbs it) and prevents underflow.
// Non-finite costs get weight 0; all-non-finite throws.
std::vector<double> compute_weights(std::span<const double> costs,
                                    double beta);

// R + sum_i w_i e_i applied to the xy components; z never changes.
WaypointPair update_waypoints(const WaypointPair& waypoints,
                              std::span<const PerturbationSet> perturbations,
                              std::span<const double> weights);

// Default warm start: both waypoints on the start->goal segment, at 1/2 and
// 1 of reach = min(|goal - start|, 2 m).
WaypointPair default_warm_start(const Vec3& start_position, const Vec3& goal);

// n_iter rounds of sample / score / reweight / update, starting from
// warm_start. Candidate scoring runs on `workers` threads (0 = resolve from
// RISKMPPI_THREADS / hardware); results are identical for any worker count.
Solution solve(const BoundaryState& start, const env::Course& course,
               const Vec3& goal, const WaypointPair& warm_start,
               const MppiConfig& config, const CostWeights& weights,
               const risk::RiskModel* model, int workers = 0);

}  // namespace riskmppi::mppi
