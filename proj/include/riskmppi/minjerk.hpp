#pragma once

#include <array>
#include <vector>

#include "riskmppi/types.hpp"

// Two-segment minimum-jerk trajectories. A trajectory runs from a full
// boundary state through two waypoints r1 (at t = T) and r2 (at t = 2T),
// with each Cartesian axis a pair of quintics in the factorial basis
//   pos(t) = sum_j c_j t^j / j!
// The 12 coefficients per axis are fixed by the boundary conditions at both
// ends, position at the interior waypoint, velocity/acceleration continuity
// there, and continuity of the jerk-problem costates (which is what leaving
// velocity and acceleration free at r1 implies).

namespace riskmppi::minjerk {

// Shared sampling step for speed scans and cost discretizations.
inline constexpr double kDefaultDt = 0.02;

struct TwoSegmentTrajectory {
  // coeffs[axis][segment][j], axis in {x,y,z}, segment 0 covers [0,T) with
  // local time t, segment 1 covers [T,2T] with local time t - T.
  std::array<std::array<std::array<double, 6>, 2>, 3> coeffs{};
  double segment_duration = 0.0;

  double horizon() const { return 2.0 * segment_duration; }
};

struct TrajectorySample {
  Vec3 position;
  Vec3 velocity;
  Vec3 acceleration;
  Vec3 jerk;
};

struct TerminalCondition {
  Vec3 velocity;
  Vec3 acceleration;
};

// Zero terminal velocity and acceleration: an unreplaced plan ends at rest
// at its second waypoint.
TerminalCondition safety_terminal();

// Solve the 12 boundary/continuity equations per axis. Throws
// std::invalid_argument for T <= 0 or non-finite inputs, std::runtime_error
// if the solved coefficients fail the residual check (must not happen for
// valid inputs).
TwoSegmentTrajectory solve_two_segment(const BoundaryState& start,
                                       const WaypointPair& waypoints,
                                       const Vec3& terminal_velocity,
                                       const Vec3& terminal_acceleration,
                                       double T);

inline TwoSegmentTrajectory solve_two_segment(const BoundaryState& start,
                                              const WaypointPair& waypoints,
                                              const TerminalCondition& terminal,
                                              double T) {
  return solve_two_segment(start, waypoints, terminal.velocity,
                           terminal.acceleration, T);
}

// Analytic evaluation. t must lie in [0, 2T]; t = T evaluates segment 2.
TrajectorySample eval(const TwoSegmentTrajectory& traj, double t);

// Max commanded speed over the grid {0, dt, 2dt, ..., 2T}.
double max_speed(const TwoSegmentTrajectory& traj, double dt = kDefaultDt);

// Trajectory discretized on the same grid as max_speed. `path` carries the
// positions/timestamps, velocity/acceleration ride alongside for constraint
// checks. Buffers are reused across calls.
struct SampledTrajectory {
  SampledPath path;
  std::vector<Vec3> velocity;
  std::vector<Vec3> acceleration;
};

void sample_trajectory(const TwoSegmentTrajectory& traj, double dt,
                       SampledTrajectory& out);

SampledTrajectory sample_trajectory(const TwoSegmentTrajectory& traj,
                                    double dt = kDefaultDt);

}  // namespace riskmppi::minjerk
