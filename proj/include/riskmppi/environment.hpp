#pragma once

#include <string>
#include <vector>

#include "riskmppi/types.hpp"

// Obstacle course: 2.5-D obstacles (xy shapes extruded in z), an ordered
// goal loop, and the distance/containment queries the planner cost needs.

namespace riskmppi::env {

struct Obstacle {
  enum class Shape { kBox, kCylinder };

  Shape shape = Shape::kBox;
  double cx = 0.0;  // center, xy
  double cy = 0.0;
  double hx = 0.0;  // box half extents
  double hy = 0.0;
  double radius = 0.0;  // cylinder

  static Obstacle box(double cx, double cy, double hx, double hy);
  static Obstacle cylinder(double cx, double cy, double radius);
};

struct WorldBounds {
  double xmin = -50.0;
  double xmax = 50.0;
  double ymin = -50.0;
  double ymax = 50.0;
};

struct Course {
  std::vector<Obstacle> obstacles;
  BoundaryState start;
  std::vector<Vec3> goals;
  double goal_radius = 0.5;
  WorldBounds bounds;
};

struct GoalTracker {
  int active_index = 0;
  int laps_completed = 0;
};

struct GoalAdvance {
  Vec3 goal;
  bool lap_event = false;
};

// Closed region: the boundary counts as inside.
bool contains(const Obstacle& obstacle, const Vec3& p);

// Signed Euclidean distance to the obstacle surface, negative inside.
double distance_to_surface(const Obstacle& obstacle, const Vec3& p);

// d_obs of a sampled path: min over points and obstacles, floored at 0.
// A course with no obstacles returns +infinity.
double min_distance(const Course& course, const SampledPath& path);

// Rectangle-rule discretization of the per-obstacle indicator integral:
// w_obs * sum_j sum_t I_j(x(t)) * dt. Overlapping obstacles count once each.
double obstacle_cost(const Course& course, const SampledPath& path,
                     double w_obs, double dt);

// Advance the active goal when p is within goal_radius of it; wrapping past
// the last goal counts one lap.
GoalAdvance advance_goal(GoalTracker& tracker, const Course& course,
                         const Vec3& p);

// Parse a line-oriented course description:
//   bounds <xmin> <xmax> <ymin> <ymax>
//   start <x> <y> <z> <vx> <vy> <vz>
//   box <cx> <cy> <hx> <hy>
//   cylinder <cx> <cy> <r>
//   goal <x> <y> <z>
//   goal_radius <r>
// '#' starts a comment. bounds/start/goal_radius may appear at most once.
// Throws std::runtime_error with a line number on malformed input, and on
// validation failures (no goals, start inside an obstacle, bad extents).
Course load_course(const std::string& text);
Course load_course_file(const std::string& path);

}  // namespace riskmppi::env
