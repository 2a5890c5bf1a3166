#include "riskmppi/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "riskmppi/error.hpp"

namespace riskmppi::env {

Obstacle Obstacle::box(double cx, double cy, double hx, double hy) {
  Obstacle o;
  o.shape = Shape::kBox;
  o.cx = cx;
  o.cy = cy;
  o.hx = hx;
  o.hy = hy;
  return o;
}

Obstacle Obstacle::cylinder(double cx, double cy, double radius) {
  Obstacle o;
  o.shape = Shape::kCylinder;
  o.cx = cx;
  o.cy = cy;
  o.radius = radius;
  return o;
}

bool contains(const Obstacle& obstacle, const Vec3& p) {
  const double dx = p.x - obstacle.cx;
  const double dy = p.y - obstacle.cy;
  if (obstacle.shape == Obstacle::Shape::kBox)
    return std::fabs(dx) <= obstacle.hx && std::fabs(dy) <= obstacle.hy;
  return dx * dx + dy * dy <= obstacle.radius * obstacle.radius;
}

double distance_to_surface(const Obstacle& obstacle, const Vec3& p) {
  const double dx = p.x - obstacle.cx;
  const double dy = p.y - obstacle.cy;
  if (obstacle.shape == Obstacle::Shape::kCylinder)
    return std::sqrt(dx * dx + dy * dy) - obstacle.radius;
  const double ex = std::fabs(dx) - obstacle.hx;
  const double ey = std::fabs(dy) - obstacle.hy;
  if (ex <= 0.0 && ey <= 0.0) return std::max(ex, ey);
  const double ox = std::max(ex, 0.0);
  const double oy = std::max(ey, 0.0);
  return std::sqrt(ox * ox + oy * oy);
}

double min_distance(const Course& course, const SampledPath& path) {
  if (path.empty()) throw Error("domain", "min_distance of an empty path");
  if (course.obstacles.empty())
    return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const Obstacle& o : course.obstacles)
    for (const Vec3& p : path.points)
      best = std::min(best, distance_to_surface(o, p));
  return std::max(0.0, best);
}

double obstacle_cost(const Course& course, const SampledPath& path,
                     double w_obs, double dt) {
  // left-endpoint rectangle rule: n samples span n-1 intervals of width dt
  if (path.size() < 2) return 0.0;
  const std::size_t n = path.size() - 1;
  long inside = 0;
  for (const Obstacle& o : course.obstacles)
    for (std::size_t i = 0; i < n; ++i)
      if (contains(o, path.points[i])) ++inside;
  return w_obs * static_cast<double>(inside) * dt;
}

GoalAdvance advance_goal(GoalTracker& tracker, const Course& course,
                         const Vec3& p) {
  const int n = static_cast<int>(course.goals.size());
  GoalAdvance out;
  out.lap_event = false;
  if (distance(p, course.goals[tracker.active_index]) <= course.goal_radius) {
    ++tracker.active_index;
    if (tracker.active_index == n) {
      tracker.active_index = 0;
      ++tracker.laps_completed;
      out.lap_event = true;
    }
  }
  out.goal = course.goals[tracker.active_index];
  return out;
}

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw Error("parse", "course line " + std::to_string(line_no) + ": " + what);
}

std::vector<double> parse_numbers(const std::vector<std::string>& tokens,
                                  std::size_t expected, int line_no) {
  if (tokens.size() - 1 != expected)
    parse_fail(line_no, "'" + tokens[0] + "' expects " +
                            std::to_string(expected) + " values, got " +
                            std::to_string(tokens.size() - 1));
  std::vector<double> out;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tokens[i], &used);
      if (used != tokens[i].size()) throw std::invalid_argument("trailing");
      out.push_back(v);
    } catch (const std::exception&) {
      parse_fail(line_no, "cannot parse number '" + tokens[i] + "'");
    }
  }
  return out;
}

}  // namespace

Course load_course(const std::string& text) {
  Course course;
  bool saw_bounds = false, saw_start = false, saw_radius = false;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;

    const std::string& key = tokens[0];
    if (key == "bounds") {
      if (saw_bounds) parse_fail(line_no, "duplicate key 'bounds'");
      saw_bounds = true;
      const auto v = parse_numbers(tokens, 4, line_no);
      course.bounds = {v[0], v[1], v[2], v[3]};
      if (!(v[0] < v[1]) || !(v[2] < v[3]))
        parse_fail(line_no, "bounds must satisfy xmin < xmax, ymin < ymax");
    } else if (key == "start") {
      if (saw_start) parse_fail(line_no, "duplicate key 'start'");
      saw_start = true;
      const auto v = parse_numbers(tokens, 6, line_no);
      course.start.position = {v[0], v[1], v[2]};
      course.start.velocity = {v[3], v[4], v[5]};
      course.start.acceleration = {};
    } else if (key == "box") {
      const auto v = parse_numbers(tokens, 4, line_no);
      if (!(v[2] > 0.0) || !(v[3] > 0.0))
        parse_fail(line_no, "box half extents must be positive");
      course.obstacles.push_back(Obstacle::box(v[0], v[1], v[2], v[3]));
    } else if (key == "cylinder") {
      const auto v = parse_numbers(tokens, 3, line_no);
      if (!(v[2] > 0.0)) parse_fail(line_no, "cylinder radius must be positive");
      course.obstacles.push_back(Obstacle::cylinder(v[0], v[1], v[2]));
    } else if (key == "goal") {
      const auto v = parse_numbers(tokens, 3, line_no);
      course.goals.push_back({v[0], v[1], v[2]});
    } else if (key == "goal_radius") {
      if (saw_radius) parse_fail(line_no, "duplicate key 'goal_radius'");
      saw_radius = true;
      const auto v = parse_numbers(tokens, 1, line_no);
      if (!(v[0] > 0.0)) parse_fail(line_no, "goal_radius must be positive");
      course.goal_radius = v[0];
    } else {
      parse_fail(line_no, "unknown key '" + key + "'");
    }
  }

  if (course.goals.empty())
    throw Error("validate", "course defines no goals");
  for (std::size_t i = 0; i < course.obstacles.size(); ++i)
    if (contains(course.obstacles[i], course.start.position))
      throw Error("validate", "start position lies inside obstacle " +
                                  std::to_string(i));
  return course;
}

Course load_course_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open course file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_course(ss.str());
}

}  // namespace riskmppi::env
