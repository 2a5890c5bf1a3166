#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "riskmppi/error.hpp"
#include "riskmppi/environment.hpp"

using namespace riskmppi;
using namespace riskmppi::env;

namespace {

SampledPath straight_path(Vec3 from, Vec3 to, int n) {
  SampledPath p;
  for (int i = 0; i <= n; ++i) {
    const double a = static_cast<double>(i) / n;
    p.points.push_back(from + (to - from) * a);
    p.timestamps.push_back(0.02 * i);
  }
  return p;
}

Obstacle random_obstacle(oracles::TestRng& rng) {
  if (rng.uniform(0, 1) < 0.5)
    return Obstacle::box(rng.uniform(-4, 4), rng.uniform(-4, 4),
                         rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5));
  return Obstacle::cylinder(rng.uniform(-4, 4), rng.uniform(-4, 4),
                            rng.uniform(0.2, 1.5));
}

}  // namespace

TEST_CASE("containment of boxes and cylinders") {
  const auto box = Obstacle::box(1, 2, 0.5, 0.25);
  CHECK(contains(box, {1, 2, 0}));
  CHECK(contains(box, {1.5, 2, 5}));  // face counts, z ignored
  CHECK(!contains(box, {6, 2, 0}));

  const auto cyl = Obstacle::cylinder(0, 0, 1);
  CHECK(contains(cyl, {0.5, 0.5, -3}));
  CHECK(contains(cyl, {1, 0, 0}));
  CHECK(!contains(cyl, {1.01, 0, 0}));
}

TEST_CASE("signed distance basics") {
  const auto box = Obstacle::box(0, 0, 1, 1);
  CHECK(distance_to_surface(box, {2, 0, 0}) == doctest::Approx(1.0));
  CHECK(distance_to_surface(box, {0, 0, 0}) == doctest::Approx(-1.0));
  CHECK(distance_to_surface(box, {1, 0, 0}) == 0.0);
  // off the corner
  CHECK(distance_to_surface(box, {2, 2, 0}) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const auto cyl = Obstacle::cylinder(0, 0, 0.5);
  CHECK(distance_to_surface(cyl, {1.5, 0, 0}) == doctest::Approx(1.0));
  CHECK(distance_to_surface(cyl, {0, 0, 0}) == doctest::Approx(-0.5));
}

TEST_CASE("signed distance matches dense surface sampling") {
  oracles::TestRng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto o = random_obstacle(rng);
    const Vec3 p{rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(0, 2)};
    const double sampled = oracles::surface_distance_sampled(o, p);
    CHECK(std::fabs(std::fabs(distance_to_surface(o, p)) - sampled) < 1e-2);
  }
}

TEST_CASE("contains iff signed distance nonpositive") {
  oracles::TestRng rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto o = random_obstacle(rng);
    const Vec3 p{rng.uniform(-6, 6), rng.uniform(-6, 6), 0};
    CHECK(contains(o, p) == (distance_to_surface(o, p) <= 0.0));
  }
}

TEST_CASE("min_distance over a course") {
  Course course;
  course.goals.push_back({1, 0, 0});
  const auto path = straight_path({-2, 0.5, 1}, {2, 0.5, 1}, 200);

  SUBCASE("no obstacles gives the +inf sentinel") {
    CHECK(min_distance(course, path) ==
          std::numeric_limits<double>::infinity());
  }

  SUBCASE("cylinder offset from a straight path") {
    course.obstacles.push_back(Obstacle::cylinder(0, 0, 0.2));
    CHECK(min_distance(course, path) == doctest::Approx(0.3).epsilon(1e-6));
  }

  SUBCASE("matches the double-loop oracle on random scenes") {
    oracles::TestRng rng(25);
    for (int trial = 0; trial < 40; ++trial) {
      Course c;
      c.goals.push_back({0, 0, 0});
      const int n_obs = 1 + trial % 5;
      for (int i = 0; i < n_obs; ++i)
        c.obstacles.push_back(random_obstacle(rng));
      const auto p = straight_path(
          {rng.uniform(-5, 5), rng.uniform(-5, 5), 1},
          {rng.uniform(-5, 5), rng.uniform(-5, 5), 1}, 60);
      CHECK(min_distance(c, p) == oracles::min_distance_brute_force(c, p));
    }
  }

  SUBCASE("adding obstacles never increases the distance") {
    oracles::TestRng rng(26);
    for (int trial = 0; trial < 30; ++trial) {
      Course c;
      c.goals.push_back({0, 0, 0});
      const auto p = straight_path(
          {rng.uniform(-5, 5), rng.uniform(-5, 5), 1},
          {rng.uniform(-5, 5), rng.uniform(-5, 5), 1}, 40);
      double prev = min_distance(c, p);
      for (int i = 0; i < 4; ++i) {
        c.obstacles.push_back(random_obstacle(rng));
        const double now = min_distance(c, p);
        CHECK(now <= prev);
        prev = now;
      }
    }
  }
}

TEST_CASE("obstacle cost integrates the inside indicator") {
  Course course;
  course.goals.push_back({0, 0, 0});
  course.obstacles.push_back(Obstacle::box(0, 0, 1, 1));

  SUBCASE("collision-free path costs nothing") {
    const auto path = straight_path({-3, 3, 1}, {3, 3, 1}, 250);
    CHECK(obstacle_cost(course, path, 1e4, 0.02) == 0.0);
  }

  SUBCASE("path entirely inside one obstacle for the whole horizon") {
    // 251 samples at dt = 0.02 -> 250 rectangles spanning the 5 s horizon
    const auto path = straight_path({-0.5, 0, 1}, {0.5, 0, 1}, 250);
    CHECK(obstacle_cost(course, path, 1e4, 0.02) == doctest::Approx(5e4));
  }

  SUBCASE("half-inside path matches a refined-quadrature oracle") {
    const auto coarse = straight_path({-2, 0, 1}, {2, 0, 1}, 250);
    const auto fine = straight_path({-2, 0, 1}, {2, 0, 1}, 2500);
    const double c = obstacle_cost(course, coarse, 1e4, 0.02);
    const double f = obstacle_cost(course, fine, 1e4, 0.002);
    CHECK(std::fabs(c - f) <= 0.05 * f);
  }

  SUBCASE("zero cost iff no sample inside") {
    oracles::TestRng rng(27);
    for (int trial = 0; trial < 50; ++trial) {
      Course c;
      c.goals.push_back({0, 0, 0});
      c.obstacles.push_back(random_obstacle(rng));
      c.obstacles.push_back(random_obstacle(rng));
      const auto p = straight_path(
          {rng.uniform(-5, 5), rng.uniform(-5, 5), 1},
          {rng.uniform(-5, 5), rng.uniform(-5, 5), 1}, 80);
      bool any_inside = false;  // over the rectangle support (last excluded)
      for (std::size_t i = 0; i + 1 < p.points.size(); ++i)
        for (const auto& o : c.obstacles)
          if (contains(o, p.points[i])) any_inside = true;
      CHECK((obstacle_cost(c, p, 1e4, 0.02) > 0.0) == any_inside);
    }
  }
}

TEST_CASE("goal advancing cycles and counts laps") {
  Course course;
  course.goal_radius = 0.5;
  course.goals = {{0, 0, 0}, {4, 0, 0}, {4, 4, 0}};
  GoalTracker tracker;

  auto far = advance_goal(tracker, course, {2, 2, 0});
  CHECK(tracker.active_index == 0);
  CHECK(!far.lap_event);
  CHECK(distance(far.goal, course.goals[0]) == 0.0);

  advance_goal(tracker, course, {0.1, 0, 0});
  CHECK(tracker.active_index == 1);
  advance_goal(tracker, course, {4, 0.2, 0});
  CHECK(tracker.active_index == 2);
  auto wrap = advance_goal(tracker, course, {4, 4, 0});
  CHECK(wrap.lap_event);
  CHECK(tracker.active_index == 0);
  CHECK(tracker.laps_completed == 1);

  // a full circuit in order adds exactly one more lap
  for (const auto& g : course.goals) advance_goal(tracker, course, g);
  CHECK(tracker.laps_completed == 2);
}

TEST_CASE("course parsing") {
  SUBCASE("minimal file") {
    const auto c = load_course("goal 1 0 0\n");
    CHECK(c.obstacles.empty());
    CHECK(c.goals.size() == 1);
    CHECK(c.goal_radius == 0.5);
  }

  SUBCASE("bundled gap course") {
    const auto c = load_course_file(std::string(RISKMPPI_COURSE_DIR) +
                                    "/loop_gap.course");
    CHECK(c.obstacles.size() == 5);
    CHECK(c.goals.size() == 4);
    CHECK(c.goal_radius == 0.5);
    CHECK(c.start.position.x == doctest::Approx(1.25));
    // the advertised 0.3 m gap between wall bottom and tab top
    double wall_bottom = 0.0, tab_top = 0.0;
    for (const auto& o : c.obstacles) {
      if (o.cy > 6.0) wall_bottom = o.cy - o.hy;
      if (o.cy > 5.0 && o.cy < 6.0) tab_top = o.cy + o.hy;
    }
    CHECK(wall_bottom - tab_top == doctest::Approx(0.3).epsilon(1e-9));
  }

  SUBCASE("comments and blank lines are ignored") {
    const auto c = load_course("# hello\n\ngoal 0 1 0  # trailing\n");
    CHECK(c.goals.size() == 1);
  }

  SUBCASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(load_course("goal 1 0 0\nbox 1 2 3\n"),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_WITH_AS(load_course("wat 1\n"), doctest::Contains("line 1"),
                         Error);
    CHECK_THROWS_WITH_AS(load_course("goal 1 0 x\n"),
                         doctest::Contains("line 1"), Error);
  }

  SUBCASE("duplicate singleton keys are rejected") {
    CHECK_THROWS_WITH_AS(
        load_course("goal_radius 0.5\ngoal_radius 0.6\ngoal 0 0 0\n"),
        doctest::Contains("duplicate"), Error);
    CHECK_THROWS_WITH_AS(
        load_course("start 0 0 0 0 0 0\nstart 1 0 0 0 0 0\ngoal 0 1 0\n"),
        doctest::Contains("duplicate"), Error);
  }

  SUBCASE("validation failures") {
    CHECK_THROWS_AS(load_course(""), Error);  // no goals
    CHECK_THROWS_AS(
        load_course("start 0 0 0 0 0 0\nbox 0 0 1 1\ngoal 3 0 0\n"), Error);
    CHECK_THROWS_AS(load_course("box 0 0 -1 1\ngoal 3 0 0\n"), Error);
    CHECK_THROWS_AS(load_course("cylinder 0 0 0\ngoal 3 0 0\n"), Error);
  }
}
