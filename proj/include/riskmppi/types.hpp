#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace riskmppi {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Position, velocity and acceleration at one end of a trajectory.
struct BoundaryState {
  Vec3 position;
  Vec3 velocity;
  Vec3 acceleration;
};

// The two interior waypoints that parameterize a planned trajectory.
struct WaypointPair {
  Vec3 r1;
  Vec3 r2;
};

// A trajectory reduced to discrete samples, e.g. a logged flight or a
// commanded spline evaluated on a fixed time grid.
struct SampledPath {
  std::vector<Vec3> points;
  std::vector<double> timestamps;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

}  // namespace riskmppi
