#include "riskmppi/minjerk.hpp"

#include <algorithm>
#include <cmath>

#include "riskmppi/error.hpp"

namespace riskmppi::minjerk {

namespace {

constexpr int kDim = 12;

// c is one segment's coefficients in the factorial basis.
inline void axis_eval(const std::array<double, 6>& c, double t, double& pos,
                      double& vel, double& acc, double& jrk) {
  constexpr double i2 = 1.0 / 2.0;
  constexpr double i6 = 1.0 / 6.0;
  constexpr double i24 = 1.0 / 24.0;
  constexpr double i120 = 1.0 / 120.0;
  pos = c[0] +
        t * (c[1] +
             t * (c[2] * i2 +
                  t * (c[3] * i6 + t * (c[4] * i24 + t * c[5] * i120))));
  vel = c[1] +
        t * (c[2] + t * (c[3] * i2 + t * (c[4] * i6 + t * c[5] * i24)));
  acc = c[2] + t * (c[3] + t * (c[4] * i2 + t * c[5] * i6));
  jrk = c[3] + t * (c[4] + t * c[5] * i2);
}

// The 12 boundary/continuity equations for one axis; the matrix depends
// only on T. pos_b[j] = T^j / j!.
void assemble_matrix(double T, double A[kDim][kDim]) {
  double pos_b[6];
  double p = 1.0;
  for (int j = 0; j < 6; ++j) {
    pos_b[j] = p;
    p *= T / (j + 1);
  }

  for (int r = 0; r < kDim; ++r)
    for (int c = 0; c < kDim; ++c) A[r][c] = 0.0;

  // segment 1: start state and first waypoint
  A[0][0] = 1.0;
  A[1][1] = 1.0;
  A[2][2] = 1.0;
  for (int j = 0; j < 6; ++j) A[3][j] = pos_b[j];
  // segment 2: waypoints and terminal state
  A[4][6] = 1.0;
  for (int j = 0; j < 6; ++j) A[5][6 + j] = pos_b[j];
  for (int j = 1; j < 6; ++j) A[6][6 + j] = pos_b[j - 1];
  for (int j = 2; j < 6; ++j) A[7][6 + j] = pos_b[j - 2];
  // costate continuity at the interior waypoint
  A[8][4] = 1.0;
  A[8][5] = T;
  A[8][10] = -1.0;
  A[9][3] = 1.0;
  A[9][4] = T;
  A[9][5] = 0.5 * T * T;
  A[9][9] = -1.0;
  // velocity / acceleration continuity
  for (int j = 1; j < 6; ++j) A[10][j] = pos_b[j - 1];
  A[10][7] = -1.0;
  for (int j = 2; j < 6; ++j) A[11][j] = pos_b[j - 2];
  A[11][8] = -1.0;
}

// In-place LU with partial pivoting; perm records the row order.
bool lu_factor(double A[kDim][kDim], int perm[kDim]) {
  for (int i = 0; i < kDim; ++i) perm[i] = i;
  for (int col = 0; col < kDim; ++col) {
    int piv = col;
    for (int r = col + 1; r < kDim; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    if (A[piv][col] == 0.0) return false;
    if (piv != col) {
      for (int c = 0; c < kDim; ++c) std::swap(A[piv][c], A[col][c]);
      std::swap(perm[piv], perm[col]);
    }
    const double inv = 1.0 / A[col][col];
    for (int r = col + 1; r < kDim; ++r) {
      const double f = A[r][col] * inv;
      A[r][col] = f;
      for (int c = col + 1; c < kDim; ++c) A[r][c] -= f * A[col][c];
    }
  }
  return true;
}

void lu_solve(const double LU[kDim][kDim], const int perm[kDim],
              const double b[kDim], double x[kDim]) {
  double y[kDim];
  for (int i = 0; i < kDim; ++i) {
    double s = b[perm[i]];
    for (int j = 0; j < i; ++j) s -= LU[i][j] * y[j];
    y[i] = s;
  }
  for (int i = kDim - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < kDim; ++j) s -= LU[i][j] * x[j];
    x[i] = s / LU[i][i];
  }
}

inline bool all_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// Sampling grid shared by max_speed and sample_trajectory: k*dt for
// k = 0..n-1 plus the exact horizon endpoint.
inline int grid_steps(double horizon, double dt) {
  return static_cast<int>(std::ceil(horizon / dt - 1e-9));
}

}  // namespace

TerminalCondition safety_terminal() { return {Vec3{}, Vec3{}}; }

TwoSegmentTrajectory solve_two_segment(const BoundaryState& start,
                                       const WaypointPair& waypoints,
                                       const Vec3& terminal_velocity,
                                       const Vec3& terminal_acceleration,
                                       double T) {
  if (!(T > 0.0)) throw Error("domain", "segment duration must be positive");
  if (!all_finite(start.position) || !all_finite(start.velocity) ||
      !all_finite(start.acceleration) || !all_finite(waypoints.r1) ||
      !all_finite(waypoints.r2) || !all_finite(terminal_velocity) ||
      !all_finite(terminal_acceleration))
    throw Error("domain", "non-finite trajectory boundary data");

  const double* starts[3][7] = {
      {&start.position.x, &start.velocity.x, &start.acceleration.x,
       &waypoints.r1.x, &waypoints.r2.x, &terminal_velocity.x,
       &terminal_acceleration.x},
      {&start.position.y, &start.velocity.y, &start.acceleration.y,
       &waypoints.r1.y, &waypoints.r2.y, &terminal_velocity.y,
       &terminal_acceleration.y},
      {&start.position.z, &start.velocity.z, &start.acceleration.z,
       &waypoints.r1.z, &waypoints.r2.z, &terminal_velocity.z,
       &terminal_acceleration.z}};

  TwoSegmentTrajectory traj;
  traj.segment_duration = T;

  // Factor once, reuse across the three axes.
  double A[kDim][kDim];
  double A_orig[kDim][kDim];
  assemble_matrix(T, A);
  for (int r = 0; r < kDim; ++r)
    for (int c = 0; c < kDim; ++c) A_orig[r][c] = A[r][c];
  int perm[kDim];
  if (!lu_factor(A, perm))
    throw Error("internal", "singular boundary-condition system");

  for (int axis = 0; axis < 3; ++axis) {
    const double p0 = *starts[axis][0];
    const double v0 = *starts[axis][1];
    const double a0 = *starts[axis][2];
    const double r1 = *starts[axis][3];
    const double r2 = *starts[axis][4];
    const double ve = *starts[axis][5];
    const double ae = *starts[axis][6];
    double rhs[kDim] = {p0, v0, a0, r1, r1, r2, ve, ae, 0.0, 0.0, 0.0, 0.0};
    double u[kDim];
    lu_solve(A, perm, rhs, u);

    double worst = 0.0;
    for (int r = 0; r < kDim; ++r) {
      double s = -rhs[r];
      for (int c = 0; c < kDim; ++c) s += A_orig[r][c] * u[c];
      worst = std::max(worst, std::fabs(s));
    }
    if (worst > 1e-6)
      throw Error("internal", "trajectory solve residual too large");

    for (int j = 0; j < 6; ++j) {
      traj.coeffs[axis][0][j] = u[j];
      traj.coeffs[axis][1][j] = u[6 + j];
    }
  }
  return traj;
}

TrajectorySample eval(const TwoSegmentTrajectory& traj, double t) {
  const double T = traj.segment_duration;
  if (t < 0.0 || t > 2.0 * T)
    throw Error("domain", "evaluation time outside [0, 2T]");
  const int seg = t < T ? 0 : 1;
  const double local = t - seg * T;

  TrajectorySample s;
  double* pos[3] = {&s.position.x, &s.position.y, &s.position.z};
  double* vel[3] = {&s.velocity.x, &s.velocity.y, &s.velocity.z};
  double* acc[3] = {&s.acceleration.x, &s.acceleration.y, &s.acceleration.z};
  double* jrk[3] = {&s.jerk.x, &s.jerk.y, &s.jerk.z};
  for (int axis = 0; axis < 3; ++axis)
    axis_eval(traj.coeffs[axis][seg], local, *pos[axis], *vel[axis],
              *acc[axis], *jrk[axis]);
  return s;
}

double max_speed(const TwoSegmentTrajectory& traj, double dt) {
  if (!(dt > 0.0)) throw Error("domain", "sampling step must be positive");
  const double horizon = traj.horizon();
  const int n = grid_steps(horizon, dt);
  double best = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double t = std::min(k * dt, horizon);
    const int seg = t < traj.segment_duration ? 0 : 1;
    const double local = t - seg * traj.segment_duration;
    double p, vx, vy, vz, a, j;
    axis_eval(traj.coeffs[0][seg], local, p, vx, a, j);
    axis_eval(traj.coeffs[1][seg], local, p, vy, a, j);
    axis_eval(traj.coeffs[2][seg], local, p, vz, a, j);
    best = std::max(best, std::sqrt(vx * vx + vy * vy + vz * vz));
  }
  return best;
}

void sample_trajectory(const TwoSegmentTrajectory& traj, double dt,
                       SampledTrajectory& out) {
  if (!(dt > 0.0)) throw Error("domain", "sampling step must be positive");
  const double horizon = traj.horizon();
  const int n = grid_steps(horizon, dt);

  out.path.points.clear();
  out.path.timestamps.clear();
  out.velocity.clear();
  out.acceleration.clear();
  out.path.points.reserve(n + 1);
  out.path.timestamps.reserve(n + 1);
  out.velocity.reserve(n + 1);
  out.acceleration.reserve(n + 1);

  for (int k = 0; k <= n; ++k) {
    const double t = std::min(k * dt, horizon);
    const int seg = t < traj.segment_duration ? 0 : 1;
    const double local = t - seg * traj.segment_duration;
    Vec3 p, v, a;
    double j;
    axis_eval(traj.coeffs[0][seg], local, p.x, v.x, a.x, j);
    axis_eval(traj.coeffs[1][seg], local, p.y, v.y, a.y, j);
    axis_eval(traj.coeffs[2][seg], local, p.z, v.z, a.z, j);
    out.path.points.push_back(p);
    out.path.timestamps.push_back(t);
    out.velocity.push_back(v);
    out.acceleration.push_back(a);
  }
}

SampledTrajectory sample_trajectory(const TwoSegmentTrajectory& traj,
                                    double dt) {
  SampledTrajectory out;
  sample_trajectory(traj, dt, out);
  return out;
}

}  // namespace riskmppi::minjerk
