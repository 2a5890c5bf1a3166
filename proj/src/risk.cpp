#include "riskmppi/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "riskmppi/error.hpp"

namespace riskmppi::risk {

namespace {

// Directed max-min distance in squared space. The inner scan stops as soon
// as a point provably cannot raise the running max; the result is identical
// to the full double loop.
double directed_sq(const SampledPath& from, const SampledPath& to) {
  double worst = 0.0;
  for (const Vec3& u : from.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& v : to.points) {
      const double dx = u.x - v.x;
      const double dy = u.y - v.y;
      const double dz = u.z - v.z;
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 < best) {
        best = d2;
        if (best <= worst) break;
      }
    }
    if (best > worst) worst = best;
  }
  return worst;
}

double pinball(double q, double a, double b,
               std::span<const TrackingSample> samples) {
  double loss = 0.0;
  for (const TrackingSample& s : samples) {
    const double e = s.d_h - (a + b * s.v_max);
    loss += e >= 0.0 ? q * e : (q - 1.0) * e;
  }
  return loss;
}

// The pinball-minimizing sample quantile: ceil(q*n)-th order statistic.
double empirical_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  auto idx = static_cast<std::size_t>(
                 std::ceil(q * static_cast<double>(values.size()))) -
             1;
  idx = std::min(idx, values.size() - 1);
  return values[idx];
}

}  // namespace

double hausdorff_distance(const SampledPath& a, const SampledPath& b) {
  if (a.empty() || b.empty())
    throw Error("domain", "hausdorff distance of an empty path");
  return std::sqrt(std::max(directed_sq(a, b), directed_sq(b, a)));
}

TrackingSample summarize_log(const SampledPath& commanded,
                             const SampledPath& actual) {
  if (commanded.size() < 2)
    throw Error("domain", "commanded path needs at least two samples");
  double v_max = 0.0;
  for (std::size_t i = 0; i + 1 < commanded.size(); ++i) {
    const double dt = commanded.timestamps[i + 1] - commanded.timestamps[i];
    if (!(dt > 0.0))
      throw Error("domain", "commanded timestamps must be increasing");
    const double v =
        distance(commanded.points[i + 1], commanded.points[i]) / dt;
    v_max = std::max(v_max, v);
  }
  return {v_max, hausdorff_distance(commanded, actual)};
}

RiskModel fit_risk_model(std::span<const TrackingSample> samples, double q) {
  if (samples.size() < 10)
    throw Error("insufficient-data",
                "risk-model fit needs at least 10 samples, got " +
                    std::to_string(samples.size()));
  if (!(q > 0.0 && q < 1.0))
    throw Error("domain", "quantile must lie in (0, 1)");

  double max_dh = 0.0;
  double min_v = std::numeric_limits<double>::infinity();
  double max_v = 0.0;
  for (const TrackingSample& s : samples) {
    if (!(s.v_max >= 0.0) || !(s.d_h >= 0.0))
      throw Error("domain", "tracking samples must be nonnegative");
    max_dh = std::max(max_dh, s.d_h);
    max_v = std::max(max_v, s.v_max);
    min_v = std::min(min_v, s.v_max);
  }

  if (min_v == max_v) {
    std::vector<double> dh(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) dh[i] = samples[i].d_h;
    return {empirical_quantile(std::move(dh), q), 0.0, q};
  }

  // Coarse-to-fine grid refinement of the pinball loss: 3 levels, 41x41.
  constexpr int kLevels = 3;
  constexpr int kGrid = 41;
  double a_lo = 0.0, a_hi = max_dh;
  double b_lo = 0.0, b_hi = max_dh / max_v;
  double best_a = 0.0, best_b = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int level = 0; level < kLevels; ++level) {
    const double step_a = (a_hi - a_lo) / (kGrid - 1);
    const double step_b = (b_hi - b_lo) / (kGrid - 1);
    for (int i = 0; i < kGrid; ++i) {
      const double a = a_lo + i * step_a;
      for (int j = 0; j < kGrid; ++j) {
        const double b = b_lo + j * step_b;
        const double loss = pinball(q, a, b, samples);
        if (loss < best_loss) {
          best_loss = loss;
          best_a = a;
          best_b = b;
        }
      }
    }
    a_lo = std::max(0.0, best_a - 2.0 * step_a);
    a_hi = best_a + 2.0 * step_a;
    b_lo = std::max(0.0, best_b - 2.0 * step_b);
    b_hi = best_b + 2.0 * step_b;
  }
  return {best_a, best_b, q};
}

double predict_dhat(const RiskModel& model, double v_max) {
  if (!(v_max >= 0.0)) throw Error("domain", "v_max must be nonnegative");
  return std::max(0.0, model.intercept + model.slope * v_max);
}

double risk_measure(double d_hat, double d_obs) {
  const double d = std::max(d_obs, kObstacleDistanceClamp);
  return std::max(0.0, d_hat / d - 1.0);
}

double coverage_fraction(const RiskModel& model,
                         std::span<const TrackingSample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t below = 0;
  for (const TrackingSample& s : samples)
    if (s.d_h < model.intercept + model.slope * s.v_max) ++below;
  return static_cast<double>(below) / static_cast<double>(samples.size());
}

// ---- file io ----

void write_tracking_log_header(std::ostream& os) {
  os << "traj_id,t,cmd_x,cmd_y,cmd_z,act_x,act_y,act_z\n";
}

void write_tracking_log_rows(std::ostream& os, int traj_id,
                             const SampledPath& commanded,
                             const SampledPath& actual) {
  if (commanded.size() != actual.size())
    throw Error("domain", "commanded/actual logs differ in length");
  char buf[256];
  for (std::size_t i = 0; i < commanded.size(); ++i) {
    const Vec3& c = commanded.points[i];
    const Vec3& a = actual.points[i];
    std::snprintf(buf, sizeof(buf), "%d,%.4f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  traj_id, commanded.timestamps[i], c.x, c.y, c.z, a.x, a.y,
                  a.z);
    os << buf;
  }
}

void write_tracking_summary_header(std::ostream& os) {
  os << "traj_id,v_max,d_h\n";
}

void write_tracking_summary_row(std::ostream& os, int traj_id,
                                const TrackingSample& sample) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", traj_id, sample.v_max,
                sample.d_h);
  os << buf;
}

std::vector<TrackingSample> read_tracking_summary(std::istream& is) {
  std::vector<TrackingSample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("traj_id", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    int id = 0;
    TrackingSample s;
    if (!(ss >> id >> s.v_max >> s.d_h))
      throw Error("parse", "summary line " + std::to_string(line_no) +
                               ": expected traj_id,v_max,d_h");
    samples.push_back(s);
  }
  return samples;
}

void write_risk_model(std::ostream& os, const RiskModel& model) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "a=%.12g\nb=%.12g\nq=%.12g\n",
                model.intercept, model.slope, model.quantile);
  os << buf;
}

RiskModel read_risk_model(std::istream& is) {
  RiskModel model;
  bool have_a = false, have_b = false, have_q = false;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("parse", "risk-model line " + std::to_string(line_no) +
                               ": expected key=value");
    const std::string key = line.substr(0, eq);
    const double value = std::stod(line.substr(eq + 1));
    if (key == "a") {
      model.intercept = value;
      have_a = true;
    } else if (key == "b") {
      model.slope = value;
      have_b = true;
    } else if (key == "q") {
      model.quantile = value;
      have_q = true;
    } else {
      throw Error("parse", "risk-model line " + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
  }
  if (!have_a || !have_b || !have_q)
    throw Error("parse", "risk-model file missing a, b or q");
  return model;
}

RiskModel read_risk_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open risk-model file: " + path);
  return read_risk_model(in);
}

}  // namespace riskmppi::risk
