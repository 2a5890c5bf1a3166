#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "riskmppi/types.hpp"

// Tracking-error risk: Hausdorff distance between commanded and actual
// paths, a conservative quantile estimator d_hat(v_max) fit from logged
// runs, and the risk measure max(0, d_hat/d_obs - 1).

namespace riskmppi::risk {

// d_obs this close to zero means the commanded path effectively touches the
// obstacle; clamp before dividing.
inline constexpr double kObstacleDistanceClamp = 1e-3;

struct TrackingSample {
  double v_max = 0.0;  // m/s, max speed of the commanded path
  double d_h = 0.0;    // m, Hausdorff distance commanded vs actual
};

struct RiskModel {
  double intercept = 0.0;  // m
  double slope = 0.0;      // m per (m/s), constrained >= 0 by the fit
  double quantile = 0.95;
};

// Symmetric max of the two directed max-min point-set distances.
// Throws std::invalid_argument on an empty path.
double hausdorff_distance(const SampledPath& a, const SampledPath& b);

// Reduce one logged run to (v_max of the commanded path, d_H against the
// actual path). v_max comes from finite differences on the samples.
TrackingSample summarize_log(const SampledPath& commanded,
                             const SampledPath& actual);

// Fit (intercept, slope) minimizing the pinball loss at quantile q by
// coarse-to-fine grid refinement: 3 levels, 41x41 points per level, starting
// from a in [0, max d_h], b in [0, max d_h / max v_max]. Requires >= 10
// samples. If every v_max is identical the slope is 0 and the intercept is
// the empirical q-quantile of d_h.
RiskModel fit_risk_model(std::span<const TrackingSample> samples,
                         double q = 0.95);

// Conservative tracking-error estimate, clamped at zero.
double predict_dhat(const RiskModel& model, double v_max);

// max(0, d_hat / max(d_obs, clamp) - 1): zero exactly when the nearest
// obstacle is farther than the predicted deviation.
double risk_measure(double d_hat, double d_obs);

// Fraction of samples strictly below the fitted line.
double coverage_fraction(const RiskModel& model,
                         std::span<const TrackingSample> samples);

// ---- file formats ----
// Raw log:     traj_id,t,cmd_x,cmd_y,cmd_z,act_x,act_y,act_z
// Summary:     traj_id,v_max,d_h
// Risk model:  a=<m> / b=<m per m/s> / q=<dimensionless>, one per line.

void write_tracking_log_header(std::ostream& os);
void write_tracking_log_rows(std::ostream& os, int traj_id,
                             const SampledPath& commanded,
                             const SampledPath& actual);

void write_tracking_summary_header(std::ostream& os);
void write_tracking_summary_row(std::ostream& os, int traj_id,
                                const TrackingSample& sample);
std::vector<TrackingSample> read_tracking_summary(std::istream& is);

void write_risk_model(std::ostream& os, const RiskModel& model);
RiskModel read_risk_model(std::istream& is);
RiskModel read_risk_model_file(const std::string& path);

}  // namespace riskmppi::risk
