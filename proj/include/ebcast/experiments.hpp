#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "ebcast/two_rx.hpp"

namespace ebcast {

struct ExperimentConfig {
  Geometry geometry;
  std::vector<double> velocities{0.0, 60.0, 90.0, 144.0};
  std::vector<double> targets{0.3, 0.4, 0.5};
  double lambda_hi = 50.0;
  double lambda_tol = 1e-4;
  double density_target = 0.4;

  void validate() const {
    geometry.validate();
    if (velocities.empty()) throw ValidationError("velocity grid must be nonempty");
    for (double v : velocities)
      if (!(v >= 0.0)) throw ValidationError("velocities must be >= 0");
    for (double t : targets)
      if (!(t > 0.0 && t < 1.0)) throw ValidationError("targets must be in (0,1)");
    if (!(lambda_hi > 0.0)) throw ValidationError("lambda_hi must be > 0");
  }
};

inline JointStateTable toy_joint(const Geometry& geom, double velocity_kmh) {
  const auto j = per_vehicle_joint(geom, VehicleProfile{velocity_kmh});
  return product_joint({j, j});
}

// Symmetric-rate map used for sizing.  fb_only evaluates the feedback-only
// reduction (estimate decoupled from the state) at the same marginals.
inline double toy_symmetric_rate(const Geometry& geom, double velocity_kmh,
                                 bool fb_only = false) {
  auto joint = toy_joint(geom, velocity_kmh);
  if (fb_only) joint = decouple_estimate(joint);
  return sym_rate_direct(joint).rate;
}

struct Fig3Dataset {
  std::vector<std::pair<double, RegionPolygon>> by_velocity;
  RegionPolygon fb_baseline;
  RegionPolygon tdma_baseline;
};

inline Fig3Dataset fig3_regions(const ExperimentConfig& config) {
  config.validate();
  Fig3Dataset out;
  for (double v : config.velocities)
    out.by_velocity.emplace_back(v, region_polygon(toy_joint(config.geometry, v)));
  const auto baselines = baseline_regions(toy_joint(config.geometry, 0.0));
  out.fb_baseline = baselines.feedback_only;
  out.tdma_baseline = baselines.tdma;
  return out;
}

// Smallest radio-site density achieving the target symmetric rate, by
// bisection over a monotone map (checked on a coarse grid first).
inline double min_density(double target, double velocity_kmh, const Geometry& geom_template,
                          bool fb_only = false, double lambda_hi = 50.0,
                          double lambda_tol = 1e-4) {
  if (target <= 0.0) return 0.0;
  const auto rate_at = [&](double lambda) {
    Geometry g = geom_template;
    g.lambda = lambda;
    return toy_symmetric_rate(g, velocity_kmh, fb_only);
  };

  const int grid_points = 11;
  double prev = -1.0;
  for (int i = 0; i < grid_points; ++i) {
    const double lam = lambda_hi * static_cast<double>(i) / (grid_points - 1);
    const double r = rate_at(lam);
    if (r < prev - 1e-9)
      throw MonotonicityError("non-monotone-abort: rate map decreased on the grid");
    prev = r;
  }

  if (rate_at(lambda_hi) < target)
    throw TargetError("unreachable-target: symmetric rate at lambda_hi below target");
  double lo = 0.0, hi = lambda_hi;
  if (rate_at(lo) >= target) return lo;
  while (hi - lo > lambda_tol) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at(mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

struct GainReport {
  double velocity_kmh = 0.0;
  double r_mixed = 0.0;
  double r_fb = 0.0;
  double gain_percent = 0.0;
  double target = 0.4;
  double lambda_min_mixed = 0.0;
  double lambda_min_fb = 0.0;
  double savings_percent = 0.0;
};

inline GainReport gain_report(const Geometry& geom, double velocity_kmh,
                              double target = 0.4, double lambda_hi = 50.0) {
  GainReport out;
  out.velocity_kmh = velocity_kmh;
  out.target = target;
  out.r_mixed = toy_symmetric_rate(geom, velocity_kmh, false);
  out.r_fb = toy_symmetric_rate(geom, velocity_kmh, true);
  out.gain_percent = (out.r_mixed / out.r_fb - 1.0) * 100.0;
  out.lambda_min_mixed = min_density(target, velocity_kmh, geom, false, lambda_hi);
  out.lambda_min_fb = min_density(target, velocity_kmh, geom, true, lambda_hi);
  out.savings_percent = (1.0 - out.lambda_min_mixed / out.lambda_min_fb) * 100.0;
  return out;
}

struct Fig4Row {
  double velocity_kmh = 0.0;
  double target = 0.0;
  double lambda_min = std::numeric_limits<double>::quiet_NaN();
  bool reachable = false;
};

inline std::vector<Fig4Row> fig4_rows(const ExperimentConfig& config,
                                      const std::vector<double>& velocity_grid) {
  config.validate();
  std::vector<Fig4Row> rows;
  for (double target : config.targets)
    for (double v : velocity_grid) {
      Fig4Row row;
      row.velocity_kmh = v;
      row.target = target;
      try {
        row.lambda_min = min_density(target, v, config.geometry, false,
                                     config.lambda_hi, config.lambda_tol);
        row.reachable = true;
      } catch (const TargetError&) {
        row.reachable = false;
      }
      rows.push_back(row);
    }
  return rows;
}

inline std::vector<double> default_fig4_velocity_grid() {
  std::vector<double> grid;
  for (int v = 0; v <= 160; v += 5) grid.push_back(static_cast<double>(v));
  return grid;
}

inline void write_fig3_csv(const Fig3Dataset& data, const std::string& path,
                           int precision = 6) {
  std::ofstream out(path);
  if (!out) throw ParseError("parse-error: cannot write '" + path + "'");
  out << "velocity,R1,R2\n";
  char buf[96];
  for (const auto& [v, poly] : data.by_velocity)
    for (const auto& vert : poly.vertices) {
      std::snprintf(buf, sizeof buf, "%.*g,%.*g,%.*g", precision, v, precision,
                    vert[0], precision, vert[1]);
      out << buf << '\n';
    }
}

inline void write_fig4_csv(const std::vector<Fig4Row>& rows, const std::string& path,
                           int precision = 6) {
  std::ofstream out(path);
  if (!out) throw ParseError("parse-error: cannot write '" + path + "'");
  out << "velocity,target,lambda_min\n";
  char buf[96];
  for (const auto& row : rows) {
    if (row.reachable)
      std::snprintf(buf, sizeof buf, "%.*g,%.*g,%.*g", precision, row.velocity_kmh,
                    precision, row.target, precision, row.lambda_min);
    else
      std::snprintf(buf, sizeof buf, "%.*g,%.*g,nan", precision, row.velocity_kmh,
                    precision, row.target);
    out << buf << '\n';
  }
}

}  // namespace ebcast
