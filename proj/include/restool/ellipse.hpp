#pragma once

#include "restool/index.hpp"
#include "restool/panel.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace restool {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Weighted mean center. Weights must be non-negative with a positive sum.
Point2 weighted_center(std::span<const Point2> points, std::span<const double> weights);

/// One-standard-deviation ellipse of weighted points.
struct EllipseSummary {
  int year = 0;
  Point2 center;
  std::optional<double> center_lon;
  std::optional<double> center_lat;
  /// Direction of the long axis, degrees clockwise from north, in [0, 180).
  double azimuth_deg = 0.0;
  double semi_major_km = 0.0;
  double semi_minor_km = 0.0;
  /// pi * semi_major * semi_minor
  double area_km2 = 0.0;
  /// Equal second moments and zero covariance: orientation undefined, azimuth reported as 0.
  bool isotropic = false;
  /// Collinear points: the short axis vanishes.
  bool degenerate = false;
};

/// Mean center, azimuth and semi-axes with the classical tan(theta) rule.
/// Throws NumericError for fewer than 3 points or a non-positive weight sum;
/// collinear input is returned with `degenerate` set.
EllipseSummary sd_ellipse(std::span<const Point2> points, std::span<const double> weights);

struct CenterShift {
  int from_year = 0;
  int to_year = 0;
  double distance_km = 0.0;
  /// Compass bearing of the displacement, degrees clockwise from north in [0, 360).
  /// Zero when the center did not move.
  double bearing_deg = 0.0;
  double azimuth_change_deg = 0.0;
};

struct EllipseTrajectory {
  std::vector<EllipseSummary> ellipses;
  std::vector<CenterShift> shifts;
  /// Sum of the per-step azimuth changes; positive means clockwise rotation overall.
  double net_azimuth_change_deg = 0.0;
};

/// Per-year ellipses weighted by each year's scores. A degenerate ellipse in
/// any requested year is a NumericError. Empty `years` means every year.
EllipseTrajectory ellipse_trajectory(const ScoreSeries& series, const GeometrySet& geometry,
                                     const std::vector<int>& years);

/// Signed difference b - a folded into (-90, 90].
double azimuth_difference(double a_deg, double b_deg) noexcept;

/// Table-shaped CSV: year,center_lon,center_lat,semi_major_km,semi_minor_km,azimuth_deg,area_km2.
void write_ellipses(const EllipseTrajectory& t, const std::filesystem::path& path);
/// Projected centers plus year-over-year shift distance, bearing and azimuth change.
void write_trajectory(const EllipseTrajectory& t, const std::filesystem::path& path);

} // namespace restool
