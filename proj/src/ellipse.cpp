#include "restool/ellipse.hpp"

#include "restool/csv.hpp"
#include "restool/error.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <tuple>
#include <utility>

namespace restool {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kRad = std::numbers::pi / 180.0;

double weight_total(std::span<const Point2> points, std::span<const double> weights) {
  if (points.size() != weights.size()) throw DataError("points and weights differ in length");
  if (points.empty()) throw NumericError("no points");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw NumericError("ellipse weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw NumericError("ellipse weights sum to zero");
  return total;
}

} // namespace

Point2 weighted_center(std::span<const Point2> points, std::span<const double> weights) {
  const double total = weight_total(points, weights);
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sx += weights[i] * points[i].x;
    sy += weights[i] * points[i].y;
  }
  return {sx / total, sy / total};
}

EllipseSummary sd_ellipse(std::span<const Point2> points, std::span<const double> weights) {
  if (points.size() < 3) throw NumericError("standard deviational ellipse needs at least 3 points");
  const double total = weight_total(points, weights);
  EllipseSummary e;
  e.center = weighted_center(points, weights);

  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i].x - e.center.x;
    const double dy = points[i].y - e.center.y;
    sxx += weights[i] * dx * dx;
    syy += weights[i] * dy * dy;
    sxy += weights[i] * dx * dy;
  }

  const double scale = sxx + syy;
  const double diff = sxx - syy;
  double theta = 0.0;
  if (std::abs(sxy) <= 1e-15 * scale) {
    if (std::abs(diff) <= 1e-12 * scale) {
      e.isotropic = true;
    } else {
      theta = diff > 0.0 ? 90.0 : 0.0;
    }
  } else {
    theta = std::atan((diff + std::sqrt(diff * diff + 4.0 * sxy * sxy)) / (2.0 * sxy)) * kDeg;
  }
  if (theta < 0.0) theta += 180.0;

  auto spreads = [&](double az_deg) {
    const double s = std::sin(az_deg * kRad);
    const double c = std::cos(az_deg * kRad);
    double along = 0.0;
    double across = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double dx = points[i].x - e.center.x;
      const double dy = points[i].y - e.center.y;
      const double a = dx * s + dy * c;
      const double b = dx * c - dy * s;
      along += weights[i] * a * a;
      across += weights[i] * b * b;
    }
    return std::pair{std::sqrt(along / total), std::sqrt(across / total)};
  };

  auto [along, across] = spreads(theta);
  if (along < across && !e.isotropic) {
    theta = theta >= 90.0 ? theta - 90.0 : theta + 90.0;
    std::tie(along, across) = spreads(theta);
  }
  e.azimuth_deg = theta;
  e.semi_major_km = std::max(along, across);
  e.semi_minor_km = std::min(along, across);
  e.area_km2 = std::numbers::pi * e.semi_major_km * e.semi_minor_km;
  e.degenerate = e.semi_minor_km <= 1e-12 * e.semi_major_km;
  return e;
}

double azimuth_difference(double a_deg, double b_deg) noexcept {
  double d = std::fmod(b_deg - a_deg, 180.0);
  if (d <= -90.0) d += 180.0;
  if (d > 90.0) d -= 180.0;
  return d;
}

EllipseTrajectory ellipse_trajectory(const ScoreSeries& series, const GeometrySet& geometry,
                                     const std::vector<int>& years) {
  const auto geo = geometry.aligned(series.regions);
  std::vector<Point2> points;
  points.reserve(geo.size());
  for (const auto& g : geo) points.push_back({g.x_km, g.y_km});

  const std::vector<int>& wanted = years.empty() ? series.years : years;
  EllipseTrajectory out;
  for (int year : wanted) {
    const auto k = series.year_index(year);
    if (!k) throw DataError("no scores for ellipse year " + std::to_string(year), "ellipse.years");
    const auto w = series.year_slice(*k);
    auto e = sd_ellipse(points, w);
    if (e.degenerate) throw NumericError("ellipse for " + std::to_string(year) + " is degenerate (collinear points)");
    e.year = year;
    if (geometry.projection) {
      const auto [lon, lat] = geometry.projection->inverse(e.center.x, e.center.y);
      e.center_lon = lon;
      e.center_lat = lat;
    }
    out.ellipses.push_back(e);
  }

  for (std::size_t n = 1; n < out.ellipses.size(); ++n) {
    const auto& a = out.ellipses[n - 1];
    const auto& b = out.ellipses[n];
    CenterShift s;
    s.from_year = a.year;
    s.to_year = b.year;
    const double dx = b.center.x - a.center.x;
    const double dy = b.center.y - a.center.y;
    s.distance_km = std::hypot(dx, dy);
    if (s.distance_km > 0.0) {
      s.bearing_deg = std::atan2(dx, dy) * kDeg;
      if (s.bearing_deg < 0.0) s.bearing_deg += 360.0;
    }
    s.azimuth_change_deg = azimuth_difference(a.azimuth_deg, b.azimuth_deg);
    out.net_azimuth_change_deg += s.azimuth_change_deg;
    out.shifts.push_back(s);
  }
  return out;
}

void write_ellipses(const EllipseTrajectory& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string(), path.string());
  csv::write_row(out, {"year", "center_lon", "center_lat", "semi_major_km", "semi_minor_km", "azimuth_deg",
                       "area_km2"});
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); };
  for (const auto& e : t.ellipses) {
    csv::write_row(out, {std::to_string(e.year), opt(e.center_lon), opt(e.center_lat),
                         csv::format_number(e.semi_major_km), csv::format_number(e.semi_minor_km),
                         csv::format_number(e.azimuth_deg), csv::format_number(e.area_km2)});
  }
}

void write_trajectory(const EllipseTrajectory& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string(), path.string());
  csv::write_row(out, {"year", "center_x_km", "center_y_km", "isotropic", "shift_km", "bearing_deg",
                       "azimuth_change_deg"});
  for (std::size_t n = 0; n < t.ellipses.size(); ++n) {
    const auto& e = t.ellipses[n];
    csv::Row row{std::to_string(e.year), csv::format_number(e.center.x), csv::format_number(e.center.y),
                 e.isotropic ? "1" : "0", "", "", ""};
    if (n > 0) {
      const auto& s = t.shifts[n - 1];
      row[4] = csv::format_number(s.distance_km);
      row[5] = csv::format_number(s.bearing_deg);
      row[6] = csv::format_number(s.azimuth_change_deg);
    }
    csv::write_row(out, row);
  }
}

} // namespace restool
