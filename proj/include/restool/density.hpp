#pragma once

#include "restool/index.hpp"
#include "restool/panel.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace restool {

enum class PairMode { Unconditional, SpatialStatic, SpatialDynamic };

std::string to_string(PairMode m);
PairMode parse_pair_mode(const std::string& s);

struct ObservationPair {
  double x = 0.0;
  double y = 0.0;
  std::size_t region = 0;
  int year = 0; // year of x
};

/// (x, y) observations for the joint and conditional densities.
///   unconditional:   x = Q_i(t),        y = Q_i(t + lag)
///   spatial_static:  x = sum_j W_ij Q_j(t), y = Q_i(t)
///   spatial_dynamic: x = sum_j W_ij Q_j(t), y = Q_i(t + lag)
struct ObservationPairs {
  PairMode mode = PairMode::Unconditional;
  int lag = 0;
  std::vector<ObservationPair> pairs;
  /// Regions left out because their weight row is empty (spatial modes only).
  std::vector<std::string> excluded_islands;

  std::vector<double> xs() const;
  std::vector<double> ys() const;
};

/// Islands are excluded from the spatial modes; the unconditional mode uses
/// every region. `weights` must list the series regions in the same order.
ObservationPairs build_pairs(const ScoreSeries& scores, const SpatialWeights& weights, PairMode mode, int lag = 3);

/// 0.9 * min(sd, IQR / 1.34) * N^(-1/5), falling back to sd when the IQR is zero.
double silverman_bandwidth(std::span<const double> samples);

/// n evenly spaced points from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, std::size_t n);
/// Grid over [min - pad * h, max + pad * h].
std::vector<double> padded_grid(std::span<const double> samples, double h, double pad, std::size_t n);

enum class DensityKind { Marginal, Joint, Conditional };

struct DensityGrid {
  DensityKind kind = DensityKind::Marginal;
  std::string mode;
  std::vector<double> x_grid;
  std::vector<double> y_grid; // empty for 1-D
  /// 1-D: values[ix]. 2-D: row-major with x as the row, values[ix * ny + iy].
  std::vector<double> values;
  double h_x = 0.0;
  std::optional<double> h_y;
  std::size_t n_obs = 0;
  std::optional<int> delta;
  /// Conditional only: columns whose marginal f(x) is below the support floor.
  std::vector<std::size_t> empty_columns;

  double at(std::size_t ix, std::size_t iy) const { return values[ix * y_grid.size() + iy]; }
};

/// Gaussian kernel density f(x) = 1/(N h) sum phi((X_i - x) / h).
DensityGrid kde_1d(std::span<const double> samples, double h, std::span<const double> grid);

/// Product Gaussian kernel joint density.
DensityGrid kde_2d(std::span<const double> xs, std::span<const double> ys, double h_x, double h_y,
                   std::span<const double> x_grid, std::span<const double> y_grid);
DensityGrid kde_2d(const ObservationPairs& pairs, double h_x, double h_y, std::span<const double> x_grid,
                   std::span<const double> y_grid);

/// Relative support floor for conditional columns: f(x) <= floor * max f(x) is empty.
inline constexpr double kConditionalSupportFloor = 1e-12;

/// g(y|x) = f(x, y) / f(x), marginal f(x) with the same h_x.
DensityGrid conditional_density(std::span<const double> xs, std::span<const double> ys, double h_x, double h_y,
                                std::span<const double> x_grid, std::span<const double> y_grid);
DensityGrid conditional_density(const ObservationPairs& pairs, double h_x, double h_y,
                                std::span<const double> x_grid, std::span<const double> y_grid);

/// Trapezoid rule over a (possibly non-uniform) grid.
double trapezoid(std::span<const double> grid, std::span<const double> values);

/// JSON document {kind, mode, x_grid, y_grid?, values, h_x, h_y?, n_obs, delta?, empty_columns?}.
void write_density_json(const DensityGrid& g, const std::filesystem::path& path);

} // namespace restool
