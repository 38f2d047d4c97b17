#include "restool/density.hpp"

#include "restool/error.hpp"
#include "restool/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace restool {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double phi(double u) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

void check_grid(std::span<const double> grid, const char* axis) {
  if (grid.empty()) throw DataError(std::string(axis) + " grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DataError(std::string(axis) + " grid must be strictly increasing");
  }
}

void check_bandwidth(double h, const char* axis) {
  if (!(h > 0.0) || !std::isfinite(h)) throw NumericError(std::string(axis) + " bandwidth must be positive");
}

/// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

} // namespace

std::string to_string(PairMode m) {
  switch (m) {
    case PairMode::Unconditional: return "unconditional";
    case PairMode::SpatialStatic: return "spatial_static";
    case PairMode::SpatialDynamic: return "spatial_dynamic";
  }
  return "unknown";
}

PairMode parse_pair_mode(const std::string& s) {
  if (s == "unconditional") return PairMode::Unconditional;
  if (s == "spatial_static") return PairMode::SpatialStatic;
  if (s == "spatial_dynamic") return PairMode::SpatialDynamic;
  throw ConfigError("unknown density mode '" + s + "'", "density.modes");
}

std::vector<double> ObservationPairs::xs() const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.x);
  return out;
}

std::vector<double> ObservationPairs::ys() const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.y);
  return out;
}

ObservationPairs build_pairs(const ScoreSeries& scores, const SpatialWeights& weights, PairMode mode, int lag) {
  ObservationPairs out;
  out.mode = mode;
  const bool lagged = mode != PairMode::SpatialStatic;
  out.lag = lagged ? lag : 0;
  const std::size_t R = scores.regions.size();
  const std::size_t K = scores.years.size();
  if (lagged) {
    if (lag < 1) throw ConfigError("lag must be at least 1 year", "density.delta");
    if (K < static_cast<std::size_t>(lag) + 1) {
      throw DataError("series spans " + std::to_string(K) + " years, lag " + std::to_string(lag) + " needs " +
                      std::to_string(lag + 1));
    }
  }
  const bool spatial = mode != PairMode::Unconditional;
  if (spatial && weights.regions != scores.regions) {
    throw DataError("spatial weights and scores list different regions");
  }

  const std::size_t offset = lagged ? static_cast<std::size_t>(lag) : 0;
  std::vector<std::vector<double>> slices(K);
  for (std::size_t k = 0; k < K; ++k) slices[k] = scores.year_slice(k);

  for (std::size_t i = 0; i < R; ++i) {
    if (spatial && weights.is_island(i)) {
      out.excluded_islands.push_back(scores.regions[i]);
      continue;
    }
    for (std::size_t k = 0; k + offset < K; ++k) {
      ObservationPair p;
      p.region = i;
      p.year = scores.years[k];
      p.x = spatial ? weights.lag(i, slices[k]) : slices[k][i];
      p.y = slices[k + offset][i];
      out.pairs.push_back(p);
    }
  }
  return out;
}

double silverman_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw NumericError("bandwidth needs at least 2 samples");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw NumericError("bandwidth undefined for samples with zero dispersion");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw DataError("grid needs at least 2 points over a positive span");
  std::vector<double> g(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

std::vector<double> padded_grid(std::span<const double> samples, double h, double pad, std::size_t n) {
  if (samples.empty()) throw DataError("grid needs samples");
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  return linear_grid(*lo - pad * h, *hi + pad * h, n);
}

DensityGrid kde_1d(std::span<const double> samples, double h, std::span<const double> grid) {
  if (samples.empty()) throw DataError("kernel density of an empty sample");
  check_bandwidth(h, "x");
  check_grid(grid, "x");
  DensityGrid g;
  g.kind = DensityKind::Marginal;
  g.x_grid.assign(grid.begin(), grid.end());
  g.values.assign(grid.size(), 0.0);
  g.h_x = h;
  g.n_obs = samples.size();
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h);
  parallel_for(grid.size(), [&](std::size_t ix) {
    double s = 0.0;
    for (double v : samples) s += phi((v - grid[ix]) / h);
    g.values[ix] = s * norm;
  });
  return g;
}

DensityGrid kde_2d(std::span<const double> xs, std::span<const double> ys, double h_x, double h_y,
                   std::span<const double> x_grid, std::span<const double> y_grid) {
  if (xs.size() != ys.size()) throw DataError("x and y samples differ in length");
  if (xs.empty()) throw DataError("kernel density of an empty sample");
  check_bandwidth(h_x, "x");
  check_bandwidth(h_y, "y");
  check_grid(x_grid, "x");
  check_grid(y_grid, "y");
  const std::size_t N = xs.size();
  const std::size_t nx = x_grid.size();
  const std::size_t ny = y_grid.size();

  // y-kernel table, sample-major: ky[i * ny + iy].
  std::vector<double> ky(N * ny);
  parallel_for(N, [&](std::size_t i) {
    for (std::size_t iy = 0; iy < ny; ++iy) ky[i * ny + iy] = phi((ys[i] - y_grid[iy]) / h_y);
  });

  DensityGrid g;
  g.kind = DensityKind::Joint;
  g.x_grid.assign(x_grid.begin(), x_grid.end());
  g.y_grid.assign(y_grid.begin(), y_grid.end());
  g.values.assign(nx * ny, 0.0);
  g.h_x = h_x;
  g.h_y = h_y;
  g.n_obs = N;
  const double norm = 1.0 / (static_cast<double>(N) * h_x * h_y);
  parallel_for(nx, [&](std::size_t ix) {
    double* row = g.values.data() + ix * ny;
    for (std::size_t i = 0; i < N; ++i) {
      const double kx = phi((xs[i] - x_grid[ix]) / h_x);
      if (kx == 0.0) continue;
      const double* k = ky.data() + i * ny;
      for (std::size_t iy = 0; iy < ny; ++iy) row[iy] += kx * k[iy];
    }
    for (std::size_t iy = 0; iy < ny; ++iy) row[iy] *= norm;
  });
  return g;
}

DensityGrid kde_2d(const ObservationPairs& pairs, double h_x, double h_y, std::span<const double> x_grid,
                   std::span<const double> y_grid) {
  const auto xs = pairs.xs();
  const auto ys = pairs.ys();
  auto g = kde_2d(xs, ys, h_x, h_y, x_grid, y_grid);
  g.mode = to_string(pairs.mode);
  if (pairs.mode != PairMode::SpatialStatic) g.delta = pairs.lag;
  return g;
}

DensityGrid conditional_density(std::span<const double> xs, std::span<const double> ys, double h_x, double h_y,
                                std::span<const double> x_grid, std::span<const double> y_grid) {
  auto g = kde_2d(xs, ys, h_x, h_y, x_grid, y_grid);
  g.kind = DensityKind::Conditional;
  const auto marginal = kde_1d(xs, h_x, x_grid);
  const double peak = *std::max_element(marginal.values.begin(), marginal.values.end());
  const double floor = kConditionalSupportFloor * peak;
  const std::size_t ny = g.y_grid.size();
  for (std::size_t ix = 0; ix < g.x_grid.size(); ++ix) {
    const double fx = marginal.values[ix];
    double* col = g.values.data() + ix * ny;
    if (!(fx > floor)) {
      g.empty_columns.push_back(ix);
      std::fill(col, col + ny, 0.0);
      continue;
    }
    for (std::size_t iy = 0; iy < ny; ++iy) col[iy] /= fx;
  }
  return g;
}

DensityGrid conditional_density(const ObservationPairs& pairs, double h_x, double h_y,
                                std::span<const double> x_grid, std::span<const double> y_grid) {
  const auto xs = pairs.xs();
  const auto ys = pairs.ys();
  auto g = conditional_density(xs, ys, h_x, h_y, x_grid, y_grid);
  g.mode = to_string(pairs.mode);
  if (pairs.mode != PairMode::SpatialStatic) g.delta = pairs.lag;
  return g;
}

double trapezoid(std::span<const double> grid, std::span<const double> values) {
  double s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) s += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
  return s;
}

void write_density_json(const DensityGrid& g, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["kind"] = g.kind == DensityKind::Marginal ? "marginal" : g.kind == DensityKind::Joint ? "joint" : "conditional";
  doc["mode"] = g.mode;
  doc["x_grid"] = g.x_grid;
  if (!g.y_grid.empty()) doc["y_grid"] = g.y_grid;
  doc["values"] = g.values;
  doc["h_x"] = g.h_x;
  if (g.h_y) doc["h_y"] = *g.h_y;
  doc["n_obs"] = g.n_obs;
  if (g.delta) doc["delta"] = *g.delta;
  if (g.kind == DensityKind::Conditional) doc["empty_columns"] = g.empty_columns;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string(), path.string());
  out << doc.dump() << '\n';
}

} // namespace restool
