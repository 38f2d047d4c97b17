#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace restool {

enum class Direction { Positive, Negative };

struct IndicatorSpec {
  std::string id;
  std::string name;
  Direction attribute = Direction::Positive;
  std::optional<double> weight;
};

/// Accepted deviation of published weight sums from 1 (printed rounding).
inline constexpr double kWeightFileTolerance = 0.005;

/// Regions x indicators x years cube of raw values with a per-cell missing mask.
/// Years are consecutive integers. Storage is dense, year fastest.
class IndicatorPanel {
public:
  IndicatorPanel() = default;
  IndicatorPanel(std::vector<std::string> regions, std::vector<IndicatorSpec> indicators,
                 int first_year, std::size_t year_count);

  const std::vector<std::string>& regions() const noexcept { return regions_; }
  const std::vector<IndicatorSpec>& indicators() const noexcept { return indicators_; }
  std::vector<int> years() const;
  int first_year() const noexcept { return first_year_; }
  int last_year() const noexcept { return first_year_ + static_cast<int>(year_count_) - 1; }

  std::size_t region_count() const noexcept { return regions_.size(); }
  std::size_t indicator_count() const noexcept { return indicators_.size(); }
  std::size_t year_count() const noexcept { return year_count_; }
  std::size_t cell_count() const noexcept { return values_.size(); }
  std::size_t missing_count() const noexcept;

  /// Year position, or nullopt when outside the panel.
  std::optional<std::size_t> year_index(int year) const noexcept;
  std::optional<std::size_t> region_index(const std::string& id) const noexcept;
  std::optional<std::size_t> indicator_index(const std::string& id) const noexcept;

  double value(std::size_t region, std::size_t indicator, std::size_t year) const {
    return values_[offset(region, indicator, year)];
  }
  bool missing(std::size_t region, std::size_t indicator, std::size_t year) const {
    return missing_[offset(region, indicator, year)] != 0;
  }
  void set(std::size_t region, std::size_t indicator, std::size_t year, double v);
  void set_missing(std::size_t region, std::size_t indicator, std::size_t year);

private:
  std::size_t offset(std::size_t r, std::size_t j, std::size_t k) const noexcept {
    return (r * indicators_.size() + j) * year_count_ + k;
  }

  std::vector<std::string> regions_;
  std::vector<IndicatorSpec> indicators_;
  int first_year_ = 0;
  std::size_t year_count_ = 0;
  std::vector<double> values_;
  std::vector<char> missing_;
};

/// Spec JSON: array of {id, name, attribute: "+"|"-", weight?}. When any
/// weight is given, all must be, and their sum must be 1 within kWeightFileTolerance.
std::vector<IndicatorSpec> load_indicator_specs(const std::filesystem::path& path);

/// Long-format CSV `region,year,indicator,value`; empty value marks a missing cell.
/// Regions keep first-appearance order. Cells never mentioned are missing.
IndicatorPanel load_panel(const std::filesystem::path& values_file,
                          const std::vector<IndicatorSpec>& specs);
IndicatorPanel load_panel(const std::filesystem::path& values_file,
                          const std::filesystem::path& spec_file);

/// Same long format, but indicator ids are taken from the file itself
/// (driver tables for the detector). Attributes default to positive.
IndicatorPanel load_long_table(const std::filesystem::path& path,
                               const std::string& item_column = "indicator");

void write_panel(const IndicatorPanel& panel, const std::filesystem::path& path,
                 const std::string& item_column = "indicator");

struct FilledCell {
  std::size_t region;
  std::size_t indicator;
  std::size_t year;
  double value;
  bool extrapolated;
};

struct FillReport {
  IndicatorPanel panel;
  std::vector<FilledCell> filled;
};

/// Interior gaps: straight-line interpolation between the bracketing observed
/// years. Leading/trailing gaps: compound average annual growth between the
/// first and last observed values; where that rate is undefined (sign change
/// or zero endpoint) the average absolute annual change is used instead.
FillReport fill_missing_report(const IndicatorPanel& panel);
IndicatorPanel fill_missing(const IndicatorPanel& panel);

struct Projection {
  double lon0_deg = 0.0;
  double lat0_deg = 0.0;
  double radius_km = 6371.0088;

  /// Equirectangular (plate carree with standard parallel lat0).
  std::pair<double, double> forward(double lon_deg, double lat_deg) const noexcept;
  std::pair<double, double> inverse(double x_km, double y_km) const noexcept;
};

struct RegionGeometry {
  std::string region;
  std::optional<double> lon;
  std::optional<double> lat;
  double x_km = 0.0;
  double y_km = 0.0;
};

struct GeometrySet {
  std::vector<RegionGeometry> regions;
  /// Present when the input was geographic and projected at load time.
  std::optional<Projection> projection;

  /// Geometry reordered to `order`. Throws DataError when a region is absent.
  std::vector<RegionGeometry> aligned(const std::vector<std::string>& order) const;
};

/// Centroids CSV: `region,lon,lat` (projected equirectangularly about the mean
/// centroid) or `region,x_km,y_km` (used as is).
GeometrySet load_centroids(const std::filesystem::path& path);

/// Row-standardized, zero-diagonal, non-negative neighbour weights.
struct SpatialWeights {
  std::vector<std::string> regions;
  std::vector<double> matrix; // row-major n x n
  std::vector<std::string> islands;

  std::size_t size() const noexcept { return regions.size(); }
  double at(std::size_t i, std::size_t j) const noexcept { return matrix[i * regions.size() + j]; }
  bool is_island(std::size_t i) const noexcept;
  /// sum_j W_ij v_j
  double lag(std::size_t i, const std::vector<double>& v) const noexcept;
};

std::vector<std::pair<std::string, std::string>> load_adjacency(const std::filesystem::path& path);

/// Binary contiguity from (a,b) pairs, symmetrized then row-standardized.
/// Regions without any pair become zero rows and are listed in `islands`.
SpatialWeights build_spatial_weights(const std::vector<std::pair<std::string, std::string>>& pairs,
                                     const std::vector<std::string>& regions);
SpatialWeights build_spatial_weights(const std::filesystem::path& adjacency_file,
                                     const std::vector<std::string>& regions);

/// k nearest neighbours by projected distance (ties by region order), row-standardized.
SpatialWeights knn_spatial_weights(const std::vector<RegionGeometry>& geometry, std::size_t k);

std::string to_string(Direction d);

} // namespace restool
