#include "restool/panel.hpp"

#include "restool/csv.hpp"
#include "restool/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

namespace restool {

namespace {

using json = nlohmann::json;

std::string cell_name(const std::string& region, int year, const std::string& item) {
  return "(" + region + "," + std::to_string(year) + "," + item + ")";
}

Direction parse_direction(const json& v, const std::string& context) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "+" || s == "positive") return Direction::Positive;
    if (s == "-" || s == "negative") return Direction::Negative;
  }
  throw DataError(context + ": attribute must be \"+\" or \"-\"");
}

struct RawCell {
  std::string region;
  int year;
  std::string item;
  std::optional<double> value;
  std::size_t line;
};

std::vector<RawCell> read_long_rows(const std::filesystem::path& path, const std::string& item_column) {
  const auto table = csv::read_file(path);
  const std::string src = path.string();
  const auto c_region = table.column("region", src);
  const auto c_year = table.column("year", src);
  const auto c_item = table.column(item_column, src);
  const auto c_value = table.column("value", src);

  std::vector<RawCell> cells;
  cells.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = src + ":" + std::to_string(table.lines[r]);
    RawCell cell;
    cell.region = row[c_region];
    cell.item = row[c_item];
    if (cell.region.empty() || cell.item.empty()) throw DataError(where + ": empty region or " + item_column, src);
    cell.year = static_cast<int>(csv::parse_integer(row[c_year], where));
    if (!row[c_value].empty()) cell.value = csv::parse_number(row[c_value], where);
    cell.line = table.lines[r];
    cells.push_back(std::move(cell));
  }
  if (cells.empty()) throw DataError(src + ": no data rows", src);
  return cells;
}

IndicatorPanel assemble(const std::vector<RawCell>& cells, std::vector<IndicatorSpec> specs,
                        const std::string& src) {
  std::vector<std::string> regions;
  std::unordered_map<std::string, std::size_t> region_pos;
  std::set<int> years;
  for (const auto& c : cells) {
    if (region_pos.emplace(c.region, regions.size()).second) regions.push_back(c.region);
    years.insert(c.year);
  }
  const int first = *years.begin();
  const int last = *years.rbegin();
  if (static_cast<std::size_t>(last - first + 1) != years.size()) {
    for (int y = first; y <= last; ++y) {
      if (!years.count(y)) throw DataError(src + ": year gap, no rows for " + std::to_string(y), src);
    }
  }

  std::unordered_map<std::string, std::size_t> item_pos;
  for (std::size_t j = 0; j < specs.size(); ++j) item_pos.emplace(specs[j].id, j);

  IndicatorPanel panel(std::move(regions), std::move(specs), first, years.size());
  std::vector<char> seen(panel.cell_count(), 0);
  for (const auto& c : cells) {
    const auto it = item_pos.find(c.item);
    if (it == item_pos.end()) {
      throw DataError(src + ":" + std::to_string(c.line) + ": indicator '" + c.item + "' not in spec", src);
    }
    const std::size_t i = region_pos.at(c.region);
    const std::size_t j = it->second;
    const auto k = static_cast<std::size_t>(c.year - first);
    const std::size_t slot = (i * panel.indicator_count() + j) * panel.year_count() + k;
    if (seen[slot]) {
      throw DataError(src + ":" + std::to_string(c.line) + ": duplicate cell " + cell_name(c.region, c.year, c.item),
                      src);
    }
    seen[slot] = 1;
    if (c.value) panel.set(i, j, k, *c.value);
  }
  return panel;
}

} // namespace

IndicatorPanel::IndicatorPanel(std::vector<std::string> regions, std::vector<IndicatorSpec> indicators,
                               int first_year, std::size_t year_count)
    : regions_(std::move(regions)),
      indicators_(std::move(indicators)),
      first_year_(first_year),
      year_count_(year_count),
      values_(regions_.size() * indicators_.size() * year_count, std::nan("")),
      missing_(values_.size(), 1) {}

std::vector<int> IndicatorPanel::years() const {
  std::vector<int> out(year_count_);
  for (std::size_t k = 0; k < year_count_; ++k) out[k] = first_year_ + static_cast<int>(k);
  return out;
}

std::size_t IndicatorPanel::missing_count() const noexcept {
  return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), 1));
}

std::optional<std::size_t> IndicatorPanel::year_index(int year) const noexcept {
  if (year < first_year_ || year > last_year()) return std::nullopt;
  return static_cast<std::size_t>(year - first_year_);
}

std::optional<std::size_t> IndicatorPanel::region_index(const std::string& id) const noexcept {
  const auto it = std::find(regions_.begin(), regions_.end(), id);
  if (it == regions_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - regions_.begin());
}

std::optional<std::size_t> IndicatorPanel::indicator_index(const std::string& id) const noexcept {
  for (std::size_t j = 0; j < indicators_.size(); ++j) {
    if (indicators_[j].id == id) return j;
  }
  return std::nullopt;
}

void IndicatorPanel::set(std::size_t region, std::size_t indicator, std::size_t year, double v) {
  if (!std::isfinite(v)) throw DataError("non-finite value for region " + regions_.at(region));
  const auto o = offset(region, indicator, year);
  values_[o] = v;
  missing_[o] = 0;
}

void IndicatorPanel::set_missing(std::size_t region, std::size_t indicator, std::size_t year) {
  const auto o = offset(region, indicator, year);
  values_[o] = std::nan("");
  missing_[o] = 1;
}

std::string to_string(Direction d) { return d == Direction::Positive ? "+" : "-"; }

std::vector<IndicatorSpec> load_indicator_specs(const std::filesystem::path& path) {
  const std::string src = path.string();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + src, src);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(src + ": " + e.what(), src);
  }
  if (!doc.is_array() || doc.empty()) throw DataError(src + ": expected a non-empty array of indicators", src);

  std::vector<IndicatorSpec> specs;
  std::set<std::string> ids;
  std::size_t weighted = 0;
  double weight_sum = 0.0;
  for (std::size_t n = 0; n < doc.size(); ++n) {
    const auto& e = doc[n];
    const std::string where = src + "[" + std::to_string(n) + "]";
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string()) throw DataError(where + ": missing string 'id'", src);
    IndicatorSpec spec;
    spec.id = e["id"].get<std::string>();
    if (spec.id.empty() || !ids.insert(spec.id).second) throw DataError(where + ": empty or duplicate id", src);
    spec.name = e.value("name", spec.id);
    if (!e.contains("attribute")) throw DataError(where + ": missing 'attribute'", src);
    spec.attribute = parse_direction(e["attribute"], where);
    if (e.contains("weight") && !e["weight"].is_null()) {
      if (!e["weight"].is_number()) throw DataError(where + ": weight must be a number", src);
      const double w = e["weight"].get<double>();
      if (!(w >= 0.0 && w <= 1.0)) throw DataError(where + ": weight outside [0,1]", src);
      spec.weight = w;
      weight_sum += w;
      ++weighted;
    }
    specs.push_back(std::move(spec));
  }
  if (weighted != 0 && weighted != specs.size()) throw DataError(src + ": weights given for some indicators only", src);
  if (weighted != 0 && std::abs(weight_sum - 1.0) > kWeightFileTolerance) {
    std::ostringstream msg;
    msg << src << ": weights sum to " << weight_sum << ", outside 1 +/- " << kWeightFileTolerance;
    throw DataError(msg.str(), src);
  }
  return specs;
}

IndicatorPanel load_panel(const std::filesystem::path& values_file, const std::vector<IndicatorSpec>& specs) {
  return assemble(read_long_rows(values_file, "indicator"), specs, values_file.string());
}

IndicatorPanel load_panel(const std::filesystem::path& values_file, const std::filesystem::path& spec_file) {
  return load_panel(values_file, load_indicator_specs(spec_file));
}

IndicatorPanel load_long_table(const std::filesystem::path& path, const std::string& item_column) {
  const auto cells = read_long_rows(path, item_column);
  std::vector<IndicatorSpec> specs;
  std::set<std::string> seen;
  for (const auto& c : cells) {
    if (seen.insert(c.item).second) specs.push_back({c.item, c.item, Direction::Positive, std::nullopt});
  }
  return assemble(cells, std::move(specs), path.string());
}

void write_panel(const IndicatorPanel& panel, const std::filesystem::path& path, const std::string& item_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string(), path.string());
  csv::write_row(out, {"region", "year", item_column, "value"});
  const auto years = panel.years();
  for (std::size_t i = 0; i < panel.region_count(); ++i) {
    for (std::size_t k = 0; k < panel.year_count(); ++k) {
      for (std::size_t j = 0; j < panel.indicator_count(); ++j) {
        csv::write_row(out, {panel.regions()[i], std::to_string(years[k]), panel.indicators()[j].id,
                             panel.missing(i, j, k) ? std::string() : csv::format_number(panel.value(i, j, k))});
      }
    }
  }
}

FillReport fill_missing_report(const IndicatorPanel& panel) {
  FillReport report{panel, {}};
  IndicatorPanel& out = report.panel;
  const std::size_t K = panel.year_count();

  for (std::size_t i = 0; i < panel.region_count(); ++i) {
    for (std::size_t j = 0; j < panel.indicator_count(); ++j) {
      std::vector<std::size_t> obs;
      for (std::size_t k = 0; k < K; ++k) {
        if (!panel.missing(i, j, k)) obs.push_back(k);
      }
      if (obs.size() == K) continue;
      if (obs.size() < 2) {
        throw DataError("cannot fill series (" + panel.regions()[i] + "," + panel.indicators()[j].id + "): " +
                        std::to_string(obs.size()) + " observed value(s), need 2");
      }

      // Interior gaps.
      for (std::size_t n = 0; n + 1 < obs.size(); ++n) {
        const std::size_t a = obs[n];
        const std::size_t b = obs[n + 1];
        const double va = panel.value(i, j, a);
        const double vb = panel.value(i, j, b);
        for (std::size_t k = a + 1; k < b; ++k) {
          const double t = static_cast<double>(k - a) / static_cast<double>(b - a);
          const double v = va + t * (vb - va);
          out.set(i, j, k, v);
          report.filled.push_back({i, j, k, v, false});
        }
      }

      // Leading/trailing gaps from the growth of the observed segment.
      const std::size_t f = obs.front();
      const std::size_t l = obs.back();
      const double vf = panel.value(i, j, f);
      const double vl = panel.value(i, j, l);
      const double span = static_cast<double>(l - f);
      const bool compound = (vf > 0.0 && vl > 0.0) || (vf < 0.0 && vl < 0.0);
      const double factor = compound ? std::pow(vl / vf, 1.0 / span) : 1.0;
      const double step = (vl - vf) / span;
      auto extrapolate = [&](double base, double years_away) {
        return compound ? base * std::pow(factor, years_away) : base + step * years_away;
      };
      for (std::size_t k = 0; k < f; ++k) {
        const double v = extrapolate(vf, -static_cast<double>(f - k));
        out.set(i, j, k, v);
        report.filled.push_back({i, j, k, v, true});
      }
      for (std::size_t k = l + 1; k < K; ++k) {
        const double v = extrapolate(vl, static_cast<double>(k - l));
        out.set(i, j, k, v);
        report.filled.push_back({i, j, k, v, true});
      }
    }
  }
  return report;
}

IndicatorPanel fill_missing(const IndicatorPanel& panel) { return fill_missing_report(panel).panel; }

std::pair<double, double> Projection::forward(double lon_deg, double lat_deg) const noexcept {
  constexpr double rad = std::numbers::pi / 180.0;
  const double x = radius_km * (lon_deg - lon0_deg) * rad * std::cos(lat0_deg * rad);
  const double y = radius_km * (lat_deg - lat0_deg) * rad;
  return {x, y};
}

std::pair<double, double> Projection::inverse(double x_km, double y_km) const noexcept {
  constexpr double deg = 180.0 / std::numbers::pi;
  constexpr double rad = std::numbers::pi / 180.0;
  const double lon = lon0_deg + x_km / (radius_km * std::cos(lat0_deg * rad)) * deg;
  const double lat = lat0_deg + y_km / radius_km * deg;
  return {lon, lat};
}

std::vector<RegionGeometry> GeometrySet::aligned(const std::vector<std::string>& order) const {
  std::unordered_map<std::string, const RegionGeometry*> by_id;
  for (const auto& g : regions) by_id.emplace(g.region, &g);
  std::vector<RegionGeometry> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("no centroid for region '" + id + "'", "centroids");
    out.push_back(*it->second);
  }
  return out;
}

GeometrySet load_centroids(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const std::string src = path.string();
  const auto has = [&](const char* name) {
    return std::find(table.header.begin(), table.header.end(), name) != table.header.end();
  };
  const bool geographic = has("lon") && has("lat");
  const bool projected = has("x_km") && has("y_km");
  if (!geographic && !projected) throw DataError(src + ": expected columns lon,lat or x_km,y_km", src);

  GeometrySet set;
  const auto c_region = table.column("region", src);
  std::set<std::string> ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = src + ":" + std::to_string(table.lines[r]);
    RegionGeometry g;
    g.region = row[c_region];
    if (g.region.empty() || !ids.insert(g.region).second) throw DataError(where + ": empty or duplicate region", src);
    if (geographic) {
      const double lon = csv::parse_number(row[table.column("lon", src)], where);
      const double lat = csv::parse_number(row[table.column("lat", src)], where);
      if (lon < -180.0 || lon > 180.0 || lat < -90.0 || lat > 90.0) {
        throw DataError(where + ": coordinates out of range", src);
      }
      g.lon = lon;
      g.lat = lat;
    } else {
      g.x_km = csv::parse_number(row[table.column("x_km", src)], where);
      g.y_km = csv::parse_number(row[table.column("y_km", src)], where);
    }
    set.regions.push_back(std::move(g));
  }
  if (set.regions.empty()) throw DataError(src + ": no centroids", src);

  if (geographic) {
    Projection p;
    double lon_sum = 0.0;
    double lat_sum = 0.0;
    for (const auto& g : set.regions) {
      lon_sum += *g.lon;
      lat_sum += *g.lat;
    }
    p.lon0_deg = lon_sum / static_cast<double>(set.regions.size());
    p.lat0_deg = lat_sum / static_cast<double>(set.regions.size());
    for (auto& g : set.regions) std::tie(g.x_km, g.y_km) = p.forward(*g.lon, *g.lat);
    set.projection = p;
  }
  return set;
}

bool SpatialWeights::is_island(std::size_t i) const noexcept {
  const std::size_t n = regions.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (matrix[i * n + j] != 0.0) return false;
  }
  return true;
}

double SpatialWeights::lag(std::size_t i, const std::vector<double>& v) const noexcept {
  const std::size_t n = regions.size();
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += matrix[i * n + j] * v[j];
  return s;
}

std::vector<std::pair<std::string, std::string>> load_adjacency(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const std::string src = path.string();
  const auto a = table.column("region_a", src);
  const auto b = table.column("region_b", src);
  std::vector<std::pair<std::string, std::string>> pairs;
  pairs.reserve(table.rows.size());
  for (const auto& row : table.rows) pairs.emplace_back(row[a], row[b]);
  return pairs;
}

namespace {

SpatialWeights standardize(std::vector<std::string> regions, std::vector<double> binary) {
  SpatialWeights w;
  const std::size_t n = regions.size();
  w.regions = std::move(regions);
  w.matrix = std::move(binary);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_sum += w.matrix[i * n + j];
    if (row_sum == 0.0) {
      w.islands.push_back(w.regions[i]);
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) w.matrix[i * n + j] /= row_sum;
  }
  return w;
}

} // namespace

SpatialWeights build_spatial_weights(const std::vector<std::pair<std::string, std::string>>& pairs,
                                     const std::vector<std::string>& regions) {
  const std::size_t n = regions.size();
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i) pos.emplace(regions[i], i);
  std::vector<double> binary(n * n, 0.0);
  for (const auto& [a, b] : pairs) {
    const auto ia = pos.find(a);
    const auto ib = pos.find(b);
    if (ia == pos.end()) throw DataError("adjacency references unknown region '" + a + "'", "adjacency");
    if (ib == pos.end()) throw DataError("adjacency references unknown region '" + b + "'", "adjacency");
    if (ia->second == ib->second) continue; // zero diagonal
    binary[ia->second * n + ib->second] = 1.0;
    binary[ib->second * n + ia->second] = 1.0;
  }
  return standardize(regions, std::move(binary));
}

SpatialWeights build_spatial_weights(const std::filesystem::path& adjacency_file,
                                     const std::vector<std::string>& regions) {
  return build_spatial_weights(load_adjacency(adjacency_file), regions);
}

SpatialWeights knn_spatial_weights(const std::vector<RegionGeometry>& geometry, std::size_t k) {
  const std::size_t n = geometry.size();
  if (k == 0 || k >= n) throw DataError("k-nearest neighbours needs 0 < k < region count");
  std::vector<std::string> regions;
  for (const auto& g : geometry) regions.push_back(g.region);
  std::vector<double> binary(n * n, 0.0);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = geometry[i].x_km - geometry[j].x_km;
      const double dy = geometry[i].y_km - geometry[j].y_km;
      dist.emplace_back(dx * dx + dy * dy, j);
    }
    std::stable_sort(dist.begin(), dist.end());
    for (std::size_t m = 0; m < k; ++m) binary[i * n + dist[m].second] = 1.0;
  }
  return standardize(std::move(regions), std::move(binary));
}

} // namespace restool
