#include "restool/index.hpp"

#include "restool/csv.hpp"
#include "restool/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

namespace restool {

namespace {

std::vector<std::string> indicator_ids(const IndicatorPanel& panel) {
  std::vector<std::string> ids;
  for (const auto& s : panel.indicators()) ids.push_back(s.id);
  return ids;
}

void require_complete(const IndicatorPanel& panel) {
  if (panel.missing_count() != 0) {
    throw DataError("panel has " + std::to_string(panel.missing_count()) + " missing cells; fill before normalizing");
  }
}

double scale(double x, double lo, double hi, Direction d) {
  return d == Direction::Positive ? (x - lo) / (hi - lo) : (hi - x) / (hi - lo);
}

} // namespace

NormalizedPanel::NormalizedPanel(std::vector<std::string> regions, std::vector<std::string> indicators,
                                 std::vector<int> years, NormalizationMode mode)
    : regions_(std::move(regions)),
      indicators_(std::move(indicators)),
      years_(std::move(years)),
      mode_(mode),
      values_(regions_.size() * indicators_.size() * years_.size(), 0.0) {}

std::string to_string(NormalizationMode m) {
  switch (m) {
    case NormalizationMode::MinMaxPerYear: return "minmax_per_year";
    case NormalizationMode::MinMaxPooled: return "minmax_pooled";
    case NormalizationMode::FixedBase: return "fixed_base";
  }
  return "unknown";
}

NormalizedPanel normalize_minmax(const IndicatorPanel& panel, MinMaxScope scope) {
  require_complete(panel);
  const auto mode = scope == MinMaxScope::PerYear ? NormalizationMode::MinMaxPerYear : NormalizationMode::MinMaxPooled;
  NormalizedPanel out(panel.regions(), indicator_ids(panel), panel.years(), mode);
  const std::size_t R = panel.region_count();
  const std::size_t K = panel.year_count();

  for (std::size_t j = 0; j < panel.indicator_count(); ++j) {
    const Direction d = panel.indicators()[j].attribute;
    // Per-year scope visits each year as its own block; pooled uses one block.
    const std::size_t blocks = scope == MinMaxScope::PerYear ? K : 1;
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t k0 = scope == MinMaxScope::PerYear ? b : 0;
      const std::size_t k1 = scope == MinMaxScope::PerYear ? b + 1 : K;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t k = k0; k < k1; ++k) {
          lo = std::min(lo, panel.value(i, j, k));
          hi = std::max(hi, panel.value(i, j, k));
        }
      }
      if (!(hi > lo)) {
        std::string where = "indicator " + panel.indicators()[j].id;
        if (scope == MinMaxScope::PerYear) where += " in " + std::to_string(panel.first_year() + static_cast<int>(b));
        throw NumericError(where + " has zero range");
      }
      for (std::size_t i = 0; i < R; ++i) {
        for (std::size_t k = k0; k < k1; ++k) out.at(i, j, k) = scale(panel.value(i, j, k), lo, hi, d);
      }
    }
  }
  return out;
}

NormalizedPanel normalize_fixed_base(const IndicatorPanel& panel, int base_year) {
  require_complete(panel);
  const auto base = panel.year_index(base_year);
  if (!base) {
    throw ConfigError("base year " + std::to_string(base_year) + " outside panel years " +
                          std::to_string(panel.first_year()) + "-" + std::to_string(panel.last_year()),
                      "normalization.base_year");
  }
  NormalizedPanel out(panel.regions(), indicator_ids(panel), panel.years(), NormalizationMode::FixedBase);
  for (std::size_t j = 0; j < panel.indicator_count(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < panel.region_count(); ++i) {
      lo = std::min(lo, panel.value(i, j, *base));
      hi = std::max(hi, panel.value(i, j, *base));
    }
    if (!(hi > lo)) {
      throw NumericError("indicator " + panel.indicators()[j].id + " has zero range in base year " +
                         std::to_string(base_year));
    }
    const Direction d = panel.indicators()[j].attribute;
    for (std::size_t i = 0; i < panel.region_count(); ++i) {
      for (std::size_t k = 0; k < panel.year_count(); ++k) out.at(i, j, k) = scale(panel.value(i, j, k), lo, hi, d);
    }
  }
  return out;
}

double WeightVector::sum() const noexcept {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

WeightVector entropy_weights(const NormalizedPanel& norm) {
  const std::size_t R = norm.regions().size();
  const std::size_t J = norm.indicators().size();
  const std::size_t K = norm.years().size();
  const std::size_t n = R * K;
  if (n < 2) throw NumericError("entropy weights need at least two observations");
  const double inv_log_n = 1.0 / std::log(static_cast<double>(n));

  std::vector<double> divergence(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t k = 0; k < K; ++k) total += std::max(0.0, norm.at(i, j, k));
    }
    if (total <= 0.0) continue; // no mass: carries no information
    double h = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t k = 0; k < K; ++k) {
        const double p = std::max(0.0, norm.at(i, j, k)) / total;
        if (p > 0.0) h -= p * std::log(p);
      }
    }
    const double e = std::clamp(h * inv_log_n, 0.0, 1.0);
    divergence[j] = 1.0 - e;
  }

  double dsum = 0.0;
  for (double d : divergence) dsum += d;
  // Dispersion below rounding noise counts as none.
  if (!(dsum > 1e-12)) throw NumericError("all indicators are constant; entropy weights undefined");

  WeightVector w{norm.indicators(), {}};
  w.weights.reserve(J);
  for (double d : divergence) w.weights.push_back(d / dsum);
  return w;
}

WeightVector weights_from_specs(const std::vector<IndicatorSpec>& specs) {
  WeightVector w;
  for (const auto& s : specs) {
    if (!s.weight) throw ConfigError("indicator " + s.id + " has no weight in the spec file", "weights.source");
    w.indicators.push_back(s.id);
    w.weights.push_back(*s.weight);
  }
  return w;
}

WeightVector load_weights(const std::filesystem::path& path, const std::vector<std::string>& indicator_order) {
  const std::string src = path.string();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + src, src);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(src + ": " + e.what(), src);
  }
  if (!doc.is_object()) throw DataError(src + ": expected an object {indicator_id: weight}", src);
  WeightVector w;
  for (const auto& id : indicator_order) {
    if (!doc.contains(id) || !doc[id].is_number()) throw DataError(src + ": no weight for indicator " + id, src);
    const double v = doc[id].get<double>();
    if (!(v >= 0.0 && v <= 1.0)) throw DataError(src + ": weight of " + id + " outside [0,1]", src);
    w.indicators.push_back(id);
    w.weights.push_back(v);
  }
  if (doc.size() != indicator_order.size()) throw DataError(src + ": weights for unknown indicators", src);
  if (std::abs(w.sum() - 1.0) > kWeightFileTolerance) {
    throw DataError(src + ": weights sum to " + csv::format_number(w.sum()), src);
  }
  return w;
}

void write_weights(const WeightVector& w, const std::filesystem::path& path) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (std::size_t j = 0; j < w.indicators.size(); ++j) doc[w.indicators[j]] = w.weights[j];
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string(), path.string());
  out << doc.dump(2) << '\n';
}

std::optional<std::size_t> ScoreSeries::year_index(int year) const noexcept {
  const auto it = std::find(years.begin(), years.end(), year);
  if (it == years.end()) return std::nullopt;
  return static_cast<std::size_t>(it - years.begin());
}

std::vector<double> ScoreSeries::year_slice(std::size_t year) const {
  std::vector<double> out(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i) out[i] = at(i, year);
  return out;
}

ScoreSeries aggregate_scores(const NormalizedPanel& norm, const WeightVector& w) {
  const std::size_t J = norm.indicators().size();
  if (w.weights.size() != J || w.indicators.size() != J) {
    throw DataError("weight vector covers " + std::to_string(w.weights.size()) + " indicators, panel has " +
                    std::to_string(J));
  }
  // Align weights by id; a permuted weight file is fine, a foreign id is not.
  std::vector<double> aligned(J);
  for (std::size_t j = 0; j < J; ++j) {
    const auto it = std::find(w.indicators.begin(), w.indicators.end(), norm.indicators()[j]);
    if (it == w.indicators.end()) throw DataError("no weight for indicator " + norm.indicators()[j]);
    aligned[j] = w.weights[static_cast<std::size_t>(it - w.indicators.begin())];
  }

  ScoreSeries s;
  s.regions = norm.regions();
  s.years = norm.years();
  const std::size_t R = s.regions.size();
  const std::size_t K = s.years.size();
  s.scores.assign(R * K, 0.0);
  s.levels.assign(R * K, std::nullopt);
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      double q = 0.0;
      for (std::size_t j = 0; j < J; ++j) q += aligned[j] * norm.at(i, j, k);
      s.scores[i * K + k] = q;
    }
  }
  return s;
}

void write_scores(const ScoreSeries& s, const std::filesystem::path& path, int class_count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string(), path.string());
  csv::write_row(out, {"region", "year", "score", "level"});
  const std::size_t K = s.years.size();
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const auto& lvl = s.levels.empty() ? std::optional<int>{} : s.levels[i * K + k];
      csv::write_row(out, {s.regions[i], std::to_string(s.years[k]), csv::format_number(s.scores[i * K + k]),
                           lvl ? level_label(*lvl, static_cast<std::size_t>(class_count)) : std::string()});
    }
  }
}

ScoreSeries read_scores(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const std::string src = path.string();
  const auto c_region = table.column("region", src);
  const auto c_year = table.column("year", src);
  const auto c_score = table.column("score", src);

  ScoreSeries s;
  std::unordered_map<std::string, std::size_t> region_pos;
  std::set<int> years;
  struct Row {
    std::size_t region;
    int year;
    double score;
  };
  std::vector<Row> rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = src + ":" + std::to_string(table.lines[r]);
    if (region_pos.emplace(row[c_region], s.regions.size()).second) s.regions.push_back(row[c_region]);
    const int year = static_cast<int>(csv::parse_integer(row[c_year], where));
    years.insert(year);
    rows.push_back({region_pos.at(row[c_region]), year, csv::parse_number(row[c_score], where)});
  }
  s.years.assign(years.begin(), years.end());
  const std::size_t K = s.years.size();
  s.scores.assign(s.regions.size() * K, std::nan(""));
  s.levels.assign(s.scores.size(), std::nullopt);
  std::vector<char> seen(s.scores.size(), 0);
  for (const auto& row : rows) {
    const std::size_t k = *s.year_index(row.year);
    const std::size_t slot = row.region * K + k;
    if (seen[slot]) throw DataError(src + ": duplicate score for " + s.regions[row.region], src);
    seen[slot] = 1;
    s.scores[slot] = row.score;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw DataError(src + ": incomplete score table", src);
  return s;
}

} // namespace restool
