#pragma once

#include "restool/panel.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace restool {

enum class NormalizationMode { MinMaxPerYear, MinMaxPooled, FixedBase };

/// Normalized indicator cube s_ij(t_k), same axes as the source panel.
class NormalizedPanel {
public:
  NormalizedPanel(std::vector<std::string> regions, std::vector<std::string> indicators, std::vector<int> years,
                  NormalizationMode mode);

  const std::vector<std::string>& regions() const noexcept { return regions_; }
  const std::vector<std::string>& indicators() const noexcept { return indicators_; }
  const std::vector<int>& years() const noexcept { return years_; }
  NormalizationMode mode() const noexcept { return mode_; }

  double at(std::size_t region, std::size_t indicator, std::size_t year) const {
    return values_[offset(region, indicator, year)];
  }
  double& at(std::size_t region, std::size_t indicator, std::size_t year) {
    return values_[offset(region, indicator, year)];
  }

private:
  std::size_t offset(std::size_t r, std::size_t j, std::size_t k) const noexcept {
    return (r * indicators_.size() + j) * years_.size() + k;
  }

  std::vector<std::string> regions_;
  std::vector<std::string> indicators_;
  std::vector<int> years_;
  NormalizationMode mode_;
  std::vector<double> values_;
};

enum class MinMaxScope { PerYear, Pooled };

/// Extreme-value standardization. Positive attribute: (x-min)/(max-min);
/// negative: (max-x)/(max-min). Throws NumericError on a zero range.
/// The panel must not contain missing cells.
NormalizedPanel normalize_minmax(const IndicatorPanel& panel, MinMaxScope scope);

/// Fixed-base efficacy coefficient: every year is scaled against the min/max
/// of the base-year cross-section, so later years may leave [0,1].
NormalizedPanel normalize_fixed_base(const IndicatorPanel& panel, int base_year);

/// Per-indicator weights, in panel indicator order.
struct WeightVector {
  std::vector<std::string> indicators;
  std::vector<double> weights;

  double sum() const noexcept;
};

/// Entropy weight method over all (region, year) rows pooled. Negative
/// normalized values are clamped to zero for the shares only.
WeightVector entropy_weights(const NormalizedPanel& norm);

/// Weights carried in the indicator specs (e.g. a published weight table).
WeightVector weights_from_specs(const std::vector<IndicatorSpec>& specs);

/// Weights JSON: {"indicator_id": weight, ...}; sum checked against kWeightFileTolerance.
WeightVector load_weights(const std::filesystem::path& path, const std::vector<std::string>& indicator_order);
void write_weights(const WeightVector& w, const std::filesystem::path& path);

/// Composite scores Q_i(t_k) = sum_j w_j s_ij(t_k), with optional level labels.
struct ScoreSeries {
  std::vector<std::string> regions;
  std::vector<int> years;
  std::vector<double> scores; // region-major: scores[i * years.size() + k]
  std::vector<std::optional<int>> levels;

  double at(std::size_t region, std::size_t year) const { return scores[region * years.size() + year]; }
  std::optional<std::size_t> year_index(int year) const noexcept;
  /// Cross-section of every region for one year position.
  std::vector<double> year_slice(std::size_t year) const;
};

ScoreSeries aggregate_scores(const NormalizedPanel& norm, const WeightVector& w);

/// Scores CSV `region,year,score,level`; level is empty when unclassified.
void write_scores(const ScoreSeries& s, const std::filesystem::path& path, int class_count = 5);
ScoreSeries read_scores(const std::filesystem::path& path);

/// Natural-breaks classes of one cross-section.
struct Classification {
  std::vector<int> classes;       // per input value, 0 = lowest class
  std::vector<double> upper_bounds; // inclusive upper bound of each class, ascending
  double within_ssd = 0.0;
};

/// Exact Fisher-Jenks partition (dynamic programming over sorted distinct
/// values) into k classes minimizing the total within-class sum of squared
/// deviations. Equal values always share a class. Throws DataError when there
/// are fewer than k distinct values.
Classification jenks_classify(std::span<const double> values, std::size_t k);

/// Five-zone labels low..high for k = 5; "class_<n>" otherwise.
std::string level_label(int level, std::size_t k);

/// Labels every year of the series in place; returns per-year classifications.
std::vector<Classification> classify_levels(ScoreSeries& series, std::size_t k = 5);

std::string to_string(NormalizationMode m);

} // namespace restool
