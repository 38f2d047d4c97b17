#include "restool/error.hpp"
#include "restool/index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace restool {

Classification jenks_classify(std::span<const double> values, std::size_t k) {
  if (k == 0) throw DataError("class count must be positive");

  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t m = distinct.size();
  if (m < k) {
    throw DataError("natural breaks needs at least " + std::to_string(k) + " distinct values, got " +
                    std::to_string(m));
  }

  // Multiplicity of each distinct value; data centered for stable prefix sums.
  std::vector<double> count(m, 0.0);
  for (double v : values) {
    const auto pos = std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin();
    count[static_cast<std::size_t>(pos)] += 1.0;
  }
  const double center = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::vector<double> cw(m + 1, 0.0), cx(m + 1, 0.0), cxx(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = distinct[i] - center;
    cw[i + 1] = cw[i] + count[i];
    cx[i + 1] = cx[i] + count[i] * d;
    cxx[i + 1] = cxx[i] + count[i] * d * d;
  }
  // SSD of distinct values [a, b).
  auto ssd = [&](std::size_t a, std::size_t b) {
    const double w = cw[b] - cw[a];
    const double s = cx[b] - cx[a];
    return std::max(0.0, (cxx[b] - cxx[a]) - s * s / w);
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  // cost[c][b]: best SSD of the first b distinct values in c+1 classes.
  std::vector<std::vector<double>> cost(k, std::vector<double>(m + 1, inf));
  std::vector<std::vector<std::size_t>> split(k, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t b = 1; b <= m; ++b) cost[0][b] = ssd(0, b);
  for (std::size_t c = 1; c < k; ++c) {
    for (std::size_t b = c + 1; b <= m; ++b) {
      double best = inf;
      std::size_t arg = c;
      // Last class is [a, b); ascending a with strict improvement keeps the
      // lowest-index split on exact ties.
      for (std::size_t a = c; a < b; ++a) {
        const double v = cost[c - 1][a] + ssd(a, b);
        if (v < best) {
          best = v;
          arg = a;
        }
      }
      cost[c][b] = best;
      split[c][b] = arg;
    }
  }

  std::vector<std::size_t> starts(k);
  std::size_t b = m;
  for (std::size_t c = k; c-- > 0;) {
    starts[c] = c == 0 ? 0 : split[c][b];
    b = starts[c];
  }

  Classification out;
  out.within_ssd = cost[k - 1][m];
  out.upper_bounds.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t end = c + 1 < k ? starts[c + 1] : m;
    out.upper_bounds[c] = distinct[end - 1];
  }
  out.classes.reserve(values.size());
  for (double v : values) {
    const auto it = std::lower_bound(out.upper_bounds.begin(), out.upper_bounds.end(), v);
    out.classes.push_back(static_cast<int>(it - out.upper_bounds.begin()));
  }
  return out;
}

std::string level_label(int level, std::size_t k) {
  static const char* five[] = {"low", "lower", "medium", "higher", "high"};
  if (k == 5 && level >= 0 && level < 5) return five[level];
  return "class_" + std::to_string(level + 1);
}

std::vector<Classification> classify_levels(ScoreSeries& series, std::size_t k) {
  const std::size_t K = series.years.size();
  std::vector<Classification> per_year;
  per_year.reserve(K);
  series.levels.assign(series.scores.size(), std::nullopt);
  for (std::size_t t = 0; t < K; ++t) {
    auto cls = jenks_classify(series.year_slice(t), k);
    for (std::size_t i = 0; i < series.regions.size(); ++i) series.levels[i * K + t] = cls.classes[i];
    per_year.push_back(std::move(cls));
  }
  return per_year;
}

} // namespace restool
