#include "restool/detector.hpp"

#include "restool/error.hpp"
#include "restool/index.hpp"
#include "restool/parallel.hpp"
#include "restool/rng.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace restool {

namespace {

double within_ssd(std::span<const double> y, std::span<const int> labels, std::size_t strata) {
  std::vector<double> sum(strata, 0.0);
  std::vector<std::size_t> count(strata, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum[static_cast<std::size_t>(labels[i])] += y[i];
    ++count[static_cast<std::size_t>(labels[i])];
  }
  std::vector<double> mean(strata);
  for (std::size_t h = 0; h < strata; ++h) {
    if (count[h] == 0) throw DataError("stratum " + std::to_string(h) + " is empty");
    mean[h] = sum[h] / static_cast<double>(count[h]);
  }
  double ssw = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - mean[static_cast<std::size_t>(labels[i])];
    ssw += d * d;
  }
  return ssw;
}

double total_ssd(std::span<const double> y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sst = 0.0;
  double scale = 0.0;
  for (double v : y) {
    sst += (v - mean) * (v - mean);
    scale = std::max(scale, std::abs(v));
  }
  // Rounding residue of a constant vector is not variance.
  if (!(sst > 1e-28 * static_cast<double>(y.size()) * std::max(scale * scale, 1e-300))) {
    throw NumericError("outcome has zero total variance; q undefined");
  }
  return sst;
}

void check_shape(std::span<const double> y, const StrataPartition& s) {
  if (y.size() != s.labels.size()) {
    throw DataError("outcome has " + std::to_string(y.size()) + " values, partition labels " +
                    std::to_string(s.labels.size()));
  }
  if (y.size() < 2) throw DataError("q needs at least 2 observations");
  if (s.strata == 0) throw DataError("partition has no strata");
  for (int l : s.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= s.strata) throw DataError("stratum label out of range");
  }
}

double q_from(double ssw, double sst) { return std::clamp(1.0 - ssw / sst, 0.0, 1.0); }

std::vector<int> labels_from_breaks(std::span<const double> x, const std::vector<double>& breaks) {
  std::vector<int> labels;
  labels.reserve(x.size());
  for (double v : x) {
    labels.push_back(static_cast<int>(std::lower_bound(breaks.begin(), breaks.end(), v) - breaks.begin()));
  }
  return labels;
}

double quantile_sorted(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

} // namespace

std::string to_string(DiscretizationMethod m) {
  switch (m) {
    case DiscretizationMethod::EqualInterval: return "equal_interval";
    case DiscretizationMethod::Quantile: return "quantile";
    case DiscretizationMethod::NaturalBreaks: return "natural_breaks";
    case DiscretizationMethod::Geometric: return "geometric";
    case DiscretizationMethod::StdDev: return "std_dev";
    case DiscretizationMethod::Supplied: return "supplied";
  }
  return "unknown";
}

DiscretizationMethod parse_discretization_method(const std::string& s) {
  for (auto m : {DiscretizationMethod::EqualInterval, DiscretizationMethod::Quantile,
                 DiscretizationMethod::NaturalBreaks, DiscretizationMethod::Geometric, DiscretizationMethod::StdDev}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown discretization method '" + s + "'", "detector.methods");
}

std::string to_string(InteractionType t) {
  switch (t) {
    case InteractionType::NonlinearWeaken: return "nonlinear_weaken";
    case InteractionType::SingleWeaken: return "single_weaken";
    case InteractionType::BiEnhance: return "bi_enhance";
    case InteractionType::Independent: return "independent";
    case InteractionType::NonlinearEnhance: return "nonlinear_enhance";
  }
  return "unknown";
}

StrataPartition make_partition(std::span<const int> labels, std::string factor) {
  std::map<int, int> renumber;
  for (int l : labels) renumber.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : renumber) id = next++;
  StrataPartition p;
  p.factor = std::move(factor);
  p.labels.reserve(labels.size());
  for (int l : labels) p.labels.push_back(renumber.at(l));
  p.strata = renumber.size();
  p.requested_classes = p.strata;
  return p;
}

double factor_q(std::span<const double> y, const StrataPartition& strata) {
  check_shape(y, strata);
  const double sst = total_ssd(y);
  return q_from(within_ssd(y, strata.labels, strata.strata), sst);
}

SignificanceResult significance(std::span<const double> y, const StrataPartition& strata, std::size_t permutations,
                                std::uint64_t seed) {
  if (permutations < 99) throw ConfigError("permutation test needs at least 99 permutations", "detector.permutations");
  check_shape(y, strata);
  const double sst = total_ssd(y);
  const double observed = q_from(within_ssd(y, strata.labels, strata.strata), sst);

  std::vector<double> permuted(permutations);
  parallel_for(permutations, [&](std::size_t r) {
    SplitMix64 rng(stream_seed(seed, r));
    std::vector<int> labels = strata.labels;
    shuffle(std::span<int>(labels), rng);
    permuted[r] = q_from(within_ssd(y, labels, strata.strata), sst);
  });

  SignificanceResult out;
  out.permutations = permutations;
  out.seed = seed;
  for (double q : permuted) {
    if (q >= observed - kPermutationTieTolerance) ++out.exceedances;
    if (std::abs(q - observed) <= kPermutationTieTolerance) ++out.ties;
  }
  out.p_value = static_cast<double>(1 + out.exceedances) / static_cast<double>(permutations + 1);
  return out;
}

DetectorResult factor_detector(std::span<const double> y, const StrataPartition& strata, std::size_t permutations,
                               std::uint64_t seed) {
  DetectorResult r;
  r.factor = strata.factor;
  r.q = factor_q(y, strata);
  const auto sig = significance(y, strata, permutations, seed);
  r.p_value = sig.p_value;
  r.n = y.size();
  r.strata = strata.strata;
  r.permutations = permutations;
  r.seed = seed;
  return r;
}

InteractionClass classify_interaction(double q_a, double q_b, double q_ab) {
  const double lo = std::min(q_a, q_b);
  const double hi = std::max(q_a, q_b);
  const double sum = q_a + q_b;
  const double tol = kInteractionTolerance;
  if (std::abs(q_ab - sum) <= tol) return {InteractionType::Independent};
  if (q_ab > sum) return {InteractionType::NonlinearEnhance};
  if (q_ab < lo - tol) return {InteractionType::NonlinearWeaken};
  if (q_ab < hi - tol) return {InteractionType::SingleWeaken};
  return {InteractionType::BiEnhance, std::abs(q_ab - hi) <= tol};
}

StrataPartition cross_partition(const StrataPartition& a, const StrataPartition& b) {
  if (a.labels.size() != b.labels.size()) throw DataError("partitions cover different numbers of regions");
  std::vector<int> joint(a.labels.size());
  const auto width = static_cast<int>(std::max<std::size_t>(b.strata, 1));
  for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = a.labels[i] * width + b.labels[i];
  auto p = make_partition(joint, a.factor + "&" + b.factor);
  return p;
}

InteractionResult interaction(std::span<const double> y, const StrataPartition& a, const StrataPartition& b) {
  const auto ab = cross_partition(a, b);
  if (ab.strata < 2) throw NumericError("cross partition of " + a.factor + " and " + b.factor + " has one stratum");
  InteractionResult r;
  r.factor_a = a.factor;
  r.factor_b = b.factor;
  r.q_a = factor_q(y, a);
  r.q_b = factor_q(y, b);
  r.q_ab = factor_q(y, ab);
  const auto cls = classify_interaction(r.q_a, r.q_b, r.q_ab);
  r.type = cls.type;
  r.at_max_boundary = cls.at_max_boundary;
  return r;
}

StrataPartition discretize(std::span<const double> x, DiscretizationMethod method, std::size_t classes,
                           std::string factor) {
  if (classes < 2) throw ConfigError("discretization needs at least 2 classes", "detector.L_range");
  if (x.size() < classes) throw DataError("fewer values than classes");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (!(hi > lo)) throw DataError("cannot discretize a constant factor " + factor);
  const auto L = static_cast<double>(classes);

  std::vector<double> breaks;
  switch (method) {
    case DiscretizationMethod::EqualInterval:
      for (std::size_t i = 1; i < classes; ++i) breaks.push_back(lo + (hi - lo) * static_cast<double>(i) / L);
      break;
    case DiscretizationMethod::Quantile:
      for (std::size_t i = 1; i < classes; ++i) breaks.push_back(quantile_sorted(sorted, static_cast<double>(i) / L));
      break;
    case DiscretizationMethod::NaturalBreaks: {
      const auto cls = jenks_classify(x, classes);
      breaks.assign(cls.upper_bounds.begin(), cls.upper_bounds.end() - 1);
      break;
    }
    case DiscretizationMethod::Geometric: {
      // Shift so the minimum sits at 1 when the data are not strictly positive.
      const double shift = lo > 0.0 ? 0.0 : 1.0 - lo;
      const double base = lo + shift;
      const double ratio = std::pow((hi + shift) / base, 1.0 / L);
      for (std::size_t i = 1; i < classes; ++i) breaks.push_back(base * std::pow(ratio, static_cast<double>(i)) - shift);
      break;
    }
    case DiscretizationMethod::StdDev: {
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= static_cast<double>(x.size());
      double ss = 0.0;
      for (double v : x) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(x.size()));
      for (std::size_t i = 1; i < classes; ++i) breaks.push_back(mean + (static_cast<double>(i) - L / 2.0) * sd);
      break;
    }
    case DiscretizationMethod::Supplied:
      throw ConfigError("'supplied' is not a discretization method", "detector.methods");
  }

  auto p = make_partition(labels_from_breaks(x, breaks), std::move(factor));
  p.method = method;
  p.requested_classes = classes;
  p.breaks = std::move(breaks);
  return p;
}

OptimalDiscretization discretize_optimal(std::span<const double> x, std::span<const double> y,
                                         std::span<const DiscretizationMethod> methods, std::size_t min_classes,
                                         std::size_t max_classes, std::string factor) {
  if (methods.empty()) throw ConfigError("no discretization methods", "detector.methods");
  if (min_classes < 2 || max_classes < min_classes) throw ConfigError("invalid class range", "detector.L_range");
  if (x.size() != y.size()) throw DataError("factor and outcome differ in length");
  std::vector<double> distinct(x.begin(), x.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < max_classes) {
    throw DataError("factor " + factor + " has " + std::to_string(distinct.size()) + " distinct values, fewer than " +
                    std::to_string(max_classes) + " classes");
  }

  struct Slot {
    DiscretizationMethod method;
    std::size_t classes;
    StrataPartition partition;
    double q = -1.0;
    bool usable = false;
  };
  std::vector<Slot> slots;
  for (std::size_t L = min_classes; L <= max_classes; ++L) {
    for (auto m : methods) slots.push_back({m, L, {}, -1.0, false});
  }
  parallel_for(slots.size(), [&](std::size_t n) {
    auto& s = slots[n];
    s.partition = discretize(x, s.method, s.classes, factor);
    if (s.partition.strata >= 2) {
      s.q = factor_q(y, s.partition);
      s.usable = true;
    }
  });

  OptimalDiscretization out;
  const Slot* best = nullptr;
  for (const auto& s : slots) {
    if (!s.usable) continue;
    out.candidates.push_back({s.method, s.classes, s.partition.strata, s.q});
    if (!best || s.q > best->q + 1e-12) best = &s;
  }
  if (!best) throw NumericError("no usable discretization for factor " + factor);
  out.partition = best->partition;
  out.q = best->q;
  return out;
}

WelchTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("Welch test needs at least 2 observations per group");
  auto moments = [](std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = va / na;
  const double sb = vb / nb;
  const double se2 = sa + sb;
  WelchTest r;
  if (se2 == 0.0) {
    // Both groups constant: separated iff the means differ.
    r.df = na + nb - 2.0;
    if (ma != mb) {
      r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

RiskResult risk_detector(std::span<const double> y, const StrataPartition& strata, double alpha) {
  check_shape(y, strata);
  std::vector<std::vector<double>> groups(strata.strata);
  for (std::size_t i = 0; i < y.size(); ++i) groups[static_cast<std::size_t>(strata.labels[i])].push_back(y[i]);

  RiskResult out;
  for (std::size_t h = 0; h < groups.size(); ++h) {
    const auto& g = groups[h];
    if (g.empty()) throw DataError("stratum " + std::to_string(h) + " is empty");
    StratumSummary s;
    s.label = static_cast<int>(h);
    s.n = g.size();
    for (double v : g) s.mean += v;
    s.mean /= static_cast<double>(g.size());
    if (g.size() > 1) {
      for (double v : g) s.variance += (v - s.mean) * (v - s.mean);
      s.variance /= static_cast<double>(g.size() - 1);
    }
    out.strata.push_back(s);
  }
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      RiskComparison c;
      c.a = static_cast<int>(a);
      c.b = static_cast<int>(b);
      c.testable = groups[a].size() >= 2 && groups[b].size() >= 2;
      if (c.testable) {
        const auto w = welch_t_test(groups[a], groups[b]);
        c.t = w.t;
        c.df = w.df;
        c.p_value = w.p_value;
        c.significant = w.p_value < alpha;
      }
      out.comparisons.push_back(c);
    }
  }
  return out;
}

EcologicalResult ecological_detector(std::span<const double> y, const StrataPartition& a, const StrataPartition& b,
                                     double alpha) {
  check_shape(y, a);
  check_shape(y, b);
  const double n = static_cast<double>(y.size());
  const double ssw_a = within_ssd(y, a.labels, a.strata);
  const double ssw_b = within_ssd(y, b.labels, b.strata);
  EcologicalResult r;
  r.df1 = n - 1.0;
  r.df2 = n - 1.0;
  if (ssw_b == 0.0) {
    if (ssw_a > 0.0) {
      r.f = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.significant = true;
    }
    return r;
  }
  // Both factors cover the same N regions, so the size correction is 1.
  r.f = (n * (n - 1.0) * ssw_a) / (n * (n - 1.0) * ssw_b);
  boost::math::fisher_f dist(r.df1, r.df2);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.f));
  r.significant = r.p_value < alpha;
  return r;
}

} // namespace restool
