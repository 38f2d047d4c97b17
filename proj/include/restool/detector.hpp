#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace restool {

enum class DiscretizationMethod { EqualInterval, Quantile, NaturalBreaks, Geometric, StdDev, Supplied };

std::string to_string(DiscretizationMethod m);
DiscretizationMethod parse_discretization_method(const std::string& s);

/// Category labels of one explanatory factor over the study regions.
/// Labels are compact: 0..strata-1, every stratum nonempty.
struct StrataPartition {
  std::string factor;
  std::vector<int> labels;
  std::size_t strata = 0;
  DiscretizationMethod method = DiscretizationMethod::Supplied;
  /// Requested class count for derived partitions (may exceed `strata` when
  /// some classes came out empty and were dropped).
  std::size_t requested_classes = 0;
  /// Interior break points, ascending; a value equal to a break falls in the lower class.
  std::vector<double> breaks;
};

/// Builds a partition from arbitrary integer labels, renumbering them in
/// ascending label order.
StrataPartition make_partition(std::span<const int> labels, std::string factor = {});

/// q = 1 - sum_h N_h var_h / (N var), population variances.
/// Throws NumericError on zero total variance, DataError on size mismatch.
double factor_q(std::span<const double> y, const StrataPartition& strata);

struct SignificanceResult {
  double p_value = 1.0;
  std::size_t exceedances = 0; // permuted q >= observed q
  std::size_t ties = 0;        // permuted q within tolerance of observed q
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
};

/// Tolerance used when comparing permuted q against the observed q.
inline constexpr double kPermutationTieTolerance = 1e-12;

/// Permutation test of q: strata labels shuffled, y fixed.
/// p = (1 + #{q_perm >= q_obs}) / (permutations + 1). Replicate r draws from
/// its own stream derived from (seed, r), so the result is schedule-independent.
SignificanceResult significance(std::span<const double> y, const StrataPartition& strata,
                                std::size_t permutations = 999, std::uint64_t seed = 0);

struct DetectorResult {
  std::string factor;
  double q = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t strata = 0;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
};

DetectorResult factor_detector(std::span<const double> y, const StrataPartition& strata, std::size_t permutations,
                               std::uint64_t seed);

enum class InteractionType { NonlinearWeaken, SingleWeaken, BiEnhance, Independent, NonlinearEnhance };

std::string to_string(InteractionType t);

inline constexpr double kInteractionTolerance = 1e-9;

struct InteractionClass {
  InteractionType type;
  /// q_AB equals max(q_A, q_B) within tolerance (classified as bi-enhance).
  bool at_max_boundary = false;
};

/// Interaction type from the three q values:
///   |q_AB - (q_A+q_B)| <= tol   independent
///   q_AB > q_A + q_B            nonlinear enhance
///   q_AB < min                  nonlinear weaken
///   min <= q_AB < max           single weaken
///   otherwise                   bi-enhance
InteractionClass classify_interaction(double q_a, double q_b, double q_ab);

/// Intersection partition; empty (a, b) cells are dropped.
StrataPartition cross_partition(const StrataPartition& a, const StrataPartition& b);

struct InteractionResult {
  std::string factor_a;
  std::string factor_b;
  double q_a = 0.0;
  double q_b = 0.0;
  double q_ab = 0.0;
  InteractionType type = InteractionType::Independent;
  bool at_max_boundary = false;
};

InteractionResult interaction(std::span<const double> y, const StrataPartition& a, const StrataPartition& b);

/// Partition of x into `classes` strata with the given method. Classes left
/// empty by the break points are dropped.
StrataPartition discretize(std::span<const double> x, DiscretizationMethod method, std::size_t classes,
                           std::string factor = {});

struct DiscretizationCandidate {
  DiscretizationMethod method;
  std::size_t classes;
  std::size_t strata;
  double q;
};

struct OptimalDiscretization {
  StrataPartition partition;
  double q = 0.0;
  std::vector<DiscretizationCandidate> candidates;
};

/// Evaluates every (method, class count) pair and keeps the q-maximizing one.
/// Ties go to the smaller class count, then to the earlier method in `methods`.
OptimalDiscretization discretize_optimal(std::span<const double> x, std::span<const double> y,
                                         std::span<const DiscretizationMethod> methods, std::size_t min_classes,
                                         std::size_t max_classes, std::string factor = {});

struct StratumSummary {
  int label = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0; // sample variance; 0 for singletons
};

struct RiskComparison {
  int a = 0;
  int b = 0;
  bool testable = false;
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

struct RiskResult {
  std::vector<StratumSummary> strata;
  std::vector<RiskComparison> comparisons;
};

/// Stratum means and pairwise Welch t-tests at level alpha. Pairs with a
/// singleton stratum are reported untestable.
RiskResult risk_detector(std::span<const double> y, const StrataPartition& strata, double alpha = 0.05);

struct WelchTest {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};
WelchTest welch_t_test(std::span<const double> a, std::span<const double> b);

struct EcologicalResult {
  double f = 1.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

/// F = [N_B (N_A - 1) SSW_A] / [N_A (N_B - 1) SSW_B], one-sided at level alpha:
/// significant when factor A leaves significantly more within-strata variance than B.
EcologicalResult ecological_detector(std::span<const double> y, const StrataPartition& a, const StrataPartition& b,
                                     double alpha = 0.05);

} // namespace restool
