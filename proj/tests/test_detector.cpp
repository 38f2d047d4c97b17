#include "oracles.hpp"

#include "restool/detector.hpp"
#include "restool/error.hpp"
#include "restool/parallel.hpp"

#include "doctest.h"

#include <cstring>
#include <random>

using namespace restool;

namespace {

StrataPartition part(std::vector<int> labels) { return make_partition(labels); }

} // namespace

TEST_SUITE("detector") {

TEST_CASE("q hand computations") {
  const std::vector<double> y{1, 2, 3, 4, 5, 6};
  CHECK(std::abs(factor_q(y, part({0, 0, 0, 1, 1, 1})) - (1.0 - 4.0 / 17.5)) <= 1e-12);
  CHECK(factor_q(y, part({0, 0, 0, 0, 0, 0})) == 0.0);
  CHECK(factor_q(y, part({0, 1, 2, 3, 4, 5})) == 1.0);
  CHECK_THROWS_AS(factor_q(std::vector<double>{2, 2, 2}, part({0, 1, 1})), NumericError);
  CHECK_THROWS_AS(factor_q(y, part({0, 1})), DataError);
}

TEST_CASE("q invariances") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> y(20);
    std::vector<int> labels(20);
    for (std::size_t i = 0; i < 20; ++i) y[i] = n(gen), labels[i] = static_cast<int>(gen() % 4);
    const double q = factor_q(y, part(labels));
    REQUIRE(q == doctest::Approx(oracle::direct_q(y, labels)).epsilon(1e-12));

    std::vector<int> relabeled(labels);
    for (auto& l : relabeled) l = 100 - 7 * l; // strictly monotone, order reversed
    CHECK(std::abs(factor_q(y, part(relabeled)) - q) <= 1e-12);

    std::vector<double> shifted(y), scaled(y);
    for (auto& v : shifted) v += 1e3;
    for (auto& v : scaled) v *= -2.5;
    CHECK(std::abs(factor_q(shifted, part(labels)) - q) <= 1e-9);
    CHECK(std::abs(factor_q(scaled, part(labels)) - q) <= 1e-12);

    const auto a = part(labels);
    CHECK(factor_q(y, cross_partition(a, a)) == q);
  }
}

TEST_CASE("brute-force oracle on every set partition of 6 points") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-10, 10);
  std::vector<double> y(6);
  for (auto& v : y) v = u(gen);
  std::size_t count = 0;
  oracle::for_each_set_partition(6, [&](const std::vector<int>& labels) {
    ++count;
    REQUIRE(std::abs(factor_q(y, part(labels)) - oracle::direct_q(y, labels)) <= 1e-12);
  });
  CHECK(count == 203); // Bell(6)
}

TEST_CASE("permutation significance") {
  // Four strata of three, y constant within each stratum.
  std::vector<double> y;
  std::vector<int> labels;
  for (int h = 0; h < 4; ++h)
    for (int r = 0; r < 3; ++r) y.push_back(10.0 * h), labels.push_back(h);
  const auto sig = significance(y, part(labels), 999, 42);
  CHECK(sig.ties == 0);
  CHECK(sig.p_value == doctest::Approx(0.001));

  // Formula floor with 99 permutations.
  const auto floor = significance(y, part(labels), 99, 7);
  CHECK(floor.p_value == doctest::Approx(0.01));
  CHECK_THROWS_AS(significance(y, part(labels), 98, 7), ConfigError);

  // Deterministic under a fixed seed, independent of the thread count.
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> noise(30);
  std::vector<int> lab(30);
  for (std::size_t i = 0; i < 30; ++i) noise[i] = n(gen), lab[i] = static_cast<int>(i % 3);
  thread_limit().store(1);
  const auto a = significance(noise, part(lab), 999, 1234);
  thread_limit().store(4);
  const auto b = significance(noise, part(lab), 999, 1234);
  thread_limit().store(0);
  CHECK(std::memcmp(&a.p_value, &b.p_value, sizeof(double)) == 0);
  CHECK(a.exceedances == b.exceedances);
  const auto c = significance(noise, part(lab), 999, 1235);
  CHECK(c.p_value > 0.0);
  CHECK(c.p_value <= 1.0);

  const auto det = factor_detector(noise, part(lab), 999, 1234);
  CHECK(det.q == factor_q(noise, part(lab)));
  CHECK(det.p_value == a.p_value);
}

TEST_CASE("interaction typing on constructed fixtures") {
  // y = a*sqrt3 + 2b + ab*sqrt2 + s over a balanced 2x2x2 design:
  // q_A = 3/10, q_B = 4/10, q_AB = 9/10.
  std::vector<double> y;
  std::vector<int> la, lb;
  for (int a : {-1, 1})
    for (int b : {-1, 1})
      for (int s : {-1, 1}) {
        y.push_back(a * std::sqrt(3.0) + 2.0 * b + a * b * std::sqrt(2.0) + s);
        la.push_back(a);
        lb.push_back(b);
      }
  const auto r = interaction(y, part(la), part(lb));
  CHECK(std::abs(r.q_a - 0.3) <= 1e-12);
  CHECK(std::abs(r.q_b - 0.4) <= 1e-12);
  CHECK(std::abs(r.q_ab - 0.9) <= 1e-12);
  CHECK(r.type == InteractionType::NonlinearEnhance);

  // Perfect joint stratification.
  std::vector<int> cell(8);
  for (std::size_t i = 0; i < 8; ++i) cell[i] = (la[i] + 1) + (lb[i] + 1) / 2;
  std::vector<double> exact(8);
  for (std::size_t i = 0; i < 8; ++i) exact[i] = cell[i] * cell[i];
  const auto perfect = interaction(exact, part(la), part(lb));
  CHECK(perfect.q_ab == 1.0);
  CHECK(perfect.q_ab >= std::max(perfect.q_a, perfect.q_b));

  // Identical partitions: q_AB equals both, classified as the bi-enhance boundary.
  const auto same = interaction(y, part(la), part(la));
  CHECK(same.q_ab == same.q_a);
  CHECK(same.type == InteractionType::BiEnhance);
  CHECK(same.at_max_boundary);

  CHECK(classify_interaction(0.3, 0.5, 0.2).type == InteractionType::NonlinearWeaken);
  CHECK(classify_interaction(0.3, 0.5, 0.4).type == InteractionType::SingleWeaken);
  CHECK(classify_interaction(0.3, 0.5, 0.3).type == InteractionType::SingleWeaken);
  CHECK(classify_interaction(0.3, 0.5, 0.6).type == InteractionType::BiEnhance);
  CHECK_FALSE(classify_interaction(0.3, 0.5, 0.6).at_max_boundary);
  CHECK(classify_interaction(0.3, 0.5, 0.8 + 1e-10).type == InteractionType::Independent);
  CHECK(classify_interaction(0.3, 0.5, 0.81).type == InteractionType::NonlinearEnhance);

  CHECK_THROWS_AS(interaction(y, part(std::vector<int>(8, 0)), part(std::vector<int>(8, 0))), NumericError);
}

TEST_CASE("cross partitions drop empty cells and refine") {
  const auto a = part({0, 0, 1, 1, 2, 2});
  const auto b = part({0, 1, 0, 0, 0, 0});
  const auto ab = cross_partition(a, b);
  CHECK(ab.strata == 4);
  std::mt19937_64 gen(12);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> y(30);
    std::vector<int> coarse(30), fine(30);
    for (std::size_t i = 0; i < 30; ++i) {
      y[i] = n(gen);
      coarse[i] = static_cast<int>(gen() % 4);
      fine[i] = coarse[i] * 3 + static_cast<int>(gen() % 3);
    }
    REQUIRE(factor_q(y, part(fine)) >= factor_q(y, part(coarse)) - 1e-12);
  }
}

TEST_CASE("discretization methods") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto eq = discretize(x, DiscretizationMethod::EqualInterval, 3);
  CHECK(eq.breaks == std::vector<double>{4.0, 7.0});
  CHECK(eq.labels == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 2, 2, 2});

  const auto qu = discretize(x, DiscretizationMethod::Quantile, 2);
  CHECK(qu.breaks == std::vector<double>{5.5});
  CHECK(qu.labels == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});

  const auto ge = discretize(std::vector<double>{1, 2, 4, 8, 16}, DiscretizationMethod::Geometric, 4);
  REQUIRE(ge.breaks.size() == 3);
  CHECK(ge.breaks[0] == doctest::Approx(2.0));
  CHECK(ge.breaks[2] == doctest::Approx(8.0));
  CHECK(ge.labels == std::vector<int>{0, 0, 1, 2, 3});
  // Non-positive data are shifted before the geometric progression.
  const auto gs = discretize(std::vector<double>{-3, -1, 0, 5}, DiscretizationMethod::Geometric, 2);
  CHECK(gs.breaks[0] == doctest::Approx(std::sqrt(9.0) - 4.0));

  const auto sd = discretize(x, DiscretizationMethod::StdDev, 2);
  CHECK(sd.breaks == std::vector<double>{5.5});

  const auto nb = discretize(std::vector<double>{1, 2, 3, 10, 11, 12}, DiscretizationMethod::NaturalBreaks, 2);
  CHECK(nb.breaks == std::vector<double>{3.0});

  // A class left empty by the breaks is dropped.
  const auto gap = discretize(std::vector<double>{0, 0.1, 0.2, 9.8, 9.9, 10}, DiscretizationMethod::EqualInterval, 3);
  CHECK(gap.strata == 2);
  CHECK(gap.requested_classes == 3);

  CHECK_THROWS_AS(discretize(std::vector<double>{1, 1, 1}, DiscretizationMethod::Quantile, 2), DataError);
  CHECK_THROWS_AS(parse_discretization_method("kmeans"), ConfigError);
}

TEST_CASE("optimal discretization") {
  // y is a three-level step function of x.
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    x.push_back(i);
    y.push_back(i < 10 ? 1.0 : i < 20 ? 5.0 : 9.0);
  }
  const std::vector<DiscretizationMethod> all{DiscretizationMethod::EqualInterval, DiscretizationMethod::Quantile,
                                              DiscretizationMethod::NaturalBreaks, DiscretizationMethod::Geometric,
                                              DiscretizationMethod::StdDev};
  const auto best = discretize_optimal(x, y, all, 3, 6, "x");
  CHECK(best.q == 1.0);
  CHECK(best.partition.strata == 3);
  CHECK(best.partition.requested_classes == 3);
  CHECK(best.candidates.size() == 20);

  // Ties: every candidate in a two-point outcome gives q = 1 at L = 2 first.
  std::vector<double> x2{1, 2, 3, 4, 5, 6}, y2{0, 0, 0, 1, 1, 1};
  const std::vector<DiscretizationMethod> two{DiscretizationMethod::Quantile, DiscretizationMethod::EqualInterval};
  const auto tie = discretize_optimal(x2, y2, two, 2, 3);
  CHECK(tie.partition.requested_classes == 2);
  CHECK(tie.partition.method == DiscretizationMethod::Quantile);

  // Noise fixture: q stays small.
  std::mt19937_64 gen(99);
  std::normal_distribution<double> n(0, 1);
  int small = 0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xs(30), ys(30);
    for (std::size_t i = 0; i < 30; ++i) xs[i] = n(gen), ys[i] = n(gen);
    small += discretize_optimal(xs, ys, all, 3, 6).q < 0.3;
  }
  CHECK(small >= 12);

  CHECK_THROWS_AS(discretize_optimal(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}, all, 3, 6), DataError);
}

TEST_CASE("Welch test against a numerically integrated t distribution") {
  const std::vector<double> a{11.35, 12.1, 12.85, 13.6, 14.35};
  const std::vector<double> b{10.0, 10.5, 11.0, 11.5, 12.0};
  const auto w = welch_t_test(a, b);
  // Oracle: t and Welch-Satterthwaite df by hand.
  const double sa = (0.75 * 0.75 * 10.0 / 4.0) / 5.0, sb = (0.5 * 0.5 * 10.0 / 4.0) / 5.0;
  const double t = (12.85 - 11.0) / std::sqrt(sa + sb);
  const double df = (sa + sb) * (sa + sb) / (sa * sa / 4.0 + sb * sb / 4.0);
  CHECK(w.t == doctest::Approx(t).epsilon(1e-12));
  CHECK(w.t == doctest::Approx(2.9025).epsilon(1e-4));
  CHECK(w.df == doctest::Approx(df).epsilon(1e-12));
  CHECK(w.df == doctest::Approx(6.969).epsilon(1e-3));
  CHECK(w.p_value == doctest::Approx(oracle::t_two_sided_p(t, df)).epsilon(1e-7));
  CHECK(w.p_value < 0.05);

  const auto flat = welch_t_test(std::vector<double>{1, 1}, std::vector<double>{2, 2, 2});
  CHECK(flat.p_value == 0.0);
}

TEST_CASE("risk and ecological detectors") {
  const std::vector<double> y{1, 1, 1, 4, 4, 4, 7};
  const auto r = risk_detector(y, part({0, 0, 0, 1, 1, 1, 2}));
  REQUIRE(r.strata.size() == 3);
  CHECK(r.strata[1].mean == 4.0);
  bool found01 = false, found_single = false;
  for (const auto& c : r.comparisons) {
    if (c.a == 0 && c.b == 1) {
      found01 = true;
      CHECK(c.testable);
      CHECK(c.significant);
    }
    if (c.b == 2) {
      found_single = true;
      CHECK_FALSE(c.testable);
    }
  }
  CHECK(found01);
  CHECK(found_single);

  std::mt19937_64 gen(6);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> z(24);
  std::vector<int> la(24), lb(24);
  for (std::size_t i = 0; i < 24; ++i) la[i] = static_cast<int>(i % 3), lb[i] = static_cast<int>(i % 4);
  for (std::size_t i = 0; i < 24; ++i) z[i] = 3.0 * la[i] + 0.3 * n(gen);
  const auto same = ecological_detector(z, part(la), part(la));
  CHECK(same.f == doctest::Approx(1.0));
  CHECK_FALSE(same.significant);

  // B explains nothing, A nearly everything: F = SSW_B / SSW_A is large.
  const auto e = ecological_detector(z, part(lb), part(la));
  CHECK(e.significant);
  CHECK(e.p_value == doctest::Approx(oracle::f_upper_p(e.f, e.df1, e.df2)).epsilon(1e-6));
}

} // TEST_SUITE
