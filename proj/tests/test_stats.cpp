#include <cmath>
#include <random>

#include "doctest.h"
#include "oele/error.hpp"
#include "oele/stats.hpp"

using namespace oele;
using doctest::Approx;

// Reference values below were taken from scipy.stats / statsmodels.

TEST_CASE("distribution tails") {
  CHECK(stats::incomplete_beta(2, 3, 0.4) == Approx(0.5248).epsilon(1e-12));
  CHECK(stats::incomplete_beta(0.5, 7.5, 0.2) == Approx(0.9281204024988001).epsilon(1e-10));
  CHECK(stats::incomplete_beta(30, 40, 0.45) == Approx(0.6447480085585666).epsilon(1e-10));
  CHECK(stats::incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(stats::incomplete_beta(2, 3, 1.0) == 1.0);

  CHECK(std::fabs(stats::t_two_sided_p(2.0, 10) - 0.07338803477074039) < 1e-8);
  CHECK(std::fabs(stats::t_two_sided_p(0.5, 3) - 0.651447964848151) < 1e-8);
  CHECK(std::fabs(stats::t_two_sided_p(-8.0, 40) - 7.905084110104544e-10) < 1e-12);
  CHECK(stats::t_two_sided_p(0.0, 7) == Approx(1.0));

  CHECK(std::fabs(stats::f_upper_p(4.0, 1, 20) - 0.05926553544657048) < 1e-8);
  CHECK(std::fabs(stats::f_upper_p(0.7, 1, 5) - 0.44092462406977073) < 1e-8);
  CHECK(std::fabs(stats::f_upper_p(12.5, 1, 78) - 0.0006882030953632225) < 1e-8);
}

TEST_CASE("descriptives") {
  const std::vector<double> x{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 9.8, 2.2};
  CHECK(stats::skewness(x) == Approx(1.7182003528257248).epsilon(1e-10));
  CHECK(stats::excess_kurtosis(x) == Approx(3.143207872916716).epsilon(1e-10));
  CHECK(stats::median({3, 1, 2}) == 2);
  CHECK(stats::median({4, 1, 3, 2}) == 2.5);
  CHECK(stats::variance(std::vector<double>{5}) == 0);
  CHECK(stats::sd(std::vector<double>{1, 2, 3}) == Approx(1.0));
}

TEST_CASE("pooled t test") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10};
  const auto r = stats::pooled_t_test(a, b);
  CHECK(r.statistic == Approx(-1.8973665961010275).epsilon(1e-12));
  CHECK(std::fabs(r.p_value - 0.09434977284243756) < 1e-8);
  CHECK(r.df1 == 8);

  const std::vector<double> same{2, 2, 2};
  const auto z = stats::pooled_t_test(same, same);
  CHECK(z.statistic == 0);
  CHECK(z.p_value == 1);
  const std::vector<double> other{3, 3};
  const auto inf = stats::pooled_t_test(same, other);
  CHECK(std::isinf(inf.statistic));
  CHECK(inf.p_value == 0);
  CHECK(std::isnan(stats::pooled_t_test(std::vector<double>{1}, std::vector<double>{2}).statistic));
}

TEST_CASE("two-group ANOVA") {
  const std::vector<double> a{1, 2, 3}, b{3, 4, 5};
  const auto r = stats::one_way_anova(a, b);
  CHECK(r.effect_size == Approx(-2.0).epsilon(1e-12));
  CHECK(r.statistic == Approx(6.0).epsilon(1e-12));
  CHECK(std::fabs(r.p_value - 0.07048399691021996) < 1e-8);
  CHECK(r.df1 == 1);
  CHECK(r.df2 == 4);

  const std::vector<double> c{1, 5, 2, 7};
  const auto same = stats::one_way_anova(c, c);
  CHECK(same.statistic == Approx(0.0));
  CHECK(same.effect_size == Approx(0.0));

  CHECK_THROWS_AS(stats::one_way_anova(std::vector<double>{1}, b), DegenerateVariance);
  CHECK_THROWS_AS(stats::one_way_anova(std::vector<double>{1, 1}, std::vector<double>{2, 2}),
                  DegenerateVariance);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(2 + rng() % 10), y(2 + rng() % 10);
    for (auto& v : x) v = n(rng);
    for (auto& v : y) v = n(rng) + 0.5;
    const double t = stats::pooled_t_test(x, y).statistic;
    const double f = stats::one_way_anova(x, y).statistic;
    CHECK(std::fabs(f - t * t) <= 1e-9 * std::max(1.0, f));
  }
}

TEST_CASE("ANCOVA") {
  // Two groups of five with a pretest covariate; checked against a
  // regression fit of post ~ group + pre.
  const std::vector<stats::CovariatePair> a{{3, 8}, {5, 11}, {2, 6}, {6, 13}, {4, 9}};
  const std::vector<stats::CovariatePair> b{{4, 7}, {2, 4}, {5, 9}, {3, 6}, {6, 10}};
  const auto r = stats::one_way_ancova(a, b);
  CHECK(r.common_slope == Approx(1.6).epsilon(1e-12));
  CHECK(r.ss_between_adjusted == Approx(12.1).epsilon(1e-9));
  CHECK(r.ss_within_adjusted == Approx(0.8).epsilon(1e-9));
  CHECK(r.test.statistic == Approx(105.875).epsilon(1e-9));
  CHECK(std::fabs(r.test.p_value - 1.771901330373627e-05) < 1e-9);
  CHECK(r.test.df2 == 7);
  CHECK(r.adjusted_mean_a == Approx(9.4));
  CHECK(r.adjusted_mean_b == Approx(7.2));
  CHECK(r.test.effect_size == Approx(2.2 / std::sqrt(0.8 / 7)));

  // Identical groups: nothing left to explain.
  const std::vector<stats::CovariatePair> c{{1, 2}, {2, 5}, {3, 4}, {4, 8}};
  CHECK(stats::one_way_ancova(c, c).test.statistic == Approx(0.0));

  CHECK_THROWS_AS(stats::one_way_ancova(std::vector<stats::CovariatePair>{{1, 1}, {2, 2}}, c),
                  DegenerateCovariate);
  const std::vector<stats::CovariatePair> flat{{1, 2}, {1, 5}, {1, 4}};
  CHECK_THROWS_AS(stats::one_way_ancova(flat, flat), DegenerateCovariate);
}

TEST_CASE("ANCOVA with an uninformative covariate") {
  // Covariate has equal group means and zero within-group correlation with
  // the outcome, so adjustment changes no sum of squares. The residual mean
  // square still loses one degree of freedom to the slope.
  const std::vector<double> ya{4, 6, 5, 7}, yb{7, 8, 11, 12};
  const std::vector<double> x{1, -1, -1, 1};  // orthogonal to both centered outcome sets
  std::vector<stats::CovariatePair> a, b;
  for (int i = 0; i < 4; ++i) {
    a.push_back({x[i], ya[i]});
    b.push_back({x[i], yb[i]});
  }
  // Sanity: the construction really is orthogonal.
  double sa = 0, sb = 0;
  for (int i = 0; i < 4; ++i) {
    sa += x[i] * (ya[i] - 5.5);
    sb += x[i] * (yb[i] - 9.5);
  }
  REQUIRE(sa == 0);
  REQUIRE(sb == 0);

  const auto anova = stats::one_way_anova(ya, yb);
  const auto ancova = stats::one_way_ancova(a, b);
  CHECK(ancova.common_slope == 0);
  const double n = 8;
  CHECK(ancova.ss_between_adjusted == Approx(32.0).epsilon(1e-12));  // 4 * 2^2 * 2
  CHECK(std::fabs(ancova.test.statistic - anova.statistic * (n - 3) / (n - 2)) < 1e-9);
  CHECK(ancova.test.effect_size == Approx(anova.effect_size * std::sqrt((n - 3) / (n - 2))));
}

TEST_CASE("least squares slope") {
  CHECK(stats::ols_slope(std::vector<double>{0, 1, 2, 3}, std::vector<double>{2, 3, 4, 5}) == 1.0);
  CHECK(stats::ols_slope(std::vector<double>{0, 1, 2, 3}, std::vector<double>{0, 1, 1, 2}) ==
        Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(stats::ols_slope(std::vector<double>{1}, std::vector<double>{1}),
                  InsufficientEdits);
  CHECK_THROWS_AS(stats::ols_slope(std::vector<double>{1, 1}, std::vector<double>{1, 2}),
                  DegenerateVariance);
}
