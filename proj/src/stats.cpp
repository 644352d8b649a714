#include "oele/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oele/error.hpp"

namespace oele::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sum_sq_dev(std::span<const double> xs, double m) {
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s;
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10'000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) return kNaN;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  return sum_sq_dev(xs, mean(xs)) / static_cast<double>(xs.size() - 1);
}

double sd(std::span<const double> xs) { return std::sqrt(variance(xs)); }

double skewness(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 3) return 0.0;
  const double m = mean(xs);
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 <= 0.0) return 0.0;
  const double g1 = m3 / std::pow(m2, 1.5);
  return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

double excess_kurtosis(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 4) return 0.0;
  const double m = mean(xs);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d2 = (x - m) * (x - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  if (m2 <= 0.0) return 0.0;
  const double g2 = m4 / (m2 * m2) - 3.0;
  return (n - 1.0) / ((n - 2.0) * (n - 3.0)) * ((n + 1.0) * g2 + 6.0);
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The continued fraction converges fastest on the side of the mean.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
  if (std::isnan(t) || !(df > 0.0)) return kNaN;
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double f_upper_p(double f, double df1, double df2) {
  if (std::isnan(f) || !(df1 > 0.0) || !(df2 > 0.0)) return kNaN;
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

TestResult pooled_t_test(std::span<const double> a, std::span<const double> b) {
  TestResult r;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  r.df1 = na + nb - 2.0;
  if (a.empty() || b.empty() || r.df1 <= 0.0) {
    r.statistic = r.p_value = r.effect_size = kNaN;
    return r;
  }
  const double ma = mean(a), mb = mean(b);
  const double pooled_var = (sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / r.df1;
  const double diff = ma - mb;
  if (pooled_var <= 0.0) {
    if (diff == 0.0) {
      r.statistic = 0.0;
      r.effect_size = 0.0;
      r.p_value = 1.0;
    } else {
      const double inf = std::numeric_limits<double>::infinity();
      r.statistic = r.effect_size = diff > 0 ? inf : -inf;
      r.p_value = 0.0;
    }
    return r;
  }
  const double sp = std::sqrt(pooled_var);
  r.statistic = diff / (sp * std::sqrt(1.0 / na + 1.0 / nb));
  r.effect_size = diff / sp;
  r.p_value = t_two_sided_p(r.statistic, r.df1);
  return r;
}

TestResult one_way_anova(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw DegenerateVariance("ANOVA needs at least two values per group");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double grand = (na * ma + nb * mb) / (na + nb);
  const double ss_between = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
  const double ss_within = sum_sq_dev(a, ma) + sum_sq_dev(b, mb);
  const double df_within = na + nb - 2.0;
  if (ss_within <= 0.0) throw DegenerateVariance("ANOVA pooled variance is zero");
  const double ms_within = ss_within / df_within;
  TestResult r;
  r.statistic = ss_between / ms_within;
  r.df1 = 1.0;
  r.df2 = df_within;
  r.p_value = f_upper_p(r.statistic, r.df1, r.df2);
  r.effect_size = (ma - mb) / std::sqrt(ms_within);
  return r;
}

AncovaResult one_way_ancova(std::span<const CovariatePair> a, std::span<const CovariatePair> b) {
  if (a.size() < 3 || b.size() < 3) {
    throw DegenerateCovariate("ANCOVA needs at least three pairs per group");
  }
  struct Sums {
    double n = 0, mx = 0, my = 0, sxx = 0, sxy = 0, syy = 0;
  };
  auto group_sums = [](std::span<const CovariatePair> g) {
    Sums s;
    s.n = static_cast<double>(g.size());
    for (const auto& p : g) {
      s.mx += p.covariate;
      s.my += p.outcome;
    }
    s.mx /= s.n;
    s.my /= s.n;
    for (const auto& p : g) {
      const double dx = p.covariate - s.mx, dy = p.outcome - s.my;
      s.sxx += dx * dx;
      s.sxy += dx * dy;
      s.syy += dy * dy;
    }
    return s;
  };
  const Sums ga = group_sums(a), gb = group_sums(b);
  const double n = ga.n + gb.n;

  const double wxx = ga.sxx + gb.sxx;
  const double wxy = ga.sxy + gb.sxy;
  const double wyy = ga.syy + gb.syy;
  if (wxx <= 0.0) throw DegenerateCovariate("covariate has no within-group variation");

  const double gx = (ga.n * ga.mx + gb.n * gb.mx) / n;
  const double gy = (ga.n * ga.my + gb.n * gb.my) / n;
  // Total sums = within + between.
  const double txx = wxx + ga.n * (ga.mx - gx) * (ga.mx - gx) + gb.n * (gb.mx - gx) * (gb.mx - gx);
  const double txy = wxy + ga.n * (ga.mx - gx) * (ga.my - gy) + gb.n * (gb.mx - gx) * (gb.my - gy);
  const double tyy = wyy + ga.n * (ga.my - gy) * (ga.my - gy) + gb.n * (gb.my - gy) * (gb.my - gy);

  AncovaResult r;
  r.common_slope = wxy / wxx;
  r.ss_within_adjusted = wyy - wxy * wxy / wxx;
  const double total_adjusted = tyy - txy * txy / txx;
  r.ss_between_adjusted = total_adjusted - r.ss_within_adjusted;
  const double df_within = n - 3.0;
  if (r.ss_within_adjusted <= 0.0) throw DegenerateVariance("ANCOVA residual variance is zero");
  const double ms_within = r.ss_within_adjusted / df_within;
  r.adjusted_mean_a = ga.my - r.common_slope * (ga.mx - gx);
  r.adjusted_mean_b = gb.my - r.common_slope * (gb.mx - gx);
  r.test.statistic = r.ss_between_adjusted / ms_within;
  r.test.df1 = 1.0;
  r.test.df2 = df_within;
  r.test.p_value = f_upper_p(r.test.statistic, 1.0, df_within);
  r.test.effect_size = (r.adjusted_mean_a - r.adjusted_mean_b) / std::sqrt(ms_within);
  return r;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("ols_slope: x and y differ in length");
  if (x.size() < 2) throw InsufficientEdits();
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw DegenerateVariance("regressor is constant");
  return sxy / sxx;
}

}  // namespace oele::stats
