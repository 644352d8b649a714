#include "oele/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "oele/error.hpp"
#include "oele/stats.hpp"

namespace oele {

double nlg(double pre, double post, double max) {
  if (!(pre < max)) throw DegenerateDenominator();
  return (post - pre) / (max - pre);
}

MedianSplit median_split(const std::map<std::string, int>& final_scores, double band) {
  if (final_scores.size() < 2) throw std::invalid_argument("median_split needs two students");
  std::vector<double> values;
  values.reserve(final_scores.size());
  for (const auto& [id, s] : final_scores) values.push_back(s);
  MedianSplit out;
  out.median = stats::median(values);
  for (const auto& [id, s] : final_scores) {
    if (std::fabs(s - out.median) <= band) {
      out.excluded.insert(id);
    } else if (s > out.median) {
      out.high.insert(id);
    } else {
      out.low.insert(id);
    }
  }
  return out;
}

std::string_view to_string(Phase p) { return p == Phase::Before ? "before" : "after"; }

std::vector<ScaffoldInterval> segment_intervals(const std::vector<ScaffoldDelivery>& deliveries,
                                                double session_end) {
  std::vector<ScaffoldInterval> out;
  std::map<ScaffoldKind, std::size_t> seen;
  for (std::size_t i = 0; i < deliveries.size(); ++i) {
    const auto& d = deliveries[i];
    const double before = i == 0 ? 0.0 : deliveries[i - 1].timestamp;
    const double after = i + 1 < deliveries.size() ? deliveries[i + 1].timestamp : session_end;
    const std::size_t ordinal = ++seen[d.kind];
    out.push_back({d.student_id, d.kind, Phase::Before, before, d.timestamp, ordinal});
    out.push_back({d.student_id, d.kind, Phase::After, d.timestamp, after, ordinal});
  }
  return out;
}

double map_score_slope(const std::vector<double>& scores) {
  std::vector<double> x(scores.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  return stats::ols_slope(x, scores);
}

double map_score_slope_wallclock(const std::vector<double>& times,
                                 const std::vector<double>& scores) {
  return stats::ols_slope(times, scores);
}

EditSeries edits_in_span(const std::vector<AnnotatedEvent>& annotated, double start, double end) {
  EditSeries s;
  for (const auto& e : annotated) {
    if (e.activity() != Activity::MapEdit) continue;
    if (e.base.timestamp < start || e.base.timestamp >= end) continue;
    s.times.push_back(e.base.timestamp);
    s.scores.push_back(e.map_score_after);
  }
  return s;
}

std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::EngagedConcentration: return "engaged_concentration";
    case Emotion::Boredom: return "boredom";
    case Emotion::Delight: return "delight";
    case Emotion::Confusion: return "confusion";
    case Emotion::Frustration: return "frustration";
  }
  return "engaged_concentration";
}

std::array<double, 5> affect_aggregate(const std::vector<AffectObservation>& observations,
                                       double start, double end) {
  std::array<double, 5> sum{};
  std::size_t n = 0;
  for (const auto& o : observations) {
    if (o.timestamp < start || o.timestamp > end) continue;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += o.likelihood[k];
    ++n;
  }
  if (n == 0) throw NoObservationsInSpan();
  for (double& v : sum) v /= static_cast<double>(n);
  return sum;
}

// ---------------------------------------------------------------------------
// Report tables

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v, int precision = 2) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Avoid printing "-0.00".
  std::string s = fmt::format("{:.{}f}", v, precision);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

std::string mean_sd(const std::vector<double>& xs) {
  if (xs.empty()) return "NA";
  return num(stats::mean(xs)) + " (" + num(stats::sd(xs)) + ")";
}

std::string p_text(double p) {
  if (std::isnan(p)) return "NA";
  return p < 0.0001 ? "<0.0001" : num(p, 4);
}

std::vector<std::string> group_names(const std::vector<StudentRecord>& cohort) {
  std::set<std::string> names;
  for (const auto& s : cohort) names.insert(s.group);
  return {names.begin(), names.end()};
}

std::vector<const StudentRecord*> members(const std::vector<StudentRecord>& cohort,
                                          const std::string& group) {
  std::vector<const StudentRecord*> out;
  for (const auto& s : cohort) {
    if (s.group == group) out.push_back(&s);
  }
  return out;
}

std::set<ScaffoldKind> delivered_kinds(const std::vector<StudentRecord>& cohort) {
  std::set<ScaffoldKind> kinds;
  for (const auto& s : cohort) {
    for (const auto& d : s.deliveries) kinds.insert(d.kind);
  }
  return kinds;
}

double interval_slope(const StudentRecord& s, const ScaffoldInterval& iv,
                      SlopeRegressor regressor) {
  const EditSeries e = edits_in_span(s.annotated, iv.start, iv.end);
  try {
    return regressor == SlopeRegressor::EditOrdinal ? map_score_slope(e.scores)
                                                    : map_score_slope_wallclock(e.times, e.scores);
  } catch (const InsufficientEdits&) {
    return kNaN;
  } catch (const DegenerateVariance&) {
    return kNaN;
  }
}

// Averages a per-interval measure for one (kind, group, phase), either at a
// single ordinal or pooled. Pooled values are averaged within each student
// first, then across students; intervals with an undefined value are skipped.
template <typename Value>
std::vector<Value> per_student_values(const std::vector<const StudentRecord*>& group,
                                      ScaffoldKind kind, Phase phase,
                                      std::optional<std::size_t> ordinal,
                                      const auto& measure) {
  std::vector<Value> out;
  for (const auto* s : group) {
    std::vector<Value> mine;
    for (const auto& iv : segment_intervals(s->deliveries, s->session_end)) {
      if (iv.kind != kind || iv.phase != phase) continue;
      if (ordinal && iv.ordinal != *ordinal) continue;
      if (auto v = measure(*s, iv)) mine.push_back(*v);
    }
    if (mine.empty()) continue;
    Value avg{};
    for (const auto& v : mine) {
      if constexpr (std::is_same_v<Value, double>) {
        avg += v;
      } else {
        for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += v[k];
      }
    }
    if constexpr (std::is_same_v<Value, double>) {
      avg /= static_cast<double>(mine.size());
    } else {
      for (auto& a : avg) a /= static_cast<double>(mine.size());
    }
    out.push_back(avg);
  }
  return out;
}

std::vector<std::optional<std::size_t>> ordinal_rows(std::size_t max_ordinal) {
  std::vector<std::optional<std::size_t>> rows;
  for (std::size_t k = 1; k <= max_ordinal; ++k) rows.emplace_back(k);
  rows.emplace_back(std::nullopt);
  return rows;
}

std::string ordinal_text(const std::optional<std::size_t>& o) {
  return o ? std::to_string(*o) : "all";
}

}  // namespace

std::string time_distribution_table(const std::vector<StudentRecord>& cohort) {
  std::string out =
      "group\tn\tread\tmake_notes\tmap_edit\ttake_quiz\tquiz_expl\tia\tsc\tsa\n";
  for (const auto& g : group_names(cohort)) {
    std::array<double, 5> sum{};
    std::size_t n = 0;
    for (const auto* s : members(cohort, g)) {
      try {
        const auto shares = time_distribution(s->annotated);
        for (std::size_t k = 0; k < 5; ++k) sum[k] += shares[k];
        ++n;
      } catch (const EmptySession&) {
      }
    }
    std::array<double, 5> pct{};
    for (std::size_t k = 0; k < 5; ++k) pct[k] = n ? 100.0 * sum[k] / static_cast<double>(n) : kNaN;
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", g, n, num(pct[0]), num(pct[1]),
                       num(pct[2]), num(pct[3]), num(pct[4]), num(pct[0] + pct[1]), num(pct[2]),
                       num(pct[3] + pct[4]));
  }
  return out;
}

std::string delivery_count_table(const std::vector<StudentRecord>& cohort) {
  std::vector<ScaffoldDelivery> all;
  std::map<std::string, std::string> grouping;
  for (const auto& s : cohort) {
    grouping[s.student_id] = s.group;
    all.insert(all.end(), s.deliveries.begin(), s.deliveries.end());
  }
  const auto counts = delivery_counts(all, grouping);
  const auto names = group_names(cohort);

  std::string out = "scaffold\tgroup\trange\tmean_sd\tnever\tonce\ttwice\tthree\tfour_plus\n";
  for (ScaffoldKind k : kAllScaffoldKinds) {
    for (const auto& g : names) {
      const KindCounts& c = counts.at(g).at(k);
      auto cell = [&](std::size_t v) {
        if (v == 0) return std::string("0");
        return fmt::format("{} ({}%)", v, num(100.0 * v / static_cast<double>(c.students), 1));
      };
      const std::string ms = c.receivers ? num(c.mean, 1) + " (" + num(c.sd, 1) + ")" : "NA";
      out += fmt::format("{}\t{}\t{}-{}\t{}\t{}\t{}\t{}\t{}\t{}\n", to_string(k), g, c.min, c.max,
                         ms, cell(c.histogram[0]), cell(c.histogram[1]), cell(c.histogram[2]),
                         cell(c.histogram[3]), cell(c.histogram[4]));
    }
  }

  // Between-group t tests on counts among students who received the scaffold.
  if (names.size() == 2) {
    out += "\nscaffold\tt\tdf\tp_value\n";
    for (ScaffoldKind k : kAllScaffoldKinds) {
      std::array<std::vector<double>, 2> xs;
      for (std::size_t gi = 0; gi < 2; ++gi) {
        for (const auto* s : members(cohort, names[gi])) {
          const auto c = std::count_if(s->deliveries.begin(), s->deliveries.end(),
                                       [&](const ScaffoldDelivery& d) { return d.kind == k; });
          if (c > 0) xs[gi].push_back(static_cast<double>(c));
        }
      }
      const auto t = stats::pooled_t_test(xs[0], xs[1]);
      out += fmt::format("{}\t{}\t{}\t{}\n", to_string(k), num(t.statistic),
                         std::isnan(t.statistic) || t.df1 <= 0 ? "NA" : num(t.df1, 0),
                         p_text(t.p_value));
    }
  }
  return out;
}

std::string slope_table(const std::vector<StudentRecord>& cohort, const ReportOptions& options) {
  std::string out =
      "scaffold\tgroup\tordinal\tn_before\tslope_before\tn_after\tslope_after\tdelta\n";
  auto measure = [&](const StudentRecord& s, const ScaffoldInterval& iv) -> std::optional<double> {
    const double v = interval_slope(s, iv, options.regressor);
    if (std::isnan(v)) return std::nullopt;
    return v;
  };
  for (ScaffoldKind k : delivered_kinds(cohort)) {
    for (const auto& g : group_names(cohort)) {
      const auto group = members(cohort, g);
      for (const auto& ord : ordinal_rows(options.max_ordinal)) {
        const auto before = per_student_values<double>(group, k, Phase::Before, ord, measure);
        const auto after = per_student_values<double>(group, k, Phase::After, ord, measure);
        if (before.empty() && after.empty()) continue;
        const double mb = before.empty() ? kNaN : stats::mean(before);
        const double ma = after.empty() ? kNaN : stats::mean(after);
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", to_string(k), g, ordinal_text(ord),
                           before.size(), num(mb, 3), after.size(), num(ma, 3), num(ma - mb, 3));
      }
    }
  }
  return out;
}

std::string affect_table(const std::vector<StudentRecord>& cohort, const ReportOptions& options) {
  std::string out = "scaffold\tgroup\tordinal\tphase\tn";
  for (Emotion e : kAllEmotions) out += fmt::format("\t{}", to_string(e));
  out += '\n';
  using Vec = std::array<double, 5>;
  auto measure = [](const StudentRecord& s, const ScaffoldInterval& iv) -> std::optional<Vec> {
    try {
      return affect_aggregate(s.affect, iv.start, iv.end);
    } catch (const NoObservationsInSpan&) {
      return std::nullopt;
    }
  };
  for (ScaffoldKind k : delivered_kinds(cohort)) {
    for (const auto& g : group_names(cohort)) {
      const auto group = members(cohort, g);
      for (const auto& ord : ordinal_rows(options.max_ordinal)) {
        for (Phase ph : {Phase::Before, Phase::After}) {
          const auto vals = per_student_values<Vec>(group, k, ph, ord, measure);
          if (vals.empty()) continue;
          out += fmt::format("{}\t{}\t{}\t{}\t{}", to_string(k), g, ordinal_text(ord),
                             to_string(ph), vals.size());
          for (std::size_t e = 0; e < 5; ++e) {
            double sum = 0.0;
            for (const auto& v : vals) sum += v[e];
            out += "\t" + num(100.0 * sum / static_cast<double>(vals.size()));
          }
          out += '\n';
        }
      }
    }
  }
  return out;
}

std::string outcome_tables(const std::vector<StudentRecord>& cohort, const ReportOptions& options) {
  struct Columns {
    std::vector<double> pre, post, gain, fcms;
    std::vector<stats::CovariatePair> pre_gain;
  };
  auto collect = [](const std::vector<const StudentRecord*>& group) {
    Columns c;
    for (const auto* s : group) {
      if (!s->outcome) continue;
      const auto& o = *s->outcome;
      c.pre.push_back(o.pre);
      c.post.push_back(o.post);
      c.fcms.push_back(o.final_map_score);
      try {
        const double g = o.gain();
        c.gain.push_back(g);
        c.pre_gain.push_back({o.pre, g});
      } catch (const DegenerateDenominator&) {
      }
    }
    return c;
  };
  auto anova_cells = [](const std::vector<double>& a, const std::vector<double>& b) {
    try {
      const auto r = stats::one_way_anova(a, b);
      return fmt::format("{} ({})\t{}", num(r.statistic), p_text(r.p_value), num(r.effect_size));
    } catch (const Error&) {
      return std::string("NA\tNA");
    }
  };

  std::vector<const StudentRecord*> everyone;
  for (const auto& s : cohort) everyone.push_back(&s);
  const auto names = group_names(cohort);

  std::string out =
      "category\tn\tpre_mean_sd\tpost_mean_sd\tnlg_mean_sd\tpre_post_F_p\tcohens_d\tfcms_mean_sd\n";
  auto row = [&](const std::string& label, const std::vector<const StudentRecord*>& group) {
    const Columns c = collect(group);
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", label, c.pre.size(), mean_sd(c.pre),
                       mean_sd(c.post), mean_sd(c.gain), anova_cells(c.post, c.pre),
                       mean_sd(c.fcms));
  };
  row("Overall", everyone);
  for (const auto& g : names) row(g, members(cohort, g));

  if (names.size() == 2) {
    const Columns a = collect(members(cohort, names[0]));
    const Columns b = collect(members(cohort, names[1]));
    out += fmt::format("\ncomparison\tF_p\tcohens_d\n");
    out += fmt::format("nlg {} vs {}\t{}\n", names[0], names[1], anova_cells(a.gain, b.gain));
    out += fmt::format("pre {} vs {}\t{}\n", names[0], names[1], anova_cells(a.pre, b.pre));
    std::string ancova = "NA\tNA";
    try {
      const auto r = stats::one_way_ancova(a.pre_gain, b.pre_gain);
      ancova = fmt::format("{} ({})\t{}", num(r.test.statistic), p_text(r.test.p_value),
                           num(r.test.effect_size));
    } catch (const Error&) {
    }
    out += fmt::format("nlg {} vs {} | pre\t{}\n", names[0], names[1], ancova);
  }

  const Columns all = collect(everyone);
  out += "\nmeasure\tskewness\texcess_kurtosis\n";
  out += fmt::format("nlg\t{}\t{}\n", num(stats::skewness(all.gain), 3),
                     num(stats::excess_kurtosis(all.gain), 3));

  std::map<std::string, int> finals;
  for (const auto& s : cohort) {
    if (s.outcome) finals[s.student_id] = s.outcome->final_map_score;
  }
  if (finals.size() >= 2) {
    const auto split = median_split(finals, options.median_band);
    out += "\nmedian_fcms\tband\thigh\tlow\texcluded\n";
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", num(split.median, 1), num(options.median_band, 1),
                       split.high.size(), split.low.size(), split.excluded.size());
  }
  return out;
}

std::string full_report(const std::vector<StudentRecord>& cohort, const ReportOptions& options) {
  std::string out;
  out += "## time distribution (% of total time)\n" + time_distribution_table(cohort);
  out += "\n## scaffold counts\n" + delivery_count_table(cohort);
  out += "\n## map-score slope before/after scaffold\n" + slope_table(cohort, options);
  out += "\n## affect before/after scaffold (% likelihood)\n" + affect_table(cohort, options);
  out += "\n## learning outcomes\n" + outcome_tables(cohort, options);
  return out;
}

}  // namespace oele
