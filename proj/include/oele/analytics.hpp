#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "oele/conversation.hpp"
#include "oele/engine.hpp"
#include "oele/events.hpp"

namespace oele {

// Normalized learning gain. Throws DegenerateDenominator when pre >= max.
double nlg(double pre, double post, double max);

struct OutcomeRecord {
  std::string student_id;
  double pre = 0.0;
  double post = 0.0;
  double max = 23.0;
  int final_map_score = 0;
  double gain() const { return nlg(pre, post, max); }
  bool operator==(const OutcomeRecord&) const = default;
};

struct MedianSplit {
  double median = 0.0;
  std::set<std::string> high, low, excluded;
};

// Students within band of the median (inclusive) are excluded; the rest go
// High or Low by side. The median is taken over all students. Throws
// std::invalid_argument for fewer than two students.
MedianSplit median_split(const std::map<std::string, int>& final_scores, double band = 1.0);

enum class Phase { Before, After };
std::string_view to_string(Phase p);

struct ScaffoldInterval {
  std::string student_id;
  ScaffoldKind kind = ScaffoldKind::Hint1MarkCorrect;
  Phase phase = Phase::Before;
  double start = 0.0;
  double end = 0.0;
  std::size_t ordinal = 1;  // 1 for the first delivery of this kind
  bool operator==(const ScaffoldInterval&) const = default;
};

// One student's deliveries in time order. Each delivery at t gets a Before
// span from the previous delivery (or 0) to t and an After span from t to the
// next delivery (or session_end).
std::vector<ScaffoldInterval> segment_intervals(const std::vector<ScaffoldDelivery>& deliveries,
                                                double session_end);

// OLS slope of score against edit ordinal 0, 1, 2, ... Throws
// InsufficientEdits for fewer than two scores.
double map_score_slope(const std::vector<double>& scores);
// Same, regressed on edit timestamps instead of ordinals.
double map_score_slope_wallclock(const std::vector<double>& times,
                                 const std::vector<double>& scores);

// Scores after each map edit starting in [start, end).
struct EditSeries {
  std::vector<double> times;
  std::vector<double> scores;
};
EditSeries edits_in_span(const std::vector<AnnotatedEvent>& annotated, double start, double end);

enum class Emotion { EngagedConcentration, Boredom, Delight, Confusion, Frustration };
inline constexpr std::array<Emotion, 5> kAllEmotions = {
    Emotion::EngagedConcentration, Emotion::Boredom, Emotion::Delight, Emotion::Confusion,
    Emotion::Frustration};
std::string_view to_string(Emotion e);

inline constexpr double kAffectWindowSeconds = 20.0;

struct AffectObservation {
  double timestamp = 0.0;
  std::array<double, 5> likelihood{};  // indexed by Emotion
  bool operator==(const AffectObservation&) const = default;
};

// Mean likelihood per emotion over observations with start <= t <= end.
// Throws NoObservationsInSpan.
std::array<double, 5> affect_aggregate(const std::vector<AffectObservation>& observations,
                                       double start, double end);

// Everything the report needs about one student.
struct StudentRecord {
  std::string student_id;
  std::string group;
  std::vector<AnnotatedEvent> annotated;
  std::vector<ScaffoldDelivery> deliveries;
  std::vector<AffectObservation> affect;
  std::optional<OutcomeRecord> outcome;
  double session_end = 0.0;
};

enum class SlopeRegressor { EditOrdinal, WallClock };

struct ReportOptions {
  SlopeRegressor regressor = SlopeRegressor::EditOrdinal;
  double median_band = 1.0;
  // Per-ordinal rows are emitted for ordinals 1..max_ordinal; later
  // deliveries still count towards the pooled row.
  std::size_t max_ordinal = 3;
};

// Tab-separated tables; see README for the column layout of each.
std::string time_distribution_table(const std::vector<StudentRecord>& cohort);
std::string delivery_count_table(const std::vector<StudentRecord>& cohort);
std::string slope_table(const std::vector<StudentRecord>& cohort, const ReportOptions& options);
std::string affect_table(const std::vector<StudentRecord>& cohort, const ReportOptions& options);
std::string outcome_tables(const std::vector<StudentRecord>& cohort, const ReportOptions& options);
std::string full_report(const std::vector<StudentRecord>& cohort, const ReportOptions& options);

}  // namespace oele
