#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "oele/events.hpp"
#include "oele/reasoning.hpp"

namespace oele {

// How a Read counts as "long". Absolute compares against a fixed number of
// seconds; Percentile compares against the given percentile (0-100) of the
// session's own read durations.
struct LongReadPolicy {
  enum class Mode { Absolute, Percentile };
  Mode mode = Mode::Absolute;
  double threshold_seconds = 60.0;
  double percentile = 75.0;
};

struct AnnotatorConfig {
  LongReadPolicy long_read;
  std::size_t path_cap = kDefaultPathCap;
};

// Incremental replay of one session: keeps the evolving student map, scores
// every edit, and grades quizzes. Events must be fed in timestamp order.
class SessionReplay {
 public:
  SessionReplay(const ExpertMap& expert, double long_threshold_seconds,
                std::size_t path_cap = kDefaultPathCap);

  // Throws OutOfOrderEvent or ReplayError.
  AnnotatedEvent step(const ActionEvent& event);

  const CausalMap& map() const { return map_; }
  int score() const { return score_; }
  std::size_t index() const { return index_; }
  // Result of the quiz taken by the most recent event, when it was a quiz.
  const std::optional<QuizResult>& quiz_from_last_step() const { return last_step_quiz_; }
  const std::optional<QuizResult>& last_quiz() const { return last_quiz_; }
  QuizBank& quiz_bank() { return bank_; }

 private:
  void apply_edit(const MapEditAction& edit);

  const ExpertMap* expert_;
  double long_threshold_;
  QuizBank bank_;
  CausalMap map_;
  int score_ = 0;
  std::size_t index_ = 0;
  std::optional<double> last_timestamp_;
  std::optional<QuizResult> last_step_quiz_;
  std::optional<QuizResult> last_quiz_;
};

// Resolves the long-read threshold in seconds for a session.
double long_read_threshold(const std::vector<ActionEvent>& events, const LongReadPolicy& policy);

std::vector<AnnotatedEvent> annotate_session(const std::vector<ActionEvent>& events,
                                             const ExpertMap& expert,
                                             const AnnotatorConfig& config = {});

// Marks each AddLink/ModifyLink as coherent when an earlier Read (at most
// lookback_seconds before it, unbounded when absent) covered a page
// supporting a link with the same endpoints.
std::vector<AnnotatedEvent> tag_coherence(std::vector<AnnotatedEvent> annotated,
                                          const ExpertMap& expert,
                                          std::optional<double> lookback_seconds = std::nullopt);

struct CollapsedToken {
  std::string label;
  std::size_t count = 1;
  double start = 0.0;
  double end = 0.0;
  bool operator==(const CollapsedToken&) const = default;
};

// Merges adjacent events with the same label; merged runs gain "-Mult".
std::vector<CollapsedToken> collapse(const std::vector<AnnotatedEvent>& annotated);
std::vector<std::string> token_labels(const std::vector<CollapsedToken>& tokens);

// Fraction of total time per activity, indexed by Activity.
using ActivityShares = std::array<double, 5>;
// Throws EmptySession when the total duration is zero.
ActivityShares time_distribution(const std::vector<AnnotatedEvent>& annotated);

// Fraction of scored (Eff or Ineff) map edits that were Eff; nullopt if none.
std::optional<double> edit_effectiveness(const std::vector<AnnotatedEvent>& annotated);
// Fraction of coherence-tagged edits that were coherent; nullopt if none.
std::optional<double> edit_coherence(const std::vector<AnnotatedEvent>& annotated);

}  // namespace oele
