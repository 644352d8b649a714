#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oele/annotator.hpp"
#include "oele/causal_map.hpp"
#include "oele/conversation.hpp"
#include "oele/events.hpp"
#include "oele/reasoning.hpp"

namespace oele {

struct EngineConfig {
  double min_inter_scaffold_seconds = 60.0;
  std::size_t hint1_window_events = 5;
  double hint1_window_seconds = 120.0;
  double long_threshold_seconds = 60.0;
  // Among Edit-Ineff -> Quiz occasions that match neither the mark-wrong nor
  // the shortcut case, every enc3_period-th one reassures; the rest debug.
  unsigned enc3_period = 3;
  std::array<bool, 9> enabled = {true, true, true, true, true, true, true, true, true};

  bool is_enabled(ScaffoldKind k) const { return enabled[index_of(k)]; }
  // Throws InvalidConfig unless every window and threshold is positive.
  void validate() const;
};

// The inflection pair that fired a scaffold: indices into the session's
// event stream. For Hint1, prev/cur are the edit and the quiz; resolved is
// the event at which the follow-up window closed (absent at session end).
struct TriggerContext {
  std::size_t prev = 0;
  std::size_t cur = 0;
  std::string prev_label;
  std::string cur_label;
  std::optional<std::size_t> resolved;
  bool operator==(const TriggerContext&) const = default;
};

struct TargetHints {
  std::optional<CausalLink> link;
  std::optional<std::string> concept_id;
  std::optional<std::string> page;
  bool empty() const { return !link && !concept_id && !page; }
  bool operator==(const TargetHints&) const = default;
};

struct ScaffoldDelivery {
  std::string student_id;
  ScaffoldKind kind = ScaffoldKind::Hint1MarkCorrect;
  double timestamp = 0.0;
  TriggerContext trigger;
  TargetHints targets;
  Transcript transcript;

  Agent agent() const { return agent_of(kind); }
  bool operator==(const ScaffoldDelivery&) const = default;
};

enum class DetectionOutcome { Delivered, Suppressed, Disabled, Cancelled, SessionEnded };
std::string_view to_string(DetectionOutcome o);

// Every trigger match, including those that did not produce a delivery.
struct Detection {
  ScaffoldKind kind;
  std::size_t prev = 0;
  std::size_t cur = 0;
  double timestamp = 0.0;
  DetectionOutcome outcome = DetectionOutcome::Delivered;
  bool operator==(const Detection&) const = default;
};

// Online trigger detector for one student session. Feed annotated events in
// order together with the map state after each event and, for quiz events,
// the graded quiz.
class ScaffoldEngine {
 public:
  ScaffoldEngine(const ExpertMap& expert, EngineConfig config, std::string student_id,
                 const TreeLibrary& trees = bundled_trees(),
                 Responder responder = first_option_responder);

  // Throws OutOfOrderEvent. May return up to two deliveries: an expired
  // mark-correct follow-up and a trigger on this event.
  std::vector<ScaffoldDelivery> observe(const AnnotatedEvent& event, const CausalMap& map_after,
                                        const QuizResult* quiz);
  // Closes a pending mark-correct follow-up whose window ends by session_end.
  std::vector<ScaffoldDelivery> finish(double session_end);

  const std::vector<Detection>& detections() const { return detections_; }
  const std::vector<ScaffoldDelivery>& deliveries() const { return deliveries_; }
  const EngineConfig& config() const { return config_; }

 private:
  struct PendingHint1 {
    std::size_t edit_index;
    std::size_t quiz_index;
    std::string edit_label;
    double quiz_time;
    std::optional<CausalLink> unmarked_link;
    std::size_t events_seen = 0;
  };

  void resolve_pending(const AnnotatedEvent& event, std::vector<ScaffoldDelivery>& out);
  void fire_pending(double at, std::optional<std::size_t> resolved,
                    std::vector<ScaffoldDelivery>& out);
  void record(ScaffoldKind kind, std::size_t prev, std::size_t cur, double at,
              DetectionOutcome outcome);
  std::optional<ScaffoldKind> detect(const AnnotatedEvent& prev, const AnnotatedEvent& cur,
                                     const CausalMap& map, const QuizResult* quiz);
  void attempt(ScaffoldKind kind, TriggerContext trigger, double at, const CausalMap* map,
               std::optional<TargetHints> preset, std::vector<ScaffoldDelivery>& out);
  TargetHints targets_for(ScaffoldKind kind, const CausalMap& map);
  TemplateVars template_vars(const TargetHints& targets) const;

  const ExpertMap* expert_;
  EngineConfig config_;
  std::string student_id_;
  const TreeLibrary* trees_;
  Responder responder_;

  std::size_t index_ = 0;
  std::optional<AnnotatedEvent> prev_;
  std::optional<QuizResult> last_quiz_;
  std::optional<PendingHint1> pending_;
  unsigned debug_occasions_ = 0;
  std::optional<LinkKey> last_hint5_link_;
  std::optional<double> last_delivery_time_;
  std::optional<ScaffoldKind> last_delivery_kind_;
  std::vector<Detection> detections_;
  std::vector<ScaffoldDelivery> deliveries_;
};

// Replays a raw session through the annotator and engine, as done offline
// over recorded logs.
struct EngineRun {
  std::vector<AnnotatedEvent> annotated;
  std::vector<ScaffoldDelivery> deliveries;
  std::vector<Detection> detections;
  double session_end = 0.0;
};

double session_end_time(const std::vector<ActionEvent>& events);

EngineRun run_engine(const std::vector<ActionEvent>& events, const ExpertMap& expert,
                     const EngineConfig& config, const std::string& student_id,
                     const TreeLibrary& trees = bundled_trees());

// Offline re-check of each delivery's trigger condition against the session
// log, written independently of the online state machine. Returns one
// message per violation; empty means every delivery is justified.
std::vector<std::string> verify_deliveries(const std::vector<ActionEvent>& events,
                                           const std::vector<ScaffoldDelivery>& deliveries,
                                           const ExpertMap& expert, const EngineConfig& config);

struct KindCounts {
  std::size_t students = 0;        // students in the group
  std::size_t receivers = 0;       // students with >= 1 delivery
  std::size_t min = 0, max = 0;    // over all students in the group
  double mean = 0.0, sd = 0.0;     // over receivers only
  std::array<std::size_t, 5> histogram{};  // never, 1, 2, 3, 4+
};

// group -> kind -> counts. grouping maps student id to group name; deliveries
// to students absent from grouping are ignored.
std::map<std::string, std::map<ScaffoldKind, KindCounts>> delivery_counts(
    const std::vector<ScaffoldDelivery>& deliveries,
    const std::map<std::string, std::string>& grouping);

}  // namespace oele
