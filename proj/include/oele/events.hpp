#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "oele/causal_map.hpp"
#include "oele/reasoning.hpp"

namespace oele {

// The five logged learner activities.
enum class Activity { Read, MakeNotes, MapEdit, TakeQuiz, QuizExpl };
inline constexpr std::array<Activity, 5> kAllActivities = {
    Activity::Read, Activity::MakeNotes, Activity::MapEdit, Activity::TakeQuiz,
    Activity::QuizExpl};

// Information acquisition, solution construction, solution assessment.
enum class Process { IA, SC, SA };

std::string_view to_string(Activity a);
std::string_view to_string(Process p);
Activity parse_activity(std::string_view s);
Process process_of(Activity a);

enum class EditKind { AddConcept, DeleteConcept, AddLink, DeleteLink, ModifyLink };
std::string_view to_string(EditKind k);
EditKind parse_edit_kind(std::string_view s);

struct ReadAction {
  std::string page;
  bool operator==(const ReadAction&) const = default;
};
struct NotesAction {
  std::string note;
  bool operator==(const NotesAction&) const = default;
};
struct MapEditAction {
  EditKind kind = EditKind::AddLink;
  Concept concept_value;   // AddConcept / DeleteConcept (only id for delete)
  CausalLink link;         // AddLink / DeleteLink, and the new link of ModifyLink
  CausalLink old_link;     // ModifyLink only
  bool operator==(const MapEditAction&) const = default;
};
struct QuizAction {
  QuizScope scope;
  bool operator==(const QuizAction&) const = default;
};
struct ExplAction {
  int question = 0;
  bool operator==(const ExplAction&) const = default;
};

using ActionDetail = std::variant<ReadAction, NotesAction, MapEditAction, QuizAction, ExplAction>;

struct ActionEvent {
  std::string student_id;
  double timestamp = 0.0;  // seconds from session start
  double duration = 0.0;
  ActionDetail detail;

  Activity activity() const { return static_cast<Activity>(detail.index()); }
  const MapEditAction* edit() const { return std::get_if<MapEditAction>(&detail); }
  bool operator==(const ActionEvent&) const = default;
};

// Marking-only modification (same endpoints and sign).
bool is_marking_change(const MapEditAction& e);
// Link an Add/Modify edit leaves on the map, if any.
const CausalLink* resulting_link(const MapEditAction& e);

enum class Effectiveness { Eff, Ineff, Neutral };
std::string_view to_string(Effectiveness e);
Effectiveness parse_effectiveness(std::string_view s);

struct AnnotatedEvent {
  ActionEvent base;
  Process process = Process::IA;
  Effectiveness effectiveness = Effectiveness::Neutral;
  bool long_read = false;
  std::optional<bool> coherent;
  int map_score_after = 0;

  Activity activity() const { return base.activity(); }
  bool is_edit(Effectiveness e) const {
    return activity() == Activity::MapEdit && effectiveness == e;
  }
  bool operator==(const AnnotatedEvent&) const = default;
};

// Token label used by collapse and mining, e.g. "Read", "LinkEdit-Ineff".
std::string event_label(const AnnotatedEvent& e);

}  // namespace oele
