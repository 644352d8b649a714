#include "oele/events.hpp"

#include "oele/error.hpp"

namespace oele {

std::string_view to_string(Activity a) {
  switch (a) {
    case Activity::Read: return "Read";
    case Activity::MakeNotes: return "MakeNotes";
    case Activity::MapEdit: return "MapEdit";
    case Activity::TakeQuiz: return "TakeQuiz";
    case Activity::QuizExpl: return "QuizExpl";
  }
  return "Read";
}

std::string_view to_string(Process p) {
  switch (p) {
    case Process::IA: return "IA";
    case Process::SC: return "SC";
    case Process::SA: return "SA";
  }
  return "IA";
}

Activity parse_activity(std::string_view s) {
  for (Activity a : kAllActivities) {
    if (to_string(a) == s) return a;
  }
  throw Error("unknown activity '" + std::string(s) + "'");
}

Process process_of(Activity a) {
  switch (a) {
    case Activity::Read:
    case Activity::MakeNotes: return Process::IA;
    case Activity::MapEdit: return Process::SC;
    case Activity::TakeQuiz:
    case Activity::QuizExpl: return Process::SA;
  }
  return Process::IA;
}

std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::AddConcept: return "AddConcept";
    case EditKind::DeleteConcept: return "DeleteConcept";
    case EditKind::AddLink: return "AddLink";
    case EditKind::DeleteLink: return "DeleteLink";
    case EditKind::ModifyLink: return "ModifyLink";
  }
  return "AddLink";
}

EditKind parse_edit_kind(std::string_view s) {
  for (EditKind k : {EditKind::AddConcept, EditKind::DeleteConcept, EditKind::AddLink,
                     EditKind::DeleteLink, EditKind::ModifyLink}) {
    if (to_string(k) == s) return k;
  }
  throw Error("unknown edit kind '" + std::string(s) + "'");
}

std::string_view to_string(Effectiveness e) {
  switch (e) {
    case Effectiveness::Eff: return "Eff";
    case Effectiveness::Ineff: return "Ineff";
    case Effectiveness::Neutral: return "Neutral";
  }
  return "Neutral";
}

Effectiveness parse_effectiveness(std::string_view s) {
  if (s == "Eff") return Effectiveness::Eff;
  if (s == "Ineff") return Effectiveness::Ineff;
  if (s == "Neutral") return Effectiveness::Neutral;
  throw Error("unknown effectiveness '" + std::string(s) + "'");
}

bool is_marking_change(const MapEditAction& e) {
  return e.kind == EditKind::ModifyLink && e.link.source == e.old_link.source &&
         e.link.target == e.old_link.target && e.link.sign == e.old_link.sign &&
         e.link.marking != e.old_link.marking;
}

const CausalLink* resulting_link(const MapEditAction& e) {
  return (e.kind == EditKind::AddLink || e.kind == EditKind::ModifyLink) ? &e.link : nullptr;
}

std::string event_label(const AnnotatedEvent& e) {
  auto with_effect = [&](std::string base) {
    if (e.effectiveness == Effectiveness::Neutral) return base;
    return base + "-" + std::string(to_string(e.effectiveness));
  };
  switch (e.activity()) {
    case Activity::Read: return "Read";
    case Activity::MakeNotes: return "Note";
    case Activity::TakeQuiz: return "QuizTaken";
    case Activity::QuizExpl: return "QuizExpl";
    case Activity::MapEdit: {
      const MapEditAction& edit = *e.base.edit();
      if (edit.kind == EditKind::AddConcept || edit.kind == EditKind::DeleteConcept) {
        return with_effect("ConceptEdit");
      }
      if (is_marking_change(edit)) return "LinkMark";
      return with_effect("LinkEdit");
    }
  }
  return "Read";
}

}  // namespace oele
