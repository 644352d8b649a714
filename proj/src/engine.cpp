#include "oele/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "oele/error.hpp"
#include "oele/stats.hpp"

namespace oele {

void EngineConfig::validate() const {
  if (!(min_inter_scaffold_seconds > 0.0)) {
    throw InvalidConfig("min_inter_scaffold_seconds must be positive");
  }
  if (hint1_window_events == 0) throw InvalidConfig("hint1_window_events must be positive");
  if (!(hint1_window_seconds > 0.0)) throw InvalidConfig("hint1_window_seconds must be positive");
  if (!(long_threshold_seconds > 0.0)) {
    throw InvalidConfig("long_threshold_seconds must be positive");
  }
  if (enc3_period == 0) throw InvalidConfig("enc3_period must be positive");
}

std::string_view to_string(DetectionOutcome o) {
  switch (o) {
    case DetectionOutcome::Delivered: return "Delivered";
    case DetectionOutcome::Suppressed: return "Suppressed";
    case DetectionOutcome::Disabled: return "Disabled";
    case DetectionOutcome::Cancelled: return "Cancelled";
    case DetectionOutcome::SessionEnded: return "SessionEnded";
  }
  return "Delivered";
}

namespace {

bool marks_correct(const AnnotatedEvent& e) {
  const MapEditAction* edit = e.base.edit();
  return edit && is_marking_change(*edit) && edit->link.marking == Marking::MarkedCorrect;
}

bool is_long_read(const AnnotatedEvent& e) {
  return e.activity() == Activity::Read && e.long_read;
}

// The link an edit left on the map, as it currently stands.
const CausalLink* edited_link_on_map(const AnnotatedEvent& edit_event, const CausalMap& map) {
  const MapEditAction* edit = edit_event.base.edit();
  if (!edit) return nullptr;
  const CausalLink* l = resulting_link(*edit);
  if (!l) return nullptr;
  const CausalLink* on_map = map.find_link(l->source, l->target);
  return (on_map && on_map->sign == l->sign) ? on_map : nullptr;
}

// The student already uses the "could be wrong" marking somewhere on the map.
bool flags_wrong_links(const CausalMap& map) {
  return std::any_of(map.links().begin(), map.links().end(), [](const auto& kv) {
    return kv.second.marking == Marking::MarkedCouldBeWrong;
  });
}

// Links behind correctly answered questions that are not yet marked correct.
std::vector<CausalLink> unmarked_correct_links(const QuizResult& quiz, const CausalMap& map) {
  std::set<LinkKey> seen;
  std::vector<CausalLink> out;
  for (const auto& item : quiz.items) {
    if (item.grade != Grade::Correct) continue;
    for (const auto& l : item.explanation_links) {
      const CausalLink* on_map = map.find_link(l.source, l.target);
      if (on_map && on_map->marking == Marking::MarkedCorrect) continue;
      if (seen.insert(l.endpoints()).second) out.push_back(l);
    }
  }
  return out;
}

std::string link_phrase(const CausalLink& l, const ExpertMap& expert) {
  auto name = [&](const std::string& id) {
    auto it = expert.map().concepts().find(id);
    return it == expert.map().concepts().end() ? id : it->second.name;
  };
  return "'" + name(l.source) + "' " +
         (l.sign == Sign::Increase ? "increases" : "decreases") + " '" + name(l.target) + "'";
}

}  // namespace

ScaffoldEngine::ScaffoldEngine(const ExpertMap& expert, EngineConfig config,
                               std::string student_id, const TreeLibrary& trees,
                               Responder responder)
    : expert_(&expert),
      config_(config),
      student_id_(std::move(student_id)),
      trees_(&trees),
      responder_(std::move(responder)) {
  config_.validate();
}

void ScaffoldEngine::record(ScaffoldKind kind, std::size_t prev, std::size_t cur, double at,
                            DetectionOutcome outcome) {
  detections_.push_back({kind, prev, cur, at, outcome});
}

std::vector<ScaffoldDelivery> ScaffoldEngine::observe(const AnnotatedEvent& event,
                                                      const CausalMap& map_after,
                                                      const QuizResult* quiz) {
  if (prev_ && event.base.timestamp < prev_->base.timestamp) {
    throw OutOfOrderEvent(index_, event.base.timestamp, prev_->base.timestamp);
  }
  std::vector<ScaffoldDelivery> out;
  resolve_pending(event, out);
  if (quiz) last_quiz_ = *quiz;
  if (prev_) {
    if (auto kind = detect(*prev_, event, map_after, quiz)) {
      TriggerContext trigger{index_ - 1, index_, event_label(*prev_), event_label(event), {}};
      attempt(*kind, std::move(trigger), event.base.timestamp, &map_after, std::nullopt, out);
    }
  }
  prev_ = event;
  ++index_;
  return out;
}

std::vector<ScaffoldDelivery> ScaffoldEngine::finish(double session_end) {
  std::vector<ScaffoldDelivery> out;
  if (pending_) {
    const double expiry = pending_->quiz_time + config_.hint1_window_seconds;
    if (expiry <= session_end) {
      fire_pending(expiry, std::nullopt, out);
    } else {
      record(ScaffoldKind::Hint1MarkCorrect, pending_->edit_index, pending_->quiz_index,
             session_end, DetectionOutcome::SessionEnded);
      pending_.reset();
    }
  }
  return out;
}

void ScaffoldEngine::resolve_pending(const AnnotatedEvent& event,
                                     std::vector<ScaffoldDelivery>& out) {
  if (!pending_) return;
  const double expiry = pending_->quiz_time + config_.hint1_window_seconds;
  if (event.base.timestamp >= expiry) {
    fire_pending(expiry, index_, out);
  } else if (marks_correct(event)) {
    record(ScaffoldKind::Hint1MarkCorrect, pending_->edit_index, pending_->quiz_index,
           event.base.timestamp, DetectionOutcome::Cancelled);
    pending_.reset();
  } else if (++pending_->events_seen >= config_.hint1_window_events) {
    fire_pending(event.base.timestamp, index_, out);
  }
}

void ScaffoldEngine::fire_pending(double at, std::optional<std::size_t> resolved,
                                  std::vector<ScaffoldDelivery>& out) {
  PendingHint1 p = std::move(*pending_);
  pending_.reset();
  TriggerContext trigger{p.edit_index, p.quiz_index, p.edit_label, "QuizTaken", resolved};
  TargetHints targets;
  if (p.unmarked_link) {
    targets.link = p.unmarked_link;
    targets.concept_id = p.unmarked_link->source;
  }
  attempt(ScaffoldKind::Hint1MarkCorrect, std::move(trigger), at, nullptr, std::move(targets),
          out);
}

std::optional<ScaffoldKind> ScaffoldEngine::detect(const AnnotatedEvent& prev,
                                                   const AnnotatedEvent& cur,
                                                   const CausalMap& map, const QuizResult* quiz) {
  const Activity cur_activity = cur.activity();

  if (is_long_read(prev) && cur_activity == Activity::MapEdit) {
    if (cur.effectiveness == Effectiveness::Ineff) return ScaffoldKind::Hint2AssessByQuiz;
    if (cur.effectiveness == Effectiveness::Eff) return ScaffoldKind::Enc2PraiseAndQuiz;
    return std::nullopt;
  }

  if (prev.is_edit(Effectiveness::Ineff) && cur_activity == Activity::TakeQuiz) {
    const CausalLink* link = edited_link_on_map(prev, map);
    if (link) {
      const LinkClass cls = classify_link(*link, *expert_);
      if (cls != LinkClass::Correct && link->marking == Marking::Unmarked && flags_wrong_links(map)) {
        return ScaffoldKind::Hint3MarkWrong;
      }
      if (cls == LinkClass::IncorrectShortcut) return ScaffoldKind::Hint4ShortcutLink;
    }
    ++debug_occasions_;
    return debug_occasions_ % config_.enc3_period == 0 ? ScaffoldKind::Enc3Reassure
                                                       : ScaffoldKind::Hint5DebugFromMap;
  }

  if (prev.is_edit(Effectiveness::Eff) && cur_activity == Activity::TakeQuiz && quiz &&
      quiz->correct_count() >= 1) {
    auto unmarked = unmarked_correct_links(*quiz, map);
    if (unmarked.empty()) return ScaffoldKind::Enc1Praise;
    if (!pending_) {
      pending_ = PendingHint1{index_ - 1, index_, event_label(prev), cur.base.timestamp,
                              unmarked.front(), 0};
    }
    return std::nullopt;
  }

  if (prev.activity() == Activity::TakeQuiz && is_long_read(cur) && last_quiz_ &&
      last_quiz_->incorrect_count() >= 1) {
    return ScaffoldKind::Hint6DebugFromRead;
  }
  return std::nullopt;
}

void ScaffoldEngine::attempt(ScaffoldKind kind, TriggerContext trigger, double at,
                             const CausalMap* map, std::optional<TargetHints> preset,
                             std::vector<ScaffoldDelivery>& out) {
  const std::size_t prev = trigger.prev, cur = trigger.cur;
  if (!config_.is_enabled(kind)) {
    record(kind, prev, cur, at, DetectionOutcome::Disabled);
    return;
  }
  const bool chained = kind == ScaffoldKind::Hint6DebugFromRead &&
                       last_delivery_kind_ == ScaffoldKind::Hint5DebugFromMap;
  if (last_delivery_time_ && at - *last_delivery_time_ < config_.min_inter_scaffold_seconds &&
      !chained) {
    record(kind, prev, cur, at, DetectionOutcome::Suppressed);
    return;
  }
  record(kind, prev, cur, at, DetectionOutcome::Delivered);

  ScaffoldDelivery d;
  d.student_id = student_id_;
  d.kind = kind;
  d.timestamp = at;
  d.trigger = std::move(trigger);
  d.targets = preset ? std::move(*preset) : targets_for(kind, *map);
  d.transcript = run_conversation(trees_->tree(kind), responder_, template_vars(d.targets));
  last_delivery_time_ = at;
  last_delivery_kind_ = kind;
  deliveries_.push_back(d);
  out.push_back(std::move(d));
}

TargetHints ScaffoldEngine::targets_for(ScaffoldKind kind, const CausalMap& map) {
  TargetHints t;
  switch (kind) {
    case ScaffoldKind::Hint3MarkWrong:
    case ScaffoldKind::Hint4ShortcutLink:
      if (const CausalLink* l = edited_link_on_map(*prev_, map)) {
        t.link = *l;
        t.concept_id = l->source;
      }
      break;
    case ScaffoldKind::Hint5DebugFromMap: {
      if (!last_quiz_) break;
      std::set<std::string> implicated;
      for (const auto& item : last_quiz_->items) {
        if (item.grade != Grade::Incorrect) continue;
        implicated.insert(item.question.source);
        implicated.insert(item.question.target);
      }
      std::vector<const CausalLink*> candidates;
      for (const auto& [key, l] : map.links()) {
        const CausalLink* e = expert_->map().find_link(key.first, key.second);
        const bool correct = e && e->sign == l.sign;
        if (!correct && (implicated.contains(l.source) || implicated.contains(l.target))) {
          candidates.push_back(&l);
        }
      }
      const CausalLink* pick = nullptr;
      if (!last_hint5_link_) {
        if (!candidates.empty()) pick = candidates.front();
      } else {
        for (const auto* c : candidates) {
          if (c->endpoints() > *last_hint5_link_) {
            pick = c;
            break;
          }
        }
        if (!pick && !candidates.empty() && candidates.front()->endpoints() != *last_hint5_link_) {
          pick = candidates.front();
        }
      }
      if (pick) {
        t.link = *pick;
        t.concept_id = pick->source;
        last_hint5_link_ = pick->endpoints();
      }
      break;
    }
    case ScaffoldKind::Hint6DebugFromRead: {
      if (!last_quiz_) break;
      for (const auto& item : last_quiz_->items) {
        if (item.grade != Grade::Incorrect) continue;
        for (const auto& el : item.question.expert_links) {
          const CausalLink* sl = map.find_link(el.source, el.target);
          if (sl && sl->sign == el.sign) continue;
          t.link = el;
          t.concept_id = el.source;
          t.page = el.source_page;
          return t;
        }
      }
      break;
    }
    default:
      break;
  }
  return t;
}

TemplateVars ScaffoldEngine::template_vars(const TargetHints& targets) const {
  TemplateVars vars{{"student", student_id_},
                    {"concept", "one of the concepts"},
                    {"link", "you added most recently"},
                    {"page", "the science book"}};
  if (targets.concept_id) {
    auto it = expert_->map().concepts().find(*targets.concept_id);
    vars["concept"] = it == expert_->map().concepts().end() ? *targets.concept_id
                                                           : it->second.name;
  }
  if (targets.link) vars["link"] = link_phrase(*targets.link, *expert_);
  if (targets.page) {
    auto it = expert_->pages().find(*targets.page);
    vars["page"] = it == expert_->pages().end() ? *targets.page : it->second.title;
  }
  return vars;
}

double session_end_time(const std::vector<ActionEvent>& events) {
  double end = 0.0;
  for (const auto& e : events) end = std::max(end, e.timestamp + e.duration);
  return end;
}

EngineRun run_engine(const std::vector<ActionEvent>& events, const ExpertMap& expert,
                     const EngineConfig& config, const std::string& student_id,
                     const TreeLibrary& trees) {
  EngineRun run;
  SessionReplay replay(expert, config.long_threshold_seconds);
  ScaffoldEngine engine(expert, config, student_id, trees);
  run.annotated.reserve(events.size());
  for (const auto& e : events) {
    run.annotated.push_back(replay.step(e));
    const auto& q = replay.quiz_from_last_step();
    engine.observe(run.annotated.back(), replay.map(), q ? &*q : nullptr);
  }
  run.session_end = session_end_time(events);
  engine.finish(run.session_end);
  run.deliveries = engine.deliveries();
  run.detections = engine.detections();
  return run;
}

// ---------------------------------------------------------------------------
// Offline verification

std::vector<std::string> verify_deliveries(const std::vector<ActionEvent>& events,
                                           const std::vector<ScaffoldDelivery>& deliveries,
                                           const ExpertMap& expert, const EngineConfig& config) {
  std::vector<std::string> problems;
  const std::size_t n = events.size();

  // Snapshot the map after every event and every graded quiz.
  SessionReplay replay(expert, config.long_threshold_seconds);
  std::vector<AnnotatedEvent> ann;
  std::vector<CausalMap> maps;
  std::vector<std::optional<QuizResult>> quizzes;
  ann.reserve(n);
  maps.reserve(n);
  quizzes.reserve(n);
  for (const auto& e : events) {
    ann.push_back(replay.step(e));
    maps.push_back(replay.map());
    quizzes.push_back(replay.quiz_from_last_step());
  }
  const double session_end = session_end_time(events);

  auto long_read = [&](std::size_t i) {
    return ann[i].activity() == Activity::Read && ann[i].base.duration >= config.long_threshold_seconds;
  };
  auto edit_with = [&](std::size_t i, Effectiveness eff) {
    return ann[i].activity() == Activity::MapEdit && ann[i].effectiveness == eff;
  };
  auto is_quiz = [&](std::size_t i) { return ann[i].activity() == Activity::TakeQuiz; };

  // Case analysis for an Edit-Ineff -> Quiz pair: 1 mark-wrong, 2 shortcut, 0 neither.
  auto ineff_quiz_case = [&](std::size_t cur) -> int {
    const MapEditAction* edit = ann[cur - 1].base.edit();
    const CausalLink* l = edit ? resulting_link(*edit) : nullptr;
    if (!l) return 0;
    const CausalLink* on_map = maps[cur].find_link(l->source, l->target);
    if (!on_map || on_map->sign != l->sign) return 0;
    const CausalLink* e = expert.map().find_link(l->source, l->target);
    const bool correct = e && e->sign == l->sign;
    bool flagged = false;
    for (const auto& [k, ml] : maps[cur].links()) {
      flagged |= ml.marking == Marking::MarkedCouldBeWrong;
    }
    if (!correct && on_map->marking == Marking::Unmarked && flagged) return 1;
    if (classify_link(*on_map, expert) == LinkClass::IncorrectShortcut) return 2;
    return 0;
  };
  auto all_correct_links_marked = [&](std::size_t quiz_index) {
    for (const auto& item : quizzes[quiz_index]->items) {
      if (item.grade != Grade::Correct) continue;
      for (const auto& l : item.explanation_links) {
        const CausalLink* m = maps[quiz_index].find_link(l.source, l.target);
        if (!m || m->marking != Marking::MarkedCorrect) return false;
      }
    }
    return true;
  };

  const ScaffoldDelivery* previous = nullptr;
  for (const auto& d : deliveries) {
    const std::string tag =
        d.student_id + " " + std::string(to_string(d.kind)) + "@" + std::to_string(d.timestamp);
    auto fail = [&](const std::string& why) { problems.push_back(tag + ": " + why); };

    if (!config.is_enabled(d.kind)) fail("kind is disabled");
    if (previous) {
      const bool chained = previous->kind == ScaffoldKind::Hint5DebugFromMap &&
                           d.kind == ScaffoldKind::Hint6DebugFromRead;
      if (d.timestamp < previous->timestamp) fail("deliveries out of order");
      if (!chained && d.timestamp - previous->timestamp < config.min_inter_scaffold_seconds) {
        fail("closer than the minimum inter-scaffold time");
      }
    }
    previous = &d;

    const std::size_t prev = d.trigger.prev, cur = d.trigger.cur;
    if (cur >= n || prev + 1 != cur) {
      fail("trigger indices do not form an adjacent event pair");
      continue;
    }
    if (d.kind != ScaffoldKind::Hint1MarkCorrect && d.timestamp != events[cur].timestamp) {
      fail("delivery time differs from the triggering event");
    }

    switch (d.kind) {
      case ScaffoldKind::Hint2AssessByQuiz:
        if (!long_read(prev) || !edit_with(cur, Effectiveness::Ineff)) fail("not Read-Long -> Edit-Ineff");
        break;
      case ScaffoldKind::Enc2PraiseAndQuiz:
        if (!long_read(prev) || !edit_with(cur, Effectiveness::Eff)) fail("not Read-Long -> Edit-Eff");
        break;
      case ScaffoldKind::Hint3MarkWrong:
      case ScaffoldKind::Hint4ShortcutLink:
      case ScaffoldKind::Hint5DebugFromMap:
      case ScaffoldKind::Enc3Reassure: {
        if (!edit_with(prev, Effectiveness::Ineff) || !is_quiz(cur)) {
          fail("not Edit-Ineff -> Quiz");
          break;
        }
        const int c = ineff_quiz_case(cur);
        if (d.kind == ScaffoldKind::Hint3MarkWrong && c != 1) fail("mark-wrong case does not hold");
        if (d.kind == ScaffoldKind::Hint4ShortcutLink && c != 2) fail("edit is not a shortcut link");
        if (d.kind == ScaffoldKind::Hint5DebugFromMap || d.kind == ScaffoldKind::Enc3Reassure) {
          if (c != 0) {
            fail("an earlier case applies");
            break;
          }
          // Position among plain Edit-Ineff -> Quiz occasions decides the kind.
          unsigned occasion = 0;
          for (std::size_t j = 1; j <= cur; ++j) {
            if (edit_with(j - 1, Effectiveness::Ineff) && is_quiz(j) && ineff_quiz_case(j) == 0) {
              ++occasion;
            }
          }
          const bool enc3 = occasion % config.enc3_period == 0;
          if (enc3 != (d.kind == ScaffoldKind::Enc3Reassure)) fail("alternation policy mismatch");
        }
        break;
      }
      case ScaffoldKind::Hint6DebugFromRead:
        if (!is_quiz(prev) || !long_read(cur)) {
          fail("not Quiz -> Read-Long");
        } else if (quizzes[prev]->incorrect_count() == 0) {
          fail("quiz had no incorrect answer");
        }
        break;
      case ScaffoldKind::Enc1Praise:
        if (!edit_with(prev, Effectiveness::Eff) || !is_quiz(cur)) {
          fail("not Edit-Eff -> Quiz");
        } else if (quizzes[cur]->correct_count() == 0) {
          fail("quiz had no correct answer");
        } else if (!all_correct_links_marked(cur)) {
          fail("praise case requires every correct-answer link marked");
        }
        break;
      case ScaffoldKind::Hint1MarkCorrect: {
        if (!edit_with(prev, Effectiveness::Eff) || !is_quiz(cur)) {
          fail("not Edit-Eff -> Quiz");
          break;
        }
        if (quizzes[cur]->correct_count() == 0) fail("quiz had no correct answer");
        if (all_correct_links_marked(cur)) fail("links already marked; praise case applies");
        const double expiry = events[cur].timestamp + config.hint1_window_seconds;
        std::optional<double> expected;
        for (std::size_t j = cur + 1; j < n && !expected; ++j) {
          if (events[j].timestamp >= expiry) {
            expected = expiry;
          } else if (const MapEditAction* e = events[j].edit();
                     e && is_marking_change(*e) && e->link.marking == Marking::MarkedCorrect) {
            fail("student marked a link correct inside the follow-up window");
            expected = -1.0;
          } else if (j - cur == config.hint1_window_events) {
            expected = events[j].timestamp;
          }
        }
        if (!expected) {
          if (expiry > session_end) fail("follow-up window never closed");
          expected = expiry;
        }
        if (*expected >= 0.0 && d.timestamp != *expected) fail("wrong follow-up delivery time");
        break;
      }
    }
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Delivery counts

std::map<std::string, std::map<ScaffoldKind, KindCounts>> delivery_counts(
    const std::vector<ScaffoldDelivery>& deliveries,
    const std::map<std::string, std::string>& grouping) {
  std::map<std::string, std::map<ScaffoldKind, std::size_t>> per_student;
  for (const auto& d : deliveries) {
    if (grouping.contains(d.student_id)) ++per_student[d.student_id][d.kind];
  }
  std::map<std::string, std::vector<std::string>> members;
  for (const auto& [student, group] : grouping) members[group].push_back(student);

  std::map<std::string, std::map<ScaffoldKind, KindCounts>> out;
  for (const auto& [group, students] : members) {
    for (ScaffoldKind k : kAllScaffoldKinds) {
      KindCounts c;
      c.students = students.size();
      std::vector<double> received;
      bool first = true;
      for (const auto& s : students) {
        std::size_t count = 0;
        if (auto it = per_student.find(s); it != per_student.end()) {
          if (auto jt = it->second.find(k); jt != it->second.end()) count = jt->second;
        }
        c.min = first ? count : std::min(c.min, count);
        c.max = first ? count : std::max(c.max, count);
        first = false;
        c.histogram[std::min<std::size_t>(count, 4)] += 1;
        if (count > 0) received.push_back(static_cast<double>(count));
      }
      c.receivers = received.size();
      if (!received.empty()) {
        c.mean = stats::mean(received);
        c.sd = stats::sd(received);
      }
      out[group][k] = c;
    }
  }
  return out;
}

}  // namespace oele
