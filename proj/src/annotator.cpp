#include "oele/annotator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "oele/error.hpp"

namespace oele {

SessionReplay::SessionReplay(const ExpertMap& expert, double long_threshold_seconds,
                             std::size_t path_cap)
    : expert_(&expert), long_threshold_(long_threshold_seconds), bank_(expert, path_cap) {}

void SessionReplay::apply_edit(const MapEditAction& edit) {
  auto fail = [&](const std::string& what) { throw ReplayError(index_, what); };
  switch (edit.kind) {
    case EditKind::AddConcept: {
      if (map_.has_concept(edit.concept_value.id)) {
        fail("concept '" + edit.concept_value.id + "' already on map");
      }
      Concept c = edit.concept_value;
      if (const auto it = expert_->map().concepts().find(c.id);
          it != expert_->map().concepts().end()) {
        if (c.name.empty()) c.name = it->second.name;
        if (c.section.empty()) c.section = it->second.section;
      }
      map_.add_concept(std::move(c));
      break;
    }
    case EditKind::DeleteConcept:
      if (!map_.has_concept(edit.concept_value.id)) {
        fail("concept '" + edit.concept_value.id + "' not on map");
      }
      map_.remove_concept(edit.concept_value.id);
      break;
    case EditKind::AddLink: {
      const CausalLink& l = edit.link;
      if (!map_.has_concept(l.source) || !map_.has_concept(l.target)) {
        fail("link endpoint missing for '" + l.source + "' -> '" + l.target + "'");
      }
      if (l.source == l.target) fail("self-loop on '" + l.source + "'");
      if (map_.find_link(l.source, l.target)) {
        fail("link '" + l.source + "' -> '" + l.target + "' already on map");
      }
      map_.add_link(l);
      break;
    }
    case EditKind::DeleteLink: {
      const CausalLink* existing = map_.find_link(edit.link.source, edit.link.target);
      if (!existing || existing->sign != edit.link.sign) {
        fail("cannot delete absent link '" + edit.link.source + "' -> '" + edit.link.target + "'");
      }
      map_.remove_link(edit.link.source, edit.link.target);
      break;
    }
    case EditKind::ModifyLink: {
      const CausalLink& o = edit.old_link;
      const CausalLink& n = edit.link;
      const CausalLink* existing = map_.find_link(o.source, o.target);
      if (!existing || existing->sign != o.sign || existing->marking != o.marking) {
        fail("cannot modify absent link '" + o.source + "' -> '" + o.target + "'");
      }
      if (o.source == n.source && o.target == n.target) {
        map_.replace_link(n);
      } else {
        if (!map_.has_concept(n.source) || !map_.has_concept(n.target) ||
            n.source == n.target || map_.find_link(n.source, n.target)) {
          fail("invalid retarget to '" + n.source + "' -> '" + n.target + "'");
        }
        map_.remove_link(o.source, o.target);
        map_.add_link(n);
      }
      break;
    }
  }
}

AnnotatedEvent SessionReplay::step(const ActionEvent& event) {
  if (last_timestamp_ && event.timestamp < *last_timestamp_) {
    throw OutOfOrderEvent(index_, event.timestamp, *last_timestamp_);
  }
  if (!(event.duration >= 0.0)) throw ReplayError(index_, "negative duration");

  AnnotatedEvent out;
  out.base = event;
  out.process = process_of(event.activity());
  last_step_quiz_.reset();

  if (const MapEditAction* edit = event.edit()) {
    const int before = score_;
    apply_edit(*edit);
    score_ = map_score(map_, *expert_);
    out.effectiveness = score_ > before   ? Effectiveness::Eff
                        : score_ < before ? Effectiveness::Ineff
                                          : Effectiveness::Neutral;
  } else if (const auto* quiz = std::get_if<QuizAction>(&event.detail)) {
    try {
      last_step_quiz_ = bank_.take(map_, quiz->scope);
    } catch (const Error& e) {
      throw ReplayError(index_, std::string("quiz failed: ") + e.what());
    }
    last_quiz_ = last_step_quiz_;
  } else if (event.activity() == Activity::Read) {
    out.long_read = event.duration >= long_threshold_;
  }
  out.map_score_after = score_;
  last_timestamp_ = event.timestamp;
  ++index_;
  return out;
}

double long_read_threshold(const std::vector<ActionEvent>& events, const LongReadPolicy& policy) {
  if (policy.mode == LongReadPolicy::Mode::Absolute) return policy.threshold_seconds;
  std::vector<double> reads;
  for (const auto& e : events) {
    if (e.activity() == Activity::Read) reads.push_back(e.duration);
  }
  if (reads.empty()) return policy.threshold_seconds;
  std::sort(reads.begin(), reads.end());
  // Nearest-rank percentile.
  const double p = std::clamp(policy.percentile, 0.0, 100.0);
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(reads.size())));
  rank = std::clamp<std::size_t>(rank, 1, reads.size());
  return reads[rank - 1];
}

std::vector<AnnotatedEvent> annotate_session(const std::vector<ActionEvent>& events,
                                             const ExpertMap& expert,
                                             const AnnotatorConfig& config) {
  SessionReplay replay(expert, long_read_threshold(events, config.long_read), config.path_cap);
  std::vector<AnnotatedEvent> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(replay.step(e));
  return out;
}

std::vector<AnnotatedEvent> tag_coherence(std::vector<AnnotatedEvent> annotated,
                                          const ExpertMap& expert,
                                          std::optional<double> lookback_seconds) {
  struct ReadPage {
    double timestamp;
    const std::string* page;
  };
  std::vector<ReadPage> reads;
  for (auto& e : annotated) {
    if (const auto* r = std::get_if<ReadAction>(&e.base.detail)) {
      reads.push_back({e.base.timestamp, &r->page});
      continue;
    }
    const MapEditAction* edit = e.base.edit();
    if (!edit || (edit->kind != EditKind::AddLink && edit->kind != EditKind::ModifyLink)) {
      continue;
    }
    const LinkKey key{edit->link.source, edit->link.target};
    bool coherent = false;
    for (auto it = reads.rbegin(); it != reads.rend() && !coherent; ++it) {
      if (lookback_seconds && e.base.timestamp - it->timestamp > *lookback_seconds) break;
      const auto& supported = expert.page_links(*it->page);
      coherent = std::find(supported.begin(), supported.end(), key) != supported.end();
    }
    e.coherent = coherent;
  }
  return annotated;
}

std::vector<CollapsedToken> collapse(const std::vector<AnnotatedEvent>& annotated) {
  std::vector<CollapsedToken> tokens;
  for (const auto& e : annotated) {
    std::string label = event_label(e);
    const double end = e.base.timestamp + e.base.duration;
    if (!tokens.empty() && tokens.back().label == label) {
      tokens.back().count += 1;
      tokens.back().end = end;
    } else {
      tokens.push_back({std::move(label), 1, e.base.timestamp, end});
    }
  }
  for (auto& t : tokens) {
    if (t.count >= 2) t.label += "-Mult";
  }
  return tokens;
}

std::vector<std::string> token_labels(const std::vector<CollapsedToken>& tokens) {
  std::vector<std::string> labels;
  labels.reserve(tokens.size());
  for (const auto& t : tokens) labels.push_back(t.label);
  return labels;
}

ActivityShares time_distribution(const std::vector<AnnotatedEvent>& annotated) {
  ActivityShares shares{};
  double total = 0.0;
  for (const auto& e : annotated) {
    shares[static_cast<std::size_t>(e.activity())] += e.base.duration;
    total += e.base.duration;
  }
  if (!(total > 0.0)) throw EmptySession();
  for (double& s : shares) s /= total;
  return shares;
}

std::optional<double> edit_effectiveness(const std::vector<AnnotatedEvent>& annotated) {
  std::size_t eff = 0, scored = 0;
  for (const auto& e : annotated) {
    if (e.activity() != Activity::MapEdit || e.effectiveness == Effectiveness::Neutral) continue;
    ++scored;
    if (e.effectiveness == Effectiveness::Eff) ++eff;
  }
  if (scored == 0) return std::nullopt;
  return static_cast<double>(eff) / static_cast<double>(scored);
}

std::optional<double> edit_coherence(const std::vector<AnnotatedEvent>& annotated) {
  std::size_t coherent = 0, tagged = 0;
  for (const auto& e : annotated) {
    if (!e.coherent) continue;
    ++tagged;
    if (*e.coherent) ++coherent;
  }
  if (tagged == 0) return std::nullopt;
  return static_cast<double>(coherent) / static_cast<double>(tagged);
}

}  // namespace oele
