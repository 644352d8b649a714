#include "oele/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oele/error.hpp"

namespace oele {

using Json = nlohmann::ordered_json;

namespace {

template <typename F>
auto parse_lines(std::string_view text, F&& per_line) {
  using T = decltype(per_line(std::declval<const Json&>()));
  std::vector<T> out;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(per_line(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

template <typename T, typename F>
std::string format_lines(const std::vector<T>& items, F&& to_json) {
  std::string out;
  for (const auto& item : items) {
    out += to_json(item).dump();
    out += '\n';
  }
  return out;
}

Json link_json(const CausalLink& l) {
  Json j;
  j["source"] = l.source;
  j["target"] = l.target;
  j["sign"] = to_string(l.sign);
  j["marking"] = to_string(l.marking);
  if (l.source_page) j["page"] = *l.source_page;
  return j;
}

CausalLink link_from(const Json& j) {
  CausalLink l;
  l.source = j.at("source").get<std::string>();
  l.target = j.at("target").get<std::string>();
  l.sign = parse_sign(j.at("sign").get<std::string>());
  if (j.contains("marking")) l.marking = parse_marking(j.at("marking").get<std::string>());
  if (j.contains("page")) l.source_page = j.at("page").get<std::string>();
  return l;
}

Json event_json(const ActionEvent& e) {
  Json j;
  j["student_id"] = e.student_id;
  j["t"] = e.timestamp;
  j["dur"] = e.duration;
  j["activity"] = to_string(e.activity());
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, ReadAction>) {
          j["page"] = d.page;
        } else if constexpr (std::is_same_v<D, NotesAction>) {
          j["note"] = d.note;
        } else if constexpr (std::is_same_v<D, MapEditAction>) {
          j["edit"] = to_string(d.kind);
          switch (d.kind) {
            case EditKind::AddConcept:
              j["concept"] = {{"id", d.concept_value.id},
                              {"name", d.concept_value.name},
                              {"section", d.concept_value.section}};
              break;
            case EditKind::DeleteConcept:
              j["concept"] = {{"id", d.concept_value.id}};
              break;
            case EditKind::ModifyLink:
              j["old_link"] = link_json(d.old_link);
              j["link"] = link_json(d.link);
              break;
            default:
              j["link"] = link_json(d.link);
          }
        } else if constexpr (std::is_same_v<D, QuizAction>) {
          j["scope"] = to_string(d.scope);
        } else {
          j["question"] = d.question;
        }
      },
      e.detail);
  return j;
}

ActionEvent event_from(const Json& j) {
  ActionEvent e;
  e.student_id = j.at("student_id").get<std::string>();
  e.timestamp = j.at("t").get<double>();
  e.duration = j.at("dur").get<double>();
  if (e.duration < 0.0) throw Error("negative duration");
  switch (parse_activity(j.at("activity").get<std::string>())) {
    case Activity::Read:
      e.detail = ReadAction{j.at("page").get<std::string>()};
      break;
    case Activity::MakeNotes:
      e.detail = NotesAction{j.value("note", std::string())};
      break;
    case Activity::MapEdit: {
      MapEditAction m;
      m.kind = parse_edit_kind(j.at("edit").get<std::string>());
      switch (m.kind) {
        case EditKind::AddConcept: {
          const auto& c = j.at("concept");
          m.concept_value = {c.at("id").get<std::string>(), c.value("name", std::string()),
                             c.value("section", std::string())};
          break;
        }
        case EditKind::DeleteConcept:
          m.concept_value.id = j.at("concept").at("id").get<std::string>();
          break;
        case EditKind::ModifyLink:
          m.old_link = link_from(j.at("old_link"));
          m.link = link_from(j.at("link"));
          break;
        default:
          m.link = link_from(j.at("link"));
      }
      e.detail = std::move(m);
      break;
    }
    case Activity::TakeQuiz:
      e.detail = QuizAction{parse_quiz_scope(j.value("scope", std::string("everything")))};
      break;
    case Activity::QuizExpl:
      e.detail = ExplAction{j.value("question", 0)};
      break;
  }
  return e;
}

Effectiveness effectiveness_from(const std::string& s) { return parse_effectiveness(s); }

Process process_from(const std::string& s) {
  if (s == "IA") return Process::IA;
  if (s == "SC") return Process::SC;
  if (s == "SA") return Process::SA;
  throw Error("unknown process '" + s + "'");
}

}  // namespace

std::string format_events(const std::vector<ActionEvent>& events) {
  return format_lines(events, event_json);
}

std::vector<ActionEvent> parse_events(std::string_view text) {
  return parse_lines(text, event_from);
}

std::string format_annotated(const std::vector<AnnotatedEvent>& events) {
  return format_lines(events, [](const AnnotatedEvent& a) {
    Json j = event_json(a.base);
    j["label"] = event_label(a);
    j["process"] = to_string(a.process);
    j["effectiveness"] = to_string(a.effectiveness);
    j["long_read"] = a.long_read;
    if (a.coherent) j["coherent"] = *a.coherent;
    j["map_score"] = a.map_score_after;
    return j;
  });
}

std::vector<AnnotatedEvent> parse_annotated(std::string_view text) {
  return parse_lines(text, [](const Json& j) {
    AnnotatedEvent a;
    a.base = event_from(j);
    a.process = process_from(j.at("process").get<std::string>());
    a.effectiveness = effectiveness_from(j.at("effectiveness").get<std::string>());
    a.long_read = j.value("long_read", false);
    if (j.contains("coherent")) a.coherent = j.at("coherent").get<bool>();
    a.map_score_after = j.at("map_score").get<int>();
    return a;
  });
}

std::string format_deliveries(const std::vector<ScaffoldDelivery>& deliveries) {
  return format_lines(deliveries, [](const ScaffoldDelivery& d) {
    Json j;
    j["student_id"] = d.student_id;
    j["kind"] = to_string(d.kind);
    j["agent"] = to_string(d.agent());
    j["t"] = d.timestamp;
    Json trig;
    trig["prev"] = d.trigger.prev;
    trig["cur"] = d.trigger.cur;
    trig["prev_label"] = d.trigger.prev_label;
    trig["cur_label"] = d.trigger.cur_label;
    if (d.trigger.resolved) trig["resolved"] = *d.trigger.resolved;
    j["trigger"] = trig;
    Json targets = Json::object();
    if (d.targets.link) targets["link"] = link_json(*d.targets.link);
    if (d.targets.concept_id) targets["concept"] = *d.targets.concept_id;
    if (d.targets.page) targets["page"] = *d.targets.page;
    j["targets"] = targets;
    Json steps = Json::array();
    for (const auto& s : d.transcript) {
      steps.push_back(
          {{"node", s.node}, {"response", s.response}, {"prompt", s.prompt}, {"reply", s.reply}});
    }
    j["transcript"] = steps;
    return j;
  });
}

std::vector<ScaffoldDelivery> parse_deliveries(std::string_view text) {
  return parse_lines(text, [](const Json& j) {
    ScaffoldDelivery d;
    d.student_id = j.at("student_id").get<std::string>();
    d.kind = parse_scaffold_kind(j.at("kind").get<std::string>());
    d.timestamp = j.at("t").get<double>();
    const auto& trig = j.at("trigger");
    d.trigger.prev = trig.at("prev").get<std::size_t>();
    d.trigger.cur = trig.at("cur").get<std::size_t>();
    d.trigger.prev_label = trig.value("prev_label", std::string());
    d.trigger.cur_label = trig.value("cur_label", std::string());
    if (trig.contains("resolved")) d.trigger.resolved = trig.at("resolved").get<std::size_t>();
    if (j.contains("targets")) {
      const auto& t = j.at("targets");
      if (t.contains("link")) d.targets.link = link_from(t.at("link"));
      if (t.contains("concept")) d.targets.concept_id = t.at("concept").get<std::string>();
      if (t.contains("page")) d.targets.page = t.at("page").get<std::string>();
    }
    if (j.contains("transcript")) {
      for (const auto& s : j.at("transcript")) {
        d.transcript.push_back({s.at("node").get<std::string>(),
                                s.at("response").get<std::size_t>(),
                                s.at("prompt").get<std::string>(), s.at("reply").get<std::string>()});
      }
    }
    return d;
  });
}

std::string format_affect(const std::string& student_id,
                          const std::vector<AffectObservation>& observations) {
  return format_lines(observations, [&](const AffectObservation& o) {
    Json j;
    j["student_id"] = student_id;
    j["t"] = o.timestamp;
    for (Emotion e : kAllEmotions) j[std::string(to_string(e))] = o.likelihood[static_cast<int>(e)];
    return j;
  });
}

std::vector<AffectObservation> parse_affect(std::string_view text) {
  return parse_lines(text, [](const Json& j) {
    AffectObservation o;
    o.timestamp = j.at("t").get<double>();
    for (Emotion e : kAllEmotions) {
      const double v = j.at(std::string(to_string(e))).get<double>();
      if (v < 0.0 || v > 1.0) throw Error("likelihood outside [0, 1]");
      o.likelihood[static_cast<int>(e)] = v;
    }
    return o;
  });
}

std::string format_outcomes(const std::vector<OutcomeRecord>& outcomes) {
  return format_lines(outcomes, [](const OutcomeRecord& o) {
    Json j;
    j["student_id"] = o.student_id;
    j["pre"] = o.pre;
    j["post"] = o.post;
    j["max"] = o.max;
    j["final_map_score"] = o.final_map_score;
    return j;
  });
}

std::vector<OutcomeRecord> parse_outcomes(std::string_view text) {
  return parse_lines(text, [](const Json& j) {
    OutcomeRecord o;
    o.student_id = j.at("student_id").get<std::string>();
    o.pre = j.at("pre").get<double>();
    o.post = j.at("post").get<double>();
    o.max = j.value("max", 23.0);
    o.final_map_score = j.value("final_map_score", 0);
    return o;
  });
}

std::string format_groups(const std::map<std::string, std::string>& groups) {
  std::string out = "student_id\tgroup\n";
  for (const auto& [s, g] : groups) out += s + "\t" + g + "\n";
  return out;
}

std::map<std::string, std::string> parse_groups(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError(line_no, "expected student_id<TAB>group");
    }
    std::string id = line.substr(0, tab), group = line.substr(tab + 1);
    if (line_no == 1 && id == "student_id") continue;
    if (!out.emplace(id, group).second) throw ParseError(line_no, "duplicate student " + id);
  }
  return out;
}

EngineConfig parse_engine_config(std::string_view json_text, EngineConfig base) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw InvalidConfig(e.what());
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "min_inter_scaffold_seconds") {
        base.min_inter_scaffold_seconds = value.get<double>();
      } else if (key == "hint1_window_events") {
        base.hint1_window_events = value.get<std::size_t>();
      } else if (key == "hint1_window_seconds") {
        base.hint1_window_seconds = value.get<double>();
      } else if (key == "long_threshold_seconds") {
        base.long_threshold_seconds = value.get<double>();
      } else if (key == "enc3_period") {
        base.enc3_period = value.get<unsigned>();
      } else if (key == "disabled") {
        base.enabled.fill(true);
        for (const auto& k : value) base.enabled[index_of(parse_scaffold_kind(k.get<std::string>()))] = false;
      } else {
        throw InvalidConfig("unknown engine config key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw InvalidConfig(e.what());
  }
  base.validate();
  return base;
}

std::string format_engine_config(const EngineConfig& config) {
  Json j;
  j["min_inter_scaffold_seconds"] = config.min_inter_scaffold_seconds;
  j["hint1_window_events"] = config.hint1_window_events;
  j["hint1_window_seconds"] = config.hint1_window_seconds;
  j["long_threshold_seconds"] = config.long_threshold_seconds;
  j["enc3_period"] = config.enc3_period;
  Json disabled = Json::array();
  for (ScaffoldKind k : kAllScaffoldKinds) {
    if (!config.is_enabled(k)) disabled.push_back(to_string(k));
  }
  j["disabled"] = disabled;
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path);
}

}  // namespace oele
