#include "oele/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "json.hpp"
#include "oele/annotator.hpp"
#include "oele/error.hpp"
#include "oele/reasoning.hpp"

namespace oele {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double s = *spare_;
    spare_.reset();
    return s;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

double Rng::lognormal(double mean, double spread) {
  const double mu = std::log(mean) - 0.5 * spread * spread;
  return std::exp(mu + spread * normal());
}

std::size_t Rng::index(std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void StudentProfile::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfig(std::string(what) + " must be in [0, 1]");
  };
  double sum = 0.0;
  for (double m : activity_mix) {
    prob(m, "activity_mix entry");
    sum += m;
  }
  if (std::fabs(sum - 1.0) > 1e-6) throw InvalidConfig("activity_mix must sum to 1");
  prob(read_effectiveness, "read_effectiveness");
  prob(coherence, "coherence");
  prob(quiz_propensity, "quiz_propensity");
  prob(mark_propensity, "mark_propensity");
  for (double c : compliance) prob(c, "compliance");
  for (double a : affect_baseline) prob(a, "affect_baseline");
  for (const auto& d : durations) {
    if (!(d.mean > 0.0) || !(d.spread >= 0.0)) {
      throw InvalidConfig("durations must have positive mean and non-negative spread");
    }
  }
  if (!(max_score > 0.0)) throw InvalidConfig("max_score must be positive");
}

const BundledProfiles& bundled_profiles() {
  static const BundledProfiles profiles = [] {
    BundledProfiles p;
    // Time shares: read / notes / edits / quiz / explanations, in percent of
    // total time, from the High and Low rows of the classroom study.
    p.high.name = "High";
    p.high.activity_mix = {0.262, 0.005, 0.47, 0.2313, 0.032};
    p.high.read_effectiveness = 0.637;
    p.high.coherence = 0.88;
    p.high.quiz_propensity = 0.5;
    p.high.mark_propensity = 0.3;
    p.high.pre_mean = 4.19;
    p.high.pre_sd = 2.06;
    p.high.nlg_mean = 0.33;
    p.high.nlg_sd = 0.17;

    p.low.name = "Low";
    p.low.activity_mix = {0.373, 0.007, 0.461, 0.141, 0.018};
    p.low.read_effectiveness = 0.454;
    p.low.coherence = 0.748;
    p.low.quiz_propensity = 0.2;
    p.low.mark_propensity = 0.15;
    p.low.compliance = {0.4, 0.4, 0.3, 0.3, 0.4, 0.5, 0.2, 0.3, 0.2};
    p.low.pre_mean = 3.32;
    p.low.pre_sd = 1.65;
    p.low.nlg_mean = 0.10;
    p.low.nlg_sd = 0.12;
    // The mix above sums to 0.9993; fold the rounding into map edits.
    p.high.activity_mix[2] += 1.0 - std::accumulate(p.high.activity_mix.begin(),
                                                    p.high.activity_mix.end(), 0.0);
    p.low.activity_mix[2] += 1.0 - std::accumulate(p.low.activity_mix.begin(),
                                                   p.low.activity_mix.end(), 0.0);
    return p;
  }();
  return profiles;
}

// ---------------------------------------------------------------------------
// Profile documents

namespace {

using Json = nlohmann::ordered_json;

template <std::size_t N>
void read_array(const Json& j, const char* key, std::array<double, N>& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != N) throw InvalidConfig(std::string(key) + " needs " + std::to_string(N) + " values");
  std::copy(v.begin(), v.end(), out.begin());
}

void read_number(const Json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}

StudentProfile profile_from(const Json& j, StudentProfile p) {
  static const std::set<std::string> known = {
      "name", "activity_mix", "read_effectiveness", "coherence", "quiz_propensity",
      "mark_propensity", "compliance", "durations", "affect_baseline", "affect_noise",
      "confusion_bump", "max_score", "pre_mean", "pre_sd", "nlg_mean", "nlg_sd"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw InvalidConfig("unknown profile field '" + key + "'");
  }
  if (j.contains("name")) p.name = j.at("name").get<std::string>();
  read_array(j, "activity_mix", p.activity_mix);
  read_array(j, "compliance", p.compliance);
  read_array(j, "affect_baseline", p.affect_baseline);
  read_number(j, "read_effectiveness", p.read_effectiveness);
  read_number(j, "coherence", p.coherence);
  read_number(j, "quiz_propensity", p.quiz_propensity);
  read_number(j, "mark_propensity", p.mark_propensity);
  read_number(j, "affect_noise", p.affect_noise);
  read_number(j, "confusion_bump", p.confusion_bump);
  read_number(j, "max_score", p.max_score);
  read_number(j, "pre_mean", p.pre_mean);
  read_number(j, "pre_sd", p.pre_sd);
  read_number(j, "nlg_mean", p.nlg_mean);
  read_number(j, "nlg_sd", p.nlg_sd);
  if (j.contains("durations")) {
    const auto& d = j.at("durations");
    if (!d.is_array() || d.size() != 5) throw InvalidConfig("durations needs 5 entries");
    for (std::size_t k = 0; k < 5; ++k) {
      p.durations[k] = {d[k].at("mean").get<double>(), d[k].at("spread").get<double>()};
    }
  }
  p.validate();
  return p;
}

Json profile_json(const StudentProfile& p) {
  Json j;
  j["name"] = p.name;
  j["activity_mix"] = p.activity_mix;
  j["read_effectiveness"] = p.read_effectiveness;
  j["coherence"] = p.coherence;
  j["quiz_propensity"] = p.quiz_propensity;
  j["mark_propensity"] = p.mark_propensity;
  j["compliance"] = p.compliance;
  Json d = Json::array();
  for (const auto& x : p.durations) d.push_back({{"mean", x.mean}, {"spread", x.spread}});
  j["durations"] = d;
  j["affect_baseline"] = p.affect_baseline;
  j["affect_noise"] = p.affect_noise;
  j["confusion_bump"] = p.confusion_bump;
  j["max_score"] = p.max_score;
  j["pre_mean"] = p.pre_mean;
  j["pre_sd"] = p.pre_sd;
  j["nlg_mean"] = p.nlg_mean;
  j["nlg_sd"] = p.nlg_sd;
  return j;
}

}  // namespace

BundledProfiles parse_profiles(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw InvalidConfig(e.what());
  }
  BundledProfiles out = bundled_profiles();
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "high") {
        out.high = profile_from(value, out.high);
      } else if (key == "low") {
        out.low = profile_from(value, out.low);
      } else {
        throw InvalidConfig("unknown profile '" + key + "' (expected high, low)");
      }
    }
  } catch (const Json::exception& e) {
    throw InvalidConfig(e.what());
  }
  return out;
}

std::string format_profiles(const BundledProfiles& profiles) {
  Json j;
  j["high"] = profile_json(profiles.high);
  j["low"] = profile_json(profiles.low);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Session generator

namespace {

CausalLink plain_link(const std::string& s, const std::string& t, Sign sign) {
  CausalLink l;
  l.source = s;
  l.target = t;
  l.sign = sign;
  return l;
}

struct Intent {
  enum class Type { Quiz, ReadPage, FixLink, AddLink, MarkCorrect, MarkWrong };
  Type type;
  std::optional<CausalLink> link;
  std::optional<std::string> page;
};

class SessionSim {
 public:
  SessionSim(const StudentProfile& profile, const ExpertMap& expert, std::string student_id,
             std::uint64_t seed, const SimulationOptions& options)
      : profile_(profile),
        expert_(expert),
        options_(options),
        student_id_(std::move(student_id)),
        rng_(seed),
        replay_(expert, options.engine ? options.engine->long_threshold_seconds : 60.0) {
    if (options_.engine) engine_.emplace(expert, *options_.engine, student_id_);
    for (const auto& s : expert.sections()) {
      try {
        replay_.quiz_bank().questions(QuizScope::of_section(s));
        quiz_sections_.push_back(s);
      } catch (const Error&) {
      }
    }
  }

  SessionLog run();

 private:
  double now() const { return static_cast<double>(t_cs_) / 100.0; }
  std::int64_t draw_duration(Activity a, double scale = 1.0);
  void emit(ActionDetail detail, std::int64_t dur_cs);
  void comply(const ScaffoldDelivery& d);
  Activity choose_activity();
  void step();

  void do_read(std::optional<std::string> page);
  void do_quiz();
  void do_edit(std::optional<Intent> intent);
  bool scored_edit(bool effective, const std::optional<CausalLink>& target);
  bool effective_edit(const std::optional<CausalLink>& target);
  bool ineffective_edit();
  bool marking_edit(Marking to, const std::optional<CausalLink>& target);
  void neutral_edit();
  void add_link(const CausalLink& link);
  void modify(const CausalLink& old_link, CausalLink new_link);
  void remove(const CausalLink& link);

  bool correct_on_map(const CausalLink& l) const {
    const CausalLink* e = expert_.map().find_link(l.source, l.target);
    return e && e->sign == l.sign;
  }
  std::vector<CausalLink> missing_links() const;
  std::vector<CausalLink> incorrect_links() const;
  std::vector<CausalLink> correct_links() const;

  const StudentProfile& profile_;
  const ExpertMap& expert_;
  const SimulationOptions& options_;
  std::string student_id_;
  Rng rng_;
  SessionReplay replay_;
  std::optional<ScaffoldEngine> engine_;
  std::vector<std::string> quiz_sections_;

  std::int64_t t_cs_ = 0;
  std::array<std::int64_t, 5> time_by_{};
  std::vector<ActionEvent> events_;
  std::vector<ScaffoldDelivery> deliveries_;
  std::deque<Intent> intents_;
  std::optional<Activity> last_activity_;
  std::optional<std::string> last_page_;
  std::optional<CausalLink> planned_link_;
  bool quiz_taken_ = false;
};

std::int64_t SessionSim::draw_duration(Activity a, double scale) {
  const auto& d = profile_.durations[static_cast<std::size_t>(a)];
  const double seconds = rng_.lognormal(d.mean, d.spread) * scale;
  return std::max<std::int64_t>(100, std::llround(seconds * 100.0));
}

void SessionSim::emit(ActionDetail detail, std::int64_t dur_cs) {
  ActionEvent ev{student_id_, now(), static_cast<double>(dur_cs) / 100.0, std::move(detail)};
  const AnnotatedEvent ann = replay_.step(ev);
  const Activity a = ev.activity();
  time_by_[static_cast<std::size_t>(a)] += dur_cs;
  t_cs_ += dur_cs;
  last_activity_ = a;
  events_.push_back(std::move(ev));
  if (!engine_) return;
  const auto& quiz = replay_.quiz_from_last_step();
  for (auto& d : engine_->observe(ann, replay_.map(), quiz ? &*quiz : nullptr)) {
    comply(d);
    deliveries_.push_back(std::move(d));
  }
}

void SessionSim::comply(const ScaffoldDelivery& d) {
  if (!rng_.chance(profile_.compliance[index_of(d.kind)])) return;
  using T = Intent::Type;
  auto allowed = [&](Activity a) { return profile_.activity_mix[static_cast<std::size_t>(a)] > 0.0; };
  switch (d.kind) {
    case ScaffoldKind::Hint1MarkCorrect:
    case ScaffoldKind::Enc1Praise:
      if (allowed(Activity::MapEdit)) intents_.push_back({T::MarkCorrect, d.targets.link, {}});
      break;
    case ScaffoldKind::Hint2AssessByQuiz:
    case ScaffoldKind::Enc2PraiseAndQuiz:
      if (allowed(Activity::TakeQuiz)) intents_.push_back({T::Quiz, {}, {}});
      break;
    case ScaffoldKind::Hint3MarkWrong:
      if (allowed(Activity::MapEdit)) intents_.push_back({T::MarkWrong, d.targets.link, {}});
      break;
    case ScaffoldKind::Hint4ShortcutLink:
    case ScaffoldKind::Hint5DebugFromMap:
      if (allowed(Activity::MapEdit)) intents_.push_back({T::FixLink, d.targets.link, {}});
      break;
    case ScaffoldKind::Hint6DebugFromRead:
      if (allowed(Activity::Read)) intents_.push_back({T::ReadPage, {}, d.targets.page});
      if (allowed(Activity::MapEdit)) intents_.push_back({T::AddLink, d.targets.link, {}});
      break;
    case ScaffoldKind::Enc3Reassure:
      if (allowed(Activity::Read)) intents_.push_back({T::ReadPage, {}, {}});
      break;
  }
}

Activity SessionSim::choose_activity() {
  std::array<double, 5> w{};
  const double elapsed = static_cast<double>(t_cs_);
  for (std::size_t k = 0; k < 5; ++k) {
    const double mix = profile_.activity_mix[k];
    if (mix <= 0.0) continue;
    w[k] = mix / profile_.durations[k].mean;
    // Steer towards the target mix once enough time has passed.
    if (elapsed >= 60'000.0) {
      const double share = static_cast<double>(time_by_[k]) / elapsed;
      w[k] *= std::clamp(std::exp(40.0 * (mix - share)), 0.1, 10.0);
    }
  }
  if (!quiz_taken_) w[static_cast<std::size_t>(Activity::QuizExpl)] = 0.0;
  if (last_activity_ == Activity::MapEdit) {
    w[static_cast<std::size_t>(Activity::TakeQuiz)] *= 1.0 + 4.0 * profile_.quiz_propensity;
  } else if (last_activity_ == Activity::TakeQuiz) {
    w[static_cast<std::size_t>(Activity::Read)] *= 3.0;
    w[static_cast<std::size_t>(Activity::QuizExpl)] *= 2.0;
  } else if (last_activity_ == Activity::Read) {
    w[static_cast<std::size_t>(Activity::MapEdit)] *= 1.5;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0.0) {
    // Only explanations are allowed and no quiz exists yet; fall back to the
    // largest share that is possible.
    return Activity::Read;
  }
  double r = rng_.uniform() * total;
  for (std::size_t k = 0; k < 5; ++k) {
    if (w[k] <= 0.0) continue;
    if (r < w[k]) return static_cast<Activity>(k);
    r -= w[k];
  }
  for (std::size_t k = 5; k-- > 0;) {
    if (w[k] > 0.0) return static_cast<Activity>(k);
  }
  return Activity::Read;
}

std::vector<CausalLink> SessionSim::missing_links() const {
  std::vector<CausalLink> out;
  for (const auto& [key, l] : expert_.map().links()) {
    if (!replay_.map().find_link(key.first, key.second)) out.push_back(l);
  }
  return out;
}

std::vector<CausalLink> SessionSim::incorrect_links() const {
  std::vector<CausalLink> out;
  for (const auto& [key, l] : replay_.map().links()) {
    if (!correct_on_map(l)) out.push_back(l);
  }
  return out;
}

std::vector<CausalLink> SessionSim::correct_links() const {
  std::vector<CausalLink> out;
  for (const auto& [key, l] : replay_.map().links()) {
    if (correct_on_map(l)) out.push_back(l);
  }
  return out;
}

void SessionSim::do_read(std::optional<std::string> page) {
  if (!page) {
    const auto missing = missing_links();
    if (!missing.empty() && rng_.chance(profile_.coherence)) {
      // Read the page behind the link about to be taught.
      const CausalLink& l = missing[rng_.index(missing.size())];
      page = l.source_page;
      planned_link_ = l;
    } else {
      auto it = expert_.pages().begin();
      std::advance(it, static_cast<long>(rng_.index(expert_.pages().size())));
      page = it->first;
    }
  }
  last_page_ = page;
  emit(ReadAction{*page}, draw_duration(Activity::Read));
}

void SessionSim::do_quiz() {
  QuizScope scope;
  if (!quiz_sections_.empty() && rng_.chance(0.2)) {
    scope = QuizScope::of_section(quiz_sections_[rng_.index(quiz_sections_.size())]);
  }
  emit(QuizAction{scope}, draw_duration(Activity::TakeQuiz));
  quiz_taken_ = true;
}

void SessionSim::add_link(const CausalLink& link) {
  for (const auto& id : {link.source, link.target}) {
    if (replay_.map().has_concept(id)) continue;
    MapEditAction add;
    add.kind = EditKind::AddConcept;
    add.concept_value = expert_.map().concepts().at(id);
    emit(std::move(add), draw_duration(Activity::MapEdit, 0.5));
  }
  MapEditAction e;
  e.kind = EditKind::AddLink;
  e.link = {link.source, link.target, link.sign, Marking::Unmarked, std::nullopt};
  emit(std::move(e), draw_duration(Activity::MapEdit));
}

void SessionSim::modify(const CausalLink& old_link, CausalLink new_link) {
  MapEditAction e;
  e.kind = EditKind::ModifyLink;
  e.old_link = old_link;
  new_link.source_page.reset();
  e.link = std::move(new_link);
  emit(std::move(e), draw_duration(Activity::MapEdit));
}

void SessionSim::remove(const CausalLink& link) {
  MapEditAction e;
  e.kind = EditKind::DeleteLink;
  e.link = link;
  emit(std::move(e), draw_duration(Activity::MapEdit));
}

bool SessionSim::effective_edit(const std::optional<CausalLink>& target) {
  auto fix = [&](const CausalLink& bad) {
    const CausalLink* e = expert_.map().find_link(bad.source, bad.target);
    if (e) {
      CausalLink fixed = bad;
      fixed.sign = e->sign;
      fixed.marking = Marking::Unmarked;
      modify(bad, fixed);
    } else {
      remove(bad);
    }
  };
  if (target) {
    const CausalLink* on_map = replay_.map().find_link(target->source, target->target);
    if (on_map && !correct_on_map(*on_map)) {
      fix(*on_map);
      return true;
    }
    if (!on_map && correct_on_map(*target)) {
      add_link(*target);
      return true;
    }
  }
  if (planned_link_) {
    const CausalLink l = *planned_link_;
    planned_link_.reset();
    if (!replay_.map().find_link(l.source, l.target)) {
      add_link(l);
      return true;
    }
  }
  const auto missing = missing_links();
  const auto incorrect = incorrect_links();
  if (missing.empty() && incorrect.empty()) return false;
  const double p_add = static_cast<double>(missing.size()) /
                       static_cast<double>(missing.size() + incorrect.size());
  if (rng_.chance(p_add)) {
    // Prefer a link the last read page supports.
    std::vector<CausalLink> on_page;
    for (const auto& l : missing) {
      if (last_page_ && l.source_page == last_page_) on_page.push_back(l);
    }
    const auto& pool = on_page.empty() ? missing : on_page;
    add_link(pool[rng_.index(pool.size())]);
  } else {
    // Links already flagged as possibly wrong get fixed first.
    std::vector<CausalLink> flagged;
    for (const auto& l : incorrect) {
      if (l.marking == Marking::MarkedCouldBeWrong) flagged.push_back(l);
    }
    const auto& pool = flagged.empty() ? incorrect : flagged;
    fix(pool[rng_.index(pool.size())]);
  }
  return true;
}

bool SessionSim::ineffective_edit() {
  const auto& concepts = expert_.map().concepts();
  std::vector<std::string> ids;
  for (const auto& [id, c] : concepts) ids.push_back(id);
  const CausalMap& map = replay_.map();
  const std::size_t n_incorrect = incorrect_links().size();

  auto wrong_sign = [&]() -> std::optional<CausalLink> {
    std::vector<CausalLink> pool;
    for (const auto& l : missing_links()) pool.push_back(plain_link(l.source, l.target, flip(l.sign)));
    if (pool.empty()) return std::nullopt;
    return pool[rng_.index(pool.size())];
  };
  auto wrong_endpoint = [&]() -> std::optional<CausalLink> {
    // Near the last page read: start from a concept it mentions.
    std::vector<std::string> near;
    if (last_page_) {
      for (const auto& key : expert_.page_links(*last_page_)) {
        near.push_back(key.first);
        near.push_back(key.second);
      }
    }
    for (int attempt = 0; attempt < 30; ++attempt) {
      const std::string& s = near.empty() ? ids[rng_.index(ids.size())] : near[rng_.index(near.size())];
      const std::string& t = ids[rng_.index(ids.size())];
      if (s == t || expert_.map().find_link(s, t) || map.find_link(s, t)) continue;
      return plain_link(s, t, rng_.chance(0.5) ? Sign::Increase : Sign::Decrease);
    }
    return std::nullopt;
  };
  auto shortcut = [&]() -> std::optional<CausalLink> {
    std::vector<CausalLink> pool;
    for (const auto& [k1, first] : expert_.map().links()) {
      for (const auto& [k2, second] : expert_.map().links()) {
        if (first.target != second.source || first.source == second.target) continue;
        if (expert_.map().find_link(first.source, second.target)) continue;
        if (map.find_link(first.source, second.target)) continue;
        pool.push_back(plain_link(first.source, second.target, first.sign * second.sign));
      }
    }
    if (pool.empty()) return std::nullopt;
    return pool[rng_.index(pool.size())];
  };

  auto try_add = [&](std::size_t cap) {
    if (n_incorrect >= cap) return false;
    std::optional<CausalLink> l;
    if (rng_.chance(0.7)) {
      l = rng_.chance(0.5) ? wrong_sign() : wrong_endpoint();
      if (!l) l = wrong_endpoint();
      if (!l) l = shortcut();
    } else {
      l = shortcut();
      if (!l) l = wrong_endpoint();
    }
    if (!l) return false;
    add_link(*l);
    return true;
  };

  if (try_add(options_.max_incorrect_links)) return true;
  const auto correct = correct_links();
  if (!correct.empty()) {
    const CausalLink& c = correct[rng_.index(correct.size())];
    if (rng_.chance(0.5)) {
      CausalLink flipped = c;
      flipped.sign = flip(c.sign);
      flipped.marking = Marking::Unmarked;
      modify(c, flipped);
    } else {
      remove(c);
    }
    return true;
  }
  return try_add(2 * options_.max_incorrect_links);
}

bool SessionSim::marking_edit(Marking to, const std::optional<CausalLink>& target) {
  const CausalMap& map = replay_.map();
  std::optional<CausalLink> pick;
  if (target) {
    const CausalLink* l = map.find_link(target->source, target->target);
    if (l && l->marking != to) pick = *l;
  }
  if (!pick && replay_.last_quiz()) {
    for (const auto& item : replay_.last_quiz()->items) {
      const bool wanted = to == Marking::MarkedCorrect ? item.grade == Grade::Correct
                                                       : item.grade != Grade::Correct;
      if (!wanted) continue;
      for (const auto& el : item.explanation_links) {
        const CausalLink* l = map.find_link(el.source, el.target);
        if (l && l->marking != to) {
          pick = *l;
          break;
        }
      }
      if (pick) break;
    }
  }
  if (!pick) return false;
  CausalLink marked = *pick;
  marked.marking = to;
  MapEditAction e;
  e.kind = EditKind::ModifyLink;
  e.old_link = *pick;
  e.link = marked;
  emit(std::move(e), draw_duration(Activity::MapEdit, 0.5));
  return true;
}

bool SessionSim::scored_edit(bool effective, const std::optional<CausalLink>& target) {
  return effective ? effective_edit(target) : ineffective_edit();
}

void SessionSim::do_edit(std::optional<Intent> intent) {
  using T = Intent::Type;
  if (intent && intent->type == T::MarkCorrect && marking_edit(Marking::MarkedCorrect, intent->link)) return;
  if (intent && intent->type == T::MarkWrong && marking_edit(Marking::MarkedCouldBeWrong, intent->link)) return;
  if (!intent && last_activity_ == Activity::TakeQuiz && rng_.chance(profile_.mark_propensity)) {
    const Marking to = rng_.chance(0.75) ? Marking::MarkedCorrect : Marking::MarkedCouldBeWrong;
    if (marking_edit(to, std::nullopt)) return;
  }
  std::optional<CausalLink> target;
  if (intent && (intent->type == T::FixLink || intent->type == T::AddLink)) target = intent->link;
  // Score-changing edits only happen while something is left to improve, so
  // the share of effective ones stays at read_effectiveness.
  if (!missing_links().empty() || !incorrect_links().empty()) {
    if (scored_edit(rng_.chance(profile_.read_effectiveness), target)) return;
  }
  neutral_edit();
}

void SessionSim::neutral_edit() {
  if (marking_edit(Marking::MarkedCorrect, std::nullopt)) return;
  for (const auto& l : correct_links()) {
    if (l.marking == Marking::MarkedCorrect) continue;
    CausalLink marked = l;
    marked.marking = Marking::MarkedCorrect;
    MapEditAction e;
    e.kind = EditKind::ModifyLink;
    e.old_link = l;
    e.link = marked;
    emit(std::move(e), draw_duration(Activity::MapEdit, 0.5));
    return;
  }
  // Try out a concept the book does not connect, then take it off again.
  MapEditAction e;
  e.concept_value = {"clothing", "Clothing", "warming"};
  e.kind = replay_.map().has_concept("clothing") ? EditKind::DeleteConcept : EditKind::AddConcept;
  emit(std::move(e), draw_duration(Activity::MapEdit, 0.5));
}

void SessionSim::step() {
  if (!intents_.empty()) {
    Intent in = std::move(intents_.front());
    intents_.pop_front();
    switch (in.type) {
      case Intent::Type::Quiz: do_quiz(); return;
      case Intent::Type::ReadPage: do_read(in.page); return;
      default: do_edit(std::move(in)); return;
    }
  }
  switch (choose_activity()) {
    case Activity::Read: do_read(std::nullopt); break;
    case Activity::MakeNotes:
      emit(NotesAction{"note-" + std::to_string(events_.size())}, draw_duration(Activity::MakeNotes));
      break;
    case Activity::MapEdit: do_edit(std::nullopt); break;
    case Activity::TakeQuiz: do_quiz(); break;
    case Activity::QuizExpl: {
      const std::size_t n = replay_.last_quiz() ? replay_.last_quiz()->items.size() : 1;
      emit(ExplAction{static_cast<int>(rng_.index(std::max<std::size_t>(n, 1)))},
           draw_duration(Activity::QuizExpl));
      break;
    }
  }
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

SessionLog SessionSim::run() {
  const auto budget_cs = std::llround(options_.budget_seconds * 100.0);
  while (t_cs_ < budget_cs) step();
  if (engine_) {
    for (auto& d : engine_->finish(session_end_time(events_))) deliveries_.push_back(std::move(d));
  }

  SessionLog log;
  log.student_id = student_id_;
  log.final_map = replay_.map();
  log.final_map_score = replay_.score();
  log.deliveries = deliveries_;

  // Affect on a fixed grid; confusion rises after a map-debug hint is
  // immediately followed by a read-debug hint, until the next delivery.
  const double end = session_end_time(events_);
  const auto n_obs = static_cast<std::size_t>(std::ceil(end / kAffectWindowSeconds));
  std::vector<std::pair<double, double>> bumped;
  for (std::size_t i = 1; i < deliveries_.size(); ++i) {
    if (deliveries_[i].kind == ScaffoldKind::Hint6DebugFromRead &&
        deliveries_[i - 1].kind == ScaffoldKind::Hint5DebugFromMap) {
      const double to = i + 1 < deliveries_.size() ? deliveries_[i + 1].timestamp : end;
      bumped.emplace_back(deliveries_[i].timestamp, to);
    }
  }
  log.affect.reserve(n_obs);
  for (std::size_t k = 0; k < n_obs; ++k) {
    AffectObservation o;
    o.timestamp = static_cast<double>(k) * kAffectWindowSeconds;
    const bool bump = std::any_of(bumped.begin(), bumped.end(), [&](const auto& span) {
      return o.timestamp >= span.first && o.timestamp < span.second;
    });
    for (std::size_t e = 0; e < 5; ++e) {
      double v = profile_.affect_baseline[e] + profile_.affect_noise * rng_.normal();
      if (bump && e == static_cast<std::size_t>(Emotion::Confusion)) v += profile_.confusion_bump;
      o.likelihood[e] = round4(std::clamp(v, 0.0, 1.0));
    }
    log.affect.push_back(o);
  }
  log.events = std::move(events_);
  return log;
}

}  // namespace

SessionLog simulate_session(const StudentProfile& profile, const ExpertMap& expert,
                            const std::string& student_id, std::uint64_t seed,
                            const SimulationOptions& options) {
  profile.validate();
  if (!(options.budget_seconds > 0.0)) throw InvalidConfig("budget must be positive");
  if (options.engine) options.engine->validate();
  SessionSim sim(profile, expert, student_id, seed, options);
  return sim.run();
}

Cohort simulate_cohort(std::size_t n_high, std::size_t n_low, std::uint64_t seed,
                       const ExpertMap& expert, const BundledProfiles& profiles,
                       const SimulationOptions& options) {
  if (n_high == 0 || n_low == 0) throw InvalidConfig("cohort groups must be nonempty");
  Cohort cohort;
  auto add = [&](const StudentProfile& p, const std::string& prefix, std::size_t n,
                 std::uint64_t stream_base) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = fmt::format("{}{:03}", prefix, i + 1);
      const std::uint64_t s = mix_seed(seed, stream_base + i);
      SessionLog log = simulate_session(p, expert, id, s, options);

      Rng draw(mix_seed(s, 0x7e57));
      OutcomeRecord o;
      o.student_id = id;
      o.max = p.max_score;
      o.pre = std::clamp(std::round(p.pre_mean + p.pre_sd * draw.normal()), 0.0, p.max_score - 1.0);
      const double gain = p.nlg_mean + p.nlg_sd * draw.normal();
      o.post = std::clamp(std::round(o.pre + gain * (p.max_score - o.pre)), 0.0, p.max_score);
      o.final_map_score = log.final_map_score;

      cohort.groups[id] = p.name;
      cohort.outcomes.push_back(o);
      cohort.logs.push_back(std::move(log));
    }
  };
  add(profiles.high, "H", n_high, 0);
  add(profiles.low, "L", n_low, 1'000'000);
  return cohort;
}

}  // namespace oele
