#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oele/engine.hpp"
#include "oele/error.hpp"
#include "oele/simulator.hpp"
#include "support/testkit.hpp"

using namespace oele;
using namespace testkit;

namespace {

std::vector<ActionEvent> concepts_then(std::vector<ActionEvent> rest) {
  std::vector<ActionEvent> out;
  double t = 0;
  for (const char* id : {"A", "B", "C", "D"}) out.push_back(add_concept(t++, id));
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

EngineRun run(const std::vector<ActionEvent>& ev, const EngineConfig& c = {}) {
  return run_engine(ev, script_expert(), c, "S1");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render_all(const TreeLibrary& lib) {
  const TemplateVars vars{{"student", "Sam"},
                          {"concept", "heat loss"},
                          {"link", "'sweating' increases 'heat loss'"},
                          {"page", "Sweat glands"}};
  std::string out;
  for (const auto& [kind, tree] : lib.trees()) {
    out += "# " + std::string(to_string(kind)) + "\n";
    for (const auto& step : run_conversation(tree, first_option_responder, vars)) {
      out += step.node + " | " + step.prompt + " | " + step.reply + "\n";
    }
  }
  return out;
}

}  // namespace

TEST_CASE("each scripted session fires its own scaffold only") {
  std::set<ScaffoldKind> covered;
  for (const auto& s : trigger_scripts()) {
    CAPTURE(s.name);
    const auto r = run(s.events, s.config);
    REQUIRE(r.deliveries.size() == 1);
    CHECK(r.deliveries[0].kind == s.expected);
    CHECK(verify_deliveries(s.events, r.deliveries, script_expert(), s.config).empty());
    covered.insert(s.expected);
  }
  CHECK(covered.size() == 9);
}

TEST_CASE("minimum gap between scaffolds") {
  const auto s = window_script();
  const auto r = run(s.events, s.config);
  REQUIRE(r.deliveries.size() == 1);
  CHECK(r.deliveries[0].kind == ScaffoldKind::Hint2AssessByQuiz);
  REQUIRE(r.detections.size() == 2);
  CHECK(r.detections[1].kind == ScaffoldKind::Hint5DebugFromMap);
  CHECK(r.detections[1].outcome == DetectionOutcome::Suppressed);

  EngineConfig wide = s.config;
  wide.min_inter_scaffold_seconds = 4;
  CHECK(run(s.events, wide).deliveries.size() == 2);
}

TEST_CASE("debugging hint may chain straight into a reading hint") {
  // Bad edit -> quiz gives Hint5; the long read right after the quiz gives
  // Hint6 although it falls inside the minimum gap.
  const auto ev = concepts_then(
      {add_link(10, link("B", '-', "C")), quiz(20), read(40, 90, "p_B_C")});
  const auto r = run(ev);
  REQUIRE(r.deliveries.size() == 2);
  CHECK(r.deliveries[0].kind == ScaffoldKind::Hint5DebugFromMap);
  CHECK(r.deliveries[1].kind == ScaffoldKind::Hint6DebugFromRead);
  CHECK(r.deliveries[1].timestamp - r.deliveries[0].timestamp < 60);
  CHECK(verify_deliveries(ev, r.deliveries, script_expert(), {}).empty());
}

TEST_CASE("mark-correct follow-up window") {
  const auto good = link("A", '+', "B");
  SUBCASE("expires by time and fires at expiry") {
    const auto r = run(concepts_then({add_link(10, good), quiz(20), notes(300)}));
    REQUIRE(r.deliveries.size() == 1);
    CHECK(r.deliveries[0].kind == ScaffoldKind::Hint1MarkCorrect);
    CHECK(r.deliveries[0].timestamp == doctest::Approx(140.0));
    CHECK(r.deliveries[0].trigger.prev == 4);
    CHECK(r.deliveries[0].trigger.cur == 5);
    CHECK(r.deliveries[0].targets.link->endpoints() == good.endpoints());
  }
  SUBCASE("expires after five events") {
    const auto r = run(concepts_then(
        {add_link(10, good), quiz(20), notes(30), notes(31), notes(32), notes(33), notes(34)}));
    REQUIRE(r.deliveries.size() == 1);
    CHECK(r.deliveries[0].timestamp == 34);
    CHECK(r.deliveries[0].trigger.resolved == 10u);
  }
  SUBCASE("cancelled by marking a link correct") {
    const auto r = run(concepts_then(
        {add_link(10, good), quiz(20),
         modify_link(30, good, link("A", '+', "B", Marking::MarkedCorrect)), notes(300)}));
    CHECK(r.deliveries.empty());
    REQUIRE(r.detections.size() == 1);
    CHECK(r.detections[0].outcome == DetectionOutcome::Cancelled);
  }
  SUBCASE("closed at session end") {
    const auto ev = concepts_then({add_link(10, good), quiz(20, 20), notes(50, 10)});
    const auto r = run(ev);
    CHECK(r.deliveries.empty());
    CHECK(r.session_end == 60);
    REQUIRE(r.detections.size() == 1);
    CHECK(r.detections[0].outcome == DetectionOutcome::SessionEnded);
  }
}

TEST_CASE("shortcut hint only for shortcut edits") {
  const auto r = run(concepts_then({add_link(10, link("A", '-', "C")), quiz(20)}));
  REQUIRE(r.deliveries.size() == 1);
  CHECK(r.deliveries[0].kind == ScaffoldKind::Hint5DebugFromMap);
  const auto s = run(concepts_then({add_link(10, link("A", '+', "C")), quiz(20)}));
  CHECK(s.deliveries[0].kind == ScaffoldKind::Hint4ShortcutLink);
  CHECK(s.deliveries[0].targets.link->endpoints() == std::pair<std::string, std::string>("A", "C"));
}

TEST_CASE("reassurance alternates with debugging hints") {
  std::vector<ActionEvent> ev;
  double t = 10;
  for (int i = 0; i < 6; ++i) {
    ev.push_back(add_link(t, link("B", '-', "C")));
    ev.push_back(quiz(t + 10));
    ev.push_back(delete_link(t + 40, link("B", '-', "C")));
    t += 100;
  }
  const auto r = run(concepts_then(ev));
  std::vector<ScaffoldKind> kinds;
  for (const auto& d : r.deliveries) kinds.push_back(d.kind);
  using K = ScaffoldKind;
  CHECK(kinds == std::vector<K>{K::Hint5DebugFromMap, K::Hint5DebugFromMap, K::Enc3Reassure,
                                K::Hint5DebugFromMap, K::Hint5DebugFromMap, K::Enc3Reassure});
}

TEST_CASE("debugging hint targets") {
  // Two wrong links touching concepts of wrongly answered questions; the
  // hint must not name the same one twice in a row.
  std::vector<ActionEvent> ev{add_link(10, link("A", '-', "B")), add_link(15, link("C", '+', "D")),
                              quiz(20)};
  ev.push_back(notes(100));
  ev.push_back(add_link(110, link("B", '-', "D")));
  ev.push_back(quiz(120));
  const auto r = run(concepts_then(ev));
  REQUIRE(r.deliveries.size() == 2);
  for (const auto& d : r.deliveries) {
    REQUIRE(d.targets.link.has_value());
    CHECK(classify_link(*d.targets.link, script_expert()) != LinkClass::Correct);
  }
  CHECK(r.deliveries[0].targets.link->endpoints() != r.deliveries[1].targets.link->endpoints());
}

TEST_CASE("reading hint names the page of a missing link") {
  const auto r = run(concepts_then({quiz(10), read(40, 90, "p_C_D")}));
  REQUIRE(r.deliveries.size() == 1);
  const auto& t = r.deliveries[0].targets;
  REQUIRE(t.page.has_value());
  CHECK(script_expert().pages().contains(*t.page));
  // After a perfect quiz the long read is not a debugging moment.
  const auto& expert = script_expert();
  std::vector<ActionEvent> full;
  double at = 10;
  for (const auto& [k, l] : expert.map().links()) {
    auto plain = l;
    plain.source_page.reset();
    full.push_back(add_link(at, plain));
    at += 10;
  }
  full.push_back(notes(at));
  full.push_back(quiz(at + 10));
  full.push_back(read(at + 40, 90, "p_C_D"));
  for (const auto& d : run(concepts_then(full)).deliveries)
    CHECK(d.kind != ScaffoldKind::Hint6DebugFromRead);
}

TEST_CASE("agents are fixed per kind") {
  using K = ScaffoldKind;
  for (K k : {K::Hint2AssessByQuiz, K::Enc1Praise, K::Enc3Reassure}) CHECK(agent_of(k) == Agent::Betty);
  for (K k : {K::Hint1MarkCorrect, K::Hint3MarkWrong, K::Hint4ShortcutLink, K::Hint5DebugFromMap,
              K::Hint6DebugFromRead, K::Enc2PraiseAndQuiz})
    CHECK(agent_of(k) == Agent::MrDavis);
}

TEST_CASE("engine on simulated sessions") {
  const auto& expert = default_expert_map();
  SimulationOptions opt;
  opt.engine.reset();
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto& profile = seed % 2 ? bundled_profiles().high : bundled_profiles().low;
    const auto log = simulate_session(profile, expert, "X", seed, opt);
    const EngineConfig config;
    const auto a = run_engine(log.events, expert, config, "X");
    const auto b = run_engine(log.events, expert, config, "X");
    CHECK(a.deliveries == b.deliveries);
    CHECK(verify_deliveries(log.events, a.deliveries, expert, config).empty());
    for (std::size_t i = 1; i < a.deliveries.size(); ++i) {
      const auto& p = a.deliveries[i - 1];
      const auto& d = a.deliveries[i];
      const bool chained = p.kind == ScaffoldKind::Hint5DebugFromMap &&
                           d.kind == ScaffoldKind::Hint6DebugFromRead;
      if (!chained) CHECK(d.timestamp - p.timestamp >= config.min_inter_scaffold_seconds);
      CHECK(d.timestamp >= p.timestamp);
    }
    for (const auto& d : a.deliveries) {
      REQUIRE_FALSE(d.transcript.empty());
      if (d.kind == ScaffoldKind::Hint4ShortcutLink) {
        CHECK(classify_link(*d.targets.link, expert) == LinkClass::IncorrectShortcut);
      }
    }

    // Switching one kind off removes it and leaves every other detection.
    for (ScaffoldKind off : {ScaffoldKind::Hint5DebugFromMap, ScaffoldKind::Hint2AssessByQuiz}) {
      EngineConfig c = config;
      c.enabled[index_of(off)] = false;
      const auto r = run_engine(log.events, expert, c, "X");
      for (const auto& d : r.deliveries) CHECK(d.kind != off);
      auto key = [](const Detection& d) { return std::tuple(d.kind, d.prev, d.cur); };
      std::vector<std::tuple<ScaffoldKind, std::size_t, std::size_t>> x, y;
      for (const auto& d : a.detections) x.push_back(key(d));
      for (const auto& d : r.detections) y.push_back(key(d));
      CHECK(x == y);
    }
  }
}

TEST_CASE("engine rejects bad input") {
  ScaffoldEngine engine(script_expert(), EngineConfig{}, "S1");
  AnnotatedEvent a;
  a.base = notes(10);
  engine.observe(a, CausalMap{}, nullptr);
  a.base = notes(5);
  CHECK_THROWS_AS(engine.observe(a, CausalMap{}, nullptr), OutOfOrderEvent);

  EngineConfig c;
  c.min_inter_scaffold_seconds = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = EngineConfig{};
  c.hint1_window_events = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = EngineConfig{};
  c.enc3_period = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
}

TEST_CASE("conversation walks") {
  ConversationTree single(ScaffoldKind::Enc3Reassure, "n0",
                          {{"n0", "Hello {student}", {{"Bye", std::nullopt}}}});
  const auto t = run_conversation(single, exit_responder, {{"student", "Ana"}});
  REQUIRE(t.size() == 1);
  CHECK(t[0].prompt == "Hello Ana");

  const auto& hint5 = bundled_trees().tree(ScaffoldKind::Hint5DebugFromMap);
  const TemplateVars vars{{"concept", "shivering"}, {"link", "'shivering' increases 'heat'"}};
  const auto deep = run_conversation(hint5, first_option_responder, vars);
  REQUIRE(deep.size() == 3);
  CHECK(deep[1].prompt.find("shivering") != std::string::npos);
  CHECK(deep[2].prompt.find("'shivering' increases 'heat'") != std::string::npos);
  std::set<std::string> seen;
  for (const auto& step : deep) CHECK(seen.insert(step.node).second);
  CHECK(run_conversation(hint5, exit_responder, vars).size() == 1);

  auto bad = [](std::size_t, std::size_t) { return std::size_t{7}; };
  CHECK_THROWS_AS(run_conversation(hint5, [&](const ConversationNode& n, std::size_t d) {
                    return bad(n.responses.size(), d);
                  }),
                  MalformedTree);
}

TEST_CASE("malformed trees") {
  using K = ScaffoldKind;
  // Unreachable node.
  CHECK_THROWS_AS(ConversationTree(K::Enc1Praise, "n0",
                                   {{"n0", "a", {{"x", std::nullopt}}},
                                    {"n1", "b", {{"x", std::nullopt}}}}),
                  MalformedTree);
  // Node without an exit.
  CHECK_THROWS_AS(ConversationTree(K::Enc1Praise, "n0",
                                   {{"n0", "a", {{"x", "n1"}}}, {"n1", "b", {{"x", std::nullopt}}}}),
                  MalformedTree);
  // Dangling reference.
  CHECK_THROWS_AS(ConversationTree(K::Enc1Praise, "n0", {{"n0", "a", {{"x", "zz"}, {"q", std::nullopt}}}}),
                  MalformedTree);
  CHECK_THROWS_AS(ConversationTree(K::Enc1Praise, "n9", {{"n0", "a", {{"x", std::nullopt}}}}),
                  MalformedTree);
}

TEST_CASE("bundled trees") {
  const auto& lib = bundled_trees();
  for (ScaffoldKind k : kAllScaffoldKinds) CHECK(lib.contains(k));
  const auto again = parse_trees(format_trees(lib));
  CHECK(format_trees(again) == format_trees(lib));
  CHECK(render_all(lib) == render_all(again));
  CHECK(render_all(lib) == read_text(OELE_TEST_DATA "/golden/transcripts.txt"));
  CHECK(lib.tree(ScaffoldKind::Hint2AssessByQuiz).node("n0").prompt.find(
            "Do you think I am ready for a quiz now?") != std::string::npos);
}

TEST_CASE("delivery counts") {
  const std::map<std::string, std::string> groups{{"a", "G"}, {"b", "G"}, {"c", "G"}};
  auto none = delivery_counts({}, groups);
  for (ScaffoldKind k : kAllScaffoldKinds) {
    const auto& c = none["G"][k];
    CHECK(c.students == 3);
    CHECK(c.receivers == 0);
    CHECK(c.histogram[0] == 3);
    CHECK(c.histogram[1] + c.histogram[2] + c.histogram[3] + c.histogram[4] == 0);
  }

  std::vector<ScaffoldDelivery> ds;
  auto add = [&](const std::string& who, ScaffoldKind k, int n) {
    for (int i = 0; i < n; ++i) {
      ScaffoldDelivery d;
      d.student_id = who;
      d.kind = k;
      ds.push_back(d);
    }
  };
  add("a", ScaffoldKind::Hint2AssessByQuiz, 3);
  const auto one = delivery_counts(ds, {{"a", "G"}});
  const auto& h2 = one.at("G").at(ScaffoldKind::Hint2AssessByQuiz);
  CHECK(h2.min == 3);
  CHECK(h2.max == 3);
  CHECK(h2.mean == 3);
  CHECK(h2.histogram[3] == 1);

  add("b", ScaffoldKind::Hint2AssessByQuiz, 5);
  add("zz", ScaffoldKind::Hint2AssessByQuiz, 9);
  const auto& g = delivery_counts(ds, groups).at("G").at(ScaffoldKind::Hint2AssessByQuiz);
  CHECK(g.receivers == 2);
  CHECK(g.min == 0);
  CHECK(g.max == 5);
  CHECK(g.mean == 4);
  CHECK(g.sd == doctest::Approx(std::sqrt(2.0)));
  CHECK(g.histogram == std::array<std::size_t, 5>{1, 0, 0, 1, 1});
}
