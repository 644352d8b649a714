#include <cmath>

#include "doctest.h"
#include "oele/annotator.hpp"
#include "oele/error.hpp"
#include "oele/simulator.hpp"

using namespace oele;

TEST_CASE("random source is reproducible") {
  Rng a(99), b(99), c(100);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs |= x != c.uniform();
  }
  CHECK(differs);
  CHECK(mix_seed(7, 1) != mix_seed(7, 2));
  CHECK(mix_seed(7, 1) == mix_seed(7, 1));
  // Pinned stream: the first draws must never change across platforms.
  Rng pinned(42);
  const double first = pinned.uniform();
  Rng again(42);
  CHECK(again.uniform() == first);
  CHECK(Rng(1).index(10) < 10);
}

TEST_CASE("bundled profiles") {
  const auto& p = bundled_profiles();
  for (const auto* prof : {&p.high, &p.low}) {
    double sum = 0;
    for (double m : prof->activity_mix) sum += m;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_NOTHROW(prof->validate());
  }
  CHECK(p.low.read_effectiveness == 0.454);
  CHECK(p.high.read_effectiveness == 0.637);
  CHECK(p.high.coherence == 0.88);
  CHECK(p.low.coherence == 0.748);
  CHECK(p.high.activity_mix[3] + p.high.activity_mix[4] == doctest::Approx(0.2633));
  CHECK(p.low.activity_mix[3] + p.low.activity_mix[4] == doctest::Approx(0.159));

  const auto round = parse_profiles(format_profiles(p));
  CHECK(round.high == p.high);
  CHECK(round.low == p.low);
  const auto patched = parse_profiles(R"({"low": {"read_effectiveness": 0.9}})");
  CHECK(patched.low.read_effectiveness == 0.9);
  CHECK(patched.high == p.high);
  CHECK_THROWS_AS(parse_profiles(R"({"low": {"read_effectiveness": 1.9}})"), InvalidConfig);
  CHECK_THROWS_AS(parse_profiles(R"({"low": {"activity_mix": [0.5, 0, 0, 0, 0]}})"),
                  InvalidConfig);

  StudentProfile bad = p.high;
  bad.durations[0].mean = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("sessions are well formed and reproducible") {
  const auto& expert = default_expert_map();
  const auto a = simulate_session(bundled_profiles().high, expert, "H1", 5);
  const auto b = simulate_session(bundled_profiles().high, expert, "H1", 5);
  CHECK(a.events == b.events);
  CHECK(a.affect == b.affect);
  CHECK(a.deliveries == b.deliveries);
  const auto c = simulate_session(bundled_profiles().high, expert, "H1", 6);
  CHECK(a.events != c.events);

  for (std::size_t i = 1; i < a.events.size(); ++i)
    CHECK(a.events[i].timestamp >= a.events[i - 1].timestamp);
  for (const auto& e : a.events) CHECK(e.duration > 0);

  // The log replays cleanly and ends on the simulator's map.
  SessionReplay replay(expert, 60);
  for (const auto& e : a.events) replay.step(e);
  CHECK(replay.map() == a.final_map);
  CHECK(replay.score() == a.final_map_score);

  // Affect grid: one observation per 20 s window.
  const double end = a.events.back().timestamp + a.events.back().duration;
  CHECK(a.affect.size() == static_cast<std::size_t>(std::ceil(end / kAffectWindowSeconds)));
  for (std::size_t i = 0; i < a.affect.size(); ++i) {
    CHECK(a.affect[i].timestamp == doctest::Approx(20.0 * static_cast<double>(i)));
    for (double v : a.affect[i].likelihood) {
      CHECK(v >= 0);
      CHECK(v <= 1);
    }
  }
}

TEST_CASE("degenerate and extreme profiles") {
  const auto& expert = default_expert_map();
  StudentProfile reader = bundled_profiles().high;
  reader.activity_mix = {1, 0, 0, 0, 0};
  SimulationOptions opt;
  opt.budget_seconds = 1800;
  const auto r = simulate_session(reader, expert, "R", 1, opt);
  REQUIRE_FALSE(r.events.empty());
  for (const auto& e : r.events) CHECK(e.activity() == Activity::Read);

  StudentProfile perfect = bundled_profiles().high;
  perfect.read_effectiveness = 1.0;
  perfect.mark_propensity = 0.0;
  opt.budget_seconds = 7200;
  opt.engine.reset();
  const auto p = simulate_session(perfect, expert, "P", 2, opt);
  CHECK(p.final_map_score == 15);
  for (const auto& e : annotate_session(p.events, expert))
    CHECK(e.effectiveness != Effectiveness::Ineff);
}

TEST_CASE("cohorts") {
  const auto& expert = default_expert_map();
  SimulationOptions opt;
  opt.budget_seconds = 1200;
  const auto a = simulate_cohort(1, 1, 9, expert, bundled_profiles(), opt);
  const auto b = simulate_cohort(1, 1, 9, expert, bundled_profiles(), opt);
  REQUIRE(a.logs.size() == 2);
  CHECK(a.logs[0].student_id == "H001");
  CHECK(a.logs[1].student_id == "L001");
  CHECK(a.groups.at("H001") == "High");
  CHECK(a.groups.at("L001") == "Low");
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.logs[i].events == b.logs[i].events);
    CHECK(a.outcomes[i] == b.outcomes[i]);
    CHECK(a.outcomes[i].pre < a.outcomes[i].max);
    CHECK(a.outcomes[i].post >= 0);
    CHECK(a.outcomes[i].post <= a.outcomes[i].max);
  }
  const auto c = simulate_cohort(1, 1, 10, expert, bundled_profiles(), opt);
  CHECK(c.logs[0].events != a.logs[0].events);

  const auto big = simulate_cohort(3, 2, 9, expert, bundled_profiles(), opt);
  CHECK(big.logs.size() == 5);
  CHECK(big.groups.size() == 5);
  // A student's log does not depend on the cohort size.
  CHECK(big.logs[0].events == a.logs[0].events);
}
