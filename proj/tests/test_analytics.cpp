#include <cmath>
#include <random>

#include "doctest.h"
#include "oele/analytics.hpp"
#include "oele/error.hpp"

using namespace oele;
using doctest::Approx;

namespace {

ScaffoldDelivery at(double t, ScaffoldKind k = ScaffoldKind::Hint2AssessByQuiz) {
  ScaffoldDelivery d;
  d.student_id = "S";
  d.kind = k;
  d.timestamp = t;
  return d;
}

AffectObservation obs(double t, double confusion) {
  AffectObservation o;
  o.timestamp = t;
  o.likelihood = {0.5, 0.1, 0.05, confusion, 0.05};
  return o;
}

}  // namespace

TEST_CASE("normalized learning gain") {
  CHECK(nlg(3.59, 7.52, 23) == Approx(0.2025).epsilon(1e-3));
  CHECK(std::fabs(nlg(3.59, 7.52, 23) - 0.2025) < 1e-4);
  CHECK(nlg(5, 5, 23) == 0);
  CHECK(nlg(5, 23, 23) == 1);
  CHECK_THROWS_AS(nlg(23, 23, 23), DegenerateDenominator);
  CHECK_THROWS_AS(nlg(24, 23, 23), DegenerateDenominator);
  CHECK(nlg(4, 10, 23) > nlg(4, 9, 23));
  CHECK(nlg(5, 10, 23) < nlg(4, 10, 23));
  const OutcomeRecord r{"x", 3, 13, 23, 4};
  CHECK(r.gain() == 0.5);
}

TEST_CASE("median split") {
  const auto two = median_split({{"a", 0}, {"b", 10}}, 1);
  CHECK(two.median == 5);
  CHECK(two.high == std::set<std::string>{"b"});
  CHECK(two.low == std::set<std::string>{"a"});
  CHECK(two.excluded.empty());

  const auto flat = median_split({{"a", 3}, {"b", 3}, {"c", 3}});
  CHECK(flat.excluded.size() == 3);

  // Median 6 with a band of 1 drops every score from 5 to 7.
  std::map<std::string, int> scores;
  const int values[] = {1, 3, 4, 5, 6, 6, 7, 8, 9, 12, 2};
  for (int i = 0; i < 11; ++i) scores["s" + std::to_string(i)] = values[i];
  const auto split = median_split(scores);
  CHECK(split.median == 6);
  for (const auto& id : split.excluded) CHECK((scores[id] >= 5 && scores[id] <= 7));
  CHECK(split.excluded.size() == 4);
  for (const auto& id : split.high) CHECK(scores[id] > 7);
  for (const auto& id : split.low) CHECK(scores[id] < 5);
  CHECK(split.high.size() + split.low.size() + split.excluded.size() == scores.size());

  CHECK_THROWS_AS(median_split({{"a", 1}}), std::invalid_argument);

  // Narrowing the band only releases students from the excluded set.
  std::mt19937_64 rng(41);
  for (int round = 0; round < 50; ++round) {
    std::map<std::string, int> s;
    for (int i = 0, n = 2 + static_cast<int>(rng() % 30); i < n; ++i)
      s["p" + std::to_string(i)] = static_cast<int>(rng() % 21) - 5;
    const auto wide = median_split(s, 3), narrow = median_split(s, 1);
    for (const auto& id : wide.high) CHECK(narrow.high.contains(id));
    for (const auto& id : wide.low) CHECK(narrow.low.contains(id));
    for (const auto& id : narrow.excluded) CHECK(wide.excluded.contains(id));
    for (const auto& id : wide.high) CHECK_FALSE(wide.low.contains(id));
  }
}

TEST_CASE("interval segmentation") {
  CHECK(segment_intervals({}, 100).empty());

  const auto one = segment_intervals({at(40)}, 100);
  REQUIRE(one.size() == 2);
  CHECK(one[0].phase == Phase::Before);
  CHECK(one[0].start == 0);
  CHECK(one[0].end == 40);
  CHECK(one[1].phase == Phase::After);
  CHECK(one[1].start == 40);
  CHECK(one[1].end == 100);

  const auto two = segment_intervals({at(30), at(70, ScaffoldKind::Hint5DebugFromMap)}, 100);
  REQUIRE(two.size() == 4);
  CHECK(two[1].kind == ScaffoldKind::Hint2AssessByQuiz);
  CHECK(two[1].start == 30);
  CHECK(two[1].end == 70);
  CHECK(two[2].kind == ScaffoldKind::Hint5DebugFromMap);
  CHECK(two[2].phase == Phase::Before);
  CHECK(two[2].start == 30);
  CHECK(two[2].end == 70);

  const auto repeat = segment_intervals({at(10), at(20), at(30, ScaffoldKind::Enc1Praise), at(40)}, 50);
  CHECK(repeat[0].ordinal == 1);
  CHECK(repeat[2].ordinal == 2);
  CHECK(repeat[4].ordinal == 1);
  CHECK(repeat[6].ordinal == 3);
}

TEST_CASE("before and after spans tile the session") {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 200; ++round) {
    const double end = 100 + static_cast<double>(rng() % 7000);
    std::vector<double> times;
    for (int i = 0, n = static_cast<int>(rng() % 12); i < n; ++i)
      times.push_back(std::floor(std::uniform_real_distribution<double>(0, end)(rng)));
    std::sort(times.begin(), times.end());
    std::vector<ScaffoldDelivery> ds;
    for (double t : times) ds.push_back(at(t, kAllScaffoldKinds[rng() % 9]));
    const auto iv = segment_intervals(ds, end);
    REQUIRE(iv.size() == 2 * ds.size());
    double cursor = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(iv[2 * i].start == cursor);
      CHECK(iv[2 * i].end == ds[i].timestamp);
      CHECK(iv[2 * i + 1].start == ds[i].timestamp);
      CHECK(iv[2 * i + 1].end == (i + 1 < ds.size() ? ds[i + 1].timestamp : end));
      cursor = ds[i].timestamp;
    }
  }
}

TEST_CASE("map score slope") {
  CHECK(map_score_slope({2, 3, 4, 5}) == 1.0);
  CHECK(map_score_slope({4, 4, 4}) == 0.0);
  CHECK(map_score_slope({0, 1, 1, 2}) == Approx(0.6).epsilon(1e-15));
  CHECK_THROWS_AS(map_score_slope({3}), InsufficientEdits);
  CHECK_THROWS_AS(map_score_slope({}), InsufficientEdits);
  CHECK(map_score_slope_wallclock({0, 10, 20}, {1, 2, 3}) == Approx(0.1));

  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> s(2 + rng() % 20);
    for (auto& v : s) v = std::round(u(rng));
    const double base = map_score_slope(s);
    const double shift = u(rng), scale = u(rng);
    auto moved = s, scaled = s;
    for (auto& v : moved) v += shift;
    for (auto& v : scaled) v *= scale;
    CHECK(std::fabs(map_score_slope(moved) - base) < 1e-9);
    CHECK(std::fabs(map_score_slope(scaled) - scale * base) < 1e-9);
  }
}

TEST_CASE("edits inside a span") {
  auto edit = [](double t, int score) {
    AnnotatedEvent e;
    MapEditAction m;
    m.kind = EditKind::AddConcept;
    e.base.timestamp = t;
    e.base.detail = m;
    e.map_score_after = score;
    return e;
  };
  AnnotatedEvent read;
  read.base.timestamp = 15;
  read.base.detail = ReadAction{"p"};
  const std::vector<AnnotatedEvent> ev{edit(0, 0), edit(10, 1), read, edit(20, 2), edit(30, 1)};
  const auto s = edits_in_span(ev, 10, 30);
  CHECK(s.scores == std::vector<double>{1, 2});
  CHECK(s.times == std::vector<double>{10, 20});
}

TEST_CASE("affect aggregation") {
  const std::vector<AffectObservation> o{obs(0, 0.08), obs(20, 0.18), obs(40, 0.5)};
  CHECK(affect_aggregate({o[0]}, 0, 10) == o[0].likelihood);
  const auto two = affect_aggregate(o, 0, 20);
  CHECK(two[3] == Approx(0.13));
  CHECK(two[0] == Approx(0.5));
  CHECK_THROWS_AS(affect_aggregate(o, 50, 60), NoObservationsInSpan);
  CHECK_THROWS_AS(affect_aggregate({}, 0, 100), NoObservationsInSpan);
  CHECK(to_string(Emotion::EngagedConcentration) == "engaged_concentration");
}
