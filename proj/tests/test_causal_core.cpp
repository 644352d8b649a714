#include <random>

#include "doctest.h"
#include "oele/causal_map.hpp"
#include "oele/error.hpp"
#include "oele/reasoning.hpp"
#include "support/testkit.hpp"

using namespace oele;
using testkit::expert_of;
using testkit::link;
using testkit::map_of;

namespace {

// Every simple path leaves from exactly one out-link of its source, so
// negating those links negates every path.
CausalMap flipped(const CausalMap& m, const std::string& source) {
  CausalMap out;
  for (const auto& [id, c] : m.concepts()) out.add_concept(c);
  for (const auto& [k, l] : m.links()) {
    auto f = l;
    if (f.source == source) f.sign = flip(f.sign);
    out.add_link(f);
  }
  return out;
}

Answer flipped(Answer a) {
  if (a == Answer::TargetIncreases) return Answer::TargetDecreases;
  if (a == Answer::TargetDecreases) return Answer::TargetIncreases;
  return a;
}

}  // namespace

TEST_CASE("map score counts correct minus incorrect links") {
  const auto expert = expert_of({link("A", '+', "B"), link("B", '-', "C")});
  CHECK(map_score(CausalMap{}, expert) == 0);
  CHECK(map_score(map_of({link("A", '+', "B"), link("A", '-', "C")}), expert) == 0);
  CHECK(map_score(map_of({link("A", '+', "B"), link("B", '-', "C")}), expert) == 2);
  CHECK(map_score(map_of({link("A", '-', "B")}), expert) == -1);

  const auto& pack = default_expert_map();
  CHECK(pack.map().link_count() == 15);
  CHECK(pack.map().concepts().size() == 12);
  CHECK(map_score(pack.map(), pack) == 15);
}

TEST_CASE("link classification") {
  const auto expert = expert_of({link("A", '+', "B"), link("B", '+', "C")});
  CHECK(classify_link(link("A", '+', "C"), expert) == LinkClass::IncorrectShortcut);
  CHECK(classify_link(link("A", '-', "C"), expert) == LinkClass::Incorrect);
  CHECK(classify_link(link("A", '+', "B"), expert) == LinkClass::Correct);
  CHECK(classify_link(link("A", '-', "B"), expert) == LinkClass::Incorrect);
  CHECK(classify_link(link("C", '+', "A"), expert) == LinkClass::Incorrect);
  CHECK(classify_link(link("A", '+', "Z"), expert) == LinkClass::Incorrect);

  // A direct expert link rules out the shortcut class even when a path agrees.
  const auto both = expert_of({link("A", '-', "C"), link("A", '+', "B"), link("B", '+', "C")});
  CHECK(classify_link(link("A", '+', "C"), both) == LinkClass::Incorrect);
}

TEST_CASE("map score agrees with per-link classification on random maps") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto [student, expert] = testkit::random_map_pair(rng);
    int sum = 0;
    for (const auto& [k, l] : student.links()) {
      sum += classify_link(l, expert) == LinkClass::Correct ? 1 : -1;
      if (expert.map().find_link(l.source, l.target)) {
        CHECK(classify_link(l, expert) != LinkClass::IncorrectShortcut);
      }
    }
    CHECK(map_score(student, expert) == sum);
    CHECK(map_score(student, expert) == testkit::oracle_map_score(student, expert));
  }
}

TEST_CASE("causal queries") {
  SUBCASE("single path") {
    const auto r = answer_query(map_of({link("A", '+', "B"), link("B", '-', "C")}), "A", "C");
    CHECK(r.answer == Answer::TargetDecreases);
    CHECK(r.used_links.size() == 2);
  }
  SUBCASE("conflicting paths cancel") {
    const auto r = answer_query(
        map_of({link("A", '+', "C"), link("A", '+', "B"), link("B", '-', "C")}), "A", "C");
    CHECK(r.answer == Answer::CannotDetermine);
    CHECK(r.path_sum == 0);
    CHECK(r.used_links.size() == 3);
  }
  SUBCASE("no path") {
    const auto r = answer_query(map_of({link("A", '+', "B")}, {"C"}), "A", "C");
    CHECK(r.answer == Answer::CannotDetermine);
    CHECK(r.used_links.empty());
  }
  SUBCASE("cycles are walked once") {
    const auto m = map_of({link("A", '+', "B"), link("B", '+', "A"), link("B", '-', "C")});
    CHECK(answer_query(m, "A", "C").answer == Answer::TargetDecreases);
  }
  CHECK_THROWS_AS(answer_query(map_of({link("A", '+', "B")}), "A", "Q"), UnknownConcept);
}

TEST_CASE("query matches the path oracle and is sign symmetric") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 150; ++i) {
    const auto pair = testkit::random_map_pair(rng);
    const auto& m = pair.student;
    for (const auto& s : m.concept_ids()) {
      for (const auto& t : m.concept_ids()) {
        if (s == t) continue;
        const auto got = answer_query(m, s, t);
        const auto want = testkit::oracle_query(m, s, t);
        REQUIRE(got.answer == want.answer);
        REQUIRE(got.path_sum == want.path_sum);
        REQUIRE(got.used_links.size() == want.used.size());
        for (std::size_t k = 0; k < want.used.size(); ++k) {
          CHECK(got.used_links[k].endpoints() == want.used[k]);
        }
        CHECK(answer_query(flipped(m, s), s, t).answer == flipped(got.answer));
      }
    }
  }
}

TEST_CASE("path enumeration refuses to truncate") {
  std::vector<CausalLink> all;
  for (char a = 'A'; a <= 'I'; ++a)
    for (char b = 'A'; b <= 'I'; ++b)
      if (a != b) all.push_back(link(std::string(1, a), '+', std::string(1, b)));
  const auto dense = map_of(all);
  CHECK_THROWS_AS(answer_query(dense, "A", "B"), PathLimitExceeded);
  CHECK(answer_query(dense, "A", "B", 20000).answer == Answer::TargetIncreases);
}

TEST_CASE("quiz generation") {
  const auto one = expert_of({link("A", '+', "B")});
  const auto q = generate_quiz(one, QuizScope::everything());
  REQUIRE(q.size() == 1);
  CHECK(q[0].source == "A");
  CHECK(q[0].target == "B");
  CHECK(q[0].expert_answer == Answer::TargetIncreases);

  const auto& pack = default_expert_map();
  std::size_t determinate = 0;
  for (const auto& s : pack.map().concept_ids())
    for (const auto& t : pack.map().concept_ids())
      if (s != t && answer_query(pack.map(), s, t).answer != Answer::CannotDetermine)
        ++determinate;
  const auto everything = generate_quiz(pack, QuizScope::everything());
  CHECK(everything.size() == determinate);
  for (std::size_t i = 1; i < everything.size(); ++i) {
    const auto& a = everything[i - 1];
    const auto& b = everything[i];
    CHECK(std::pair(a.source, a.target) < std::pair(b.source, b.target));
  }
  for (const auto& sec : pack.sections()) {
    const auto members = pack.section_concepts(sec);
    try {
      for (const auto& question : generate_quiz(pack, QuizScope::of_section(sec))) {
        for (const auto& l : question.expert_links) {
          CHECK(std::find(members.begin(), members.end(), l.source) != members.end());
          CHECK(std::find(members.begin(), members.end(), l.target) != members.end());
        }
      }
    } catch (const EmptyQuiz&) {
    }
  }

  CausalMap lonely;
  lonely.add_concept({"A", "A", "alone"});
  lonely.add_concept({"B", "B", "rest"});
  lonely.add_concept({"C", "C", "rest"});
  auto l1 = link("B", '+', "C");
  l1.source_page = "p1";
  lonely.add_link(l1);
  const ExpertMap sectioned(lonely, {{"p1", "page"}});
  CHECK_THROWS_AS(generate_quiz(sectioned, QuizScope::of_section("alone")), EmptyQuiz);
  CHECK(generate_quiz(sectioned, QuizScope::of_section("rest")).size() == 1);
  CHECK_THROWS_AS(generate_quiz(sectioned, QuizScope::of_section("nowhere")), InvalidMap);
}

TEST_CASE("quiz grading") {
  const auto& pack = default_expert_map();
  const auto questions = generate_quiz(pack, QuizScope::everything());
  CHECK(grade_quiz(pack.map(), questions).score == doctest::Approx(100.0));

  const auto empty = grade_quiz(CausalMap{}, questions);
  CHECK(empty.score == 0.0);
  for (const auto& item : empty.items) {
    CHECK(item.betty_answer == Answer::CannotDetermine);
    CHECK(item.grade == Grade::Incorrect);
  }
  CHECK_THROWS_AS(grade_quiz(pack.map(), {}), EmptyQuiz);

  // Five unrelated expert links, the student knows one of them.
  const auto five = expert_of({link("A", '+', "B"), link("C", '+', "D"), link("E", '-', "F"),
                               link("G", '+', "H"), link("I", '-', "J")});
  const auto quiz5 = generate_quiz(five, QuizScope::everything());
  REQUIRE(quiz5.size() == 5);
  const auto r = grade_quiz(map_of({link("A", '+', "B")}), quiz5);
  CHECK(r.score == 20.0);
  CHECK(r.correct_count() == 1);
  CHECK(r.items[0].grade == Grade::Correct);
  CHECK(r.items[0].explanation_links.size() == 1);
  for (std::size_t i = 1; i < 5; ++i) CHECK(r.items[i].grade == Grade::Incorrect);
}

TEST_CASE("marking links") {
  const auto m = map_of({link("A", '+', "B"), link("B", '+', "C")});
  const auto marked = set_marking(m, "A", "B", Marking::MarkedCorrect);
  CHECK(marked.find_link("A", "B")->marking == Marking::MarkedCorrect);
  CHECK(marked.find_link("B", "C")->marking == Marking::Unmarked);
  CHECK(set_marking(marked, "A", "B", Marking::Unmarked) == m);
  CHECK_THROWS_AS(set_marking(m, "C", "A", Marking::MarkedCorrect), UnknownLink);
}

TEST_CASE("map invariants are enforced") {
  CausalMap m;
  m.add_concept({"A", "A", "s"});
  CHECK_THROWS_AS(m.add_concept({"A", "again", "s"}), InvalidMap);
  CHECK_THROWS_AS(m.add_link(link("A", '+', "A")), InvalidMap);
  CHECK_THROWS_AS(m.add_link(link("A", '+', "B")), UnknownConcept);
  m.add_concept({"B", "B", "s"});
  m.add_link(link("A", '+', "B"));
  CHECK_THROWS_AS(m.add_link(link("A", '-', "B")), InvalidMap);
  m.remove_concept("B");
  CHECK(m.link_count() == 0);
}

TEST_CASE("map documents round-trip canonically") {
  const std::string text(default_expert_map_text());
  const auto doc = parse_map_document(text);
  const auto canon = format_map_document(doc);
  CHECK(format_map_document(parse_map_document(canon)) == canon);
  const ExpertMap rebuilt(doc.map, doc.pages);
  CHECK(rebuilt.map() == default_expert_map().map());
  CHECK(format_map_document(to_document(default_expert_map())) == canon);

  const std::string bad = "concept A s \"A\"\nconcept B s \"B\"\nlink A * B\n";
  try {
    parse_map_document(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_map_document("link A + B\n"), ParseError);
}
