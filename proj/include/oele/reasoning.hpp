#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oele/causal_map.hpp"

namespace oele {

inline constexpr std::size_t kDefaultPathCap = 10'000;

enum class LinkClass { Correct, Incorrect, IncorrectShortcut };
enum class Answer { TargetIncreases, TargetDecreases, CannotDetermine };

std::string_view to_string(LinkClass c);
std::string_view to_string(Answer a);

// Correct links minus every other link in the student map.
int map_score(const CausalMap& student, const ExpertMap& expert);

LinkClass classify_link(const CausalLink& link, const ExpertMap& expert,
                        std::size_t path_cap = kDefaultPathCap);

// Calls visit once per simple directed path source ~> target with the links
// along it. Throws PathLimitExceeded once more than cap paths are found and
// UnknownConcept if either endpoint is absent.
void for_each_simple_path(
    const CausalMap& map, const std::string& source, const std::string& target,
    const std::function<void(const std::vector<const CausalLink*>&)>& visit,
    std::size_t cap = kDefaultPathCap);

struct QueryResult {
  Answer answer = Answer::CannotDetermine;
  // Union of links over all enumerated paths, ordered by endpoints.
  std::vector<CausalLink> used_links;
  int path_sum = 0;
};

// Signed path-count vote: every simple path contributes the sign of the
// product of its link signs; a zero total (or no path) is indeterminate.
QueryResult answer_query(const CausalMap& map, const std::string& source,
                         const std::string& target,
                         std::size_t path_cap = kDefaultPathCap);

struct QuizScope {
  // Empty means the comprehensive quiz over the whole map.
  std::optional<std::string> section;

  static QuizScope everything() { return {}; }
  static QuizScope of_section(std::string id) { return {std::move(id)}; }
  bool operator==(const QuizScope&) const = default;
};

// "everything" or "section:<id>".
std::string to_string(const QuizScope& scope);
QuizScope parse_quiz_scope(std::string_view text);

struct QuizQuestion {
  std::string source;
  std::string target;
  Answer expert_answer = Answer::TargetIncreases;
  // Expert links the expert answer rests on.
  std::vector<CausalLink> expert_links;

  bool operator==(const QuizQuestion&) const = default;
};

enum class Grade { Correct, Incorrect };

struct QuizItem {
  QuizQuestion question;
  Answer betty_answer = Answer::CannotDetermine;
  Grade grade = Grade::Incorrect;
  std::vector<CausalLink> explanation_links;
};

struct QuizResult {
  QuizScope scope;
  std::vector<QuizItem> items;
  double score = 0.0;  // percent

  std::size_t correct_count() const;
  std::size_t incorrect_count() const { return items.size() - correct_count(); }
};

// One question per ordered concept pair with a determinate expert answer.
// Section scope keeps a pair only when every expert link its answer uses lies
// inside the section. Throws EmptyQuiz, or InvalidMap for an unknown section.
std::vector<QuizQuestion> generate_quiz(const ExpertMap& expert, const QuizScope& scope,
                                        std::size_t path_cap = kDefaultPathCap);

// Concepts absent from the student map answer CannotDetermine.
QuizResult grade_quiz(const CausalMap& student, const std::vector<QuizQuestion>& questions,
                      const QuizScope& scope = QuizScope::everything(),
                      std::size_t path_cap = kDefaultPathCap);

// Throws UnknownLink.
CausalMap set_marking(CausalMap map, const std::string& source, const std::string& target,
                      Marking marking);

// Memoizes generated quizzes per scope for one expert map. Not thread-safe;
// keep one per session.
class QuizBank {
 public:
  explicit QuizBank(const ExpertMap& expert, std::size_t path_cap = kDefaultPathCap)
      : expert_(&expert), path_cap_(path_cap) {}

  const std::vector<QuizQuestion>& questions(const QuizScope& scope);
  QuizResult take(const CausalMap& student, const QuizScope& scope);

 private:
  const ExpertMap* expert_;
  std::size_t path_cap_;
  std::map<std::string, std::vector<QuizQuestion>> cache_;
};

}  // namespace oele
