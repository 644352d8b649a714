#include "oele/reasoning.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "oele/error.hpp"

namespace oele {

std::string_view to_string(LinkClass c) {
  switch (c) {
    case LinkClass::Correct: return "Correct";
    case LinkClass::Incorrect: return "Incorrect";
    case LinkClass::IncorrectShortcut: return "IncorrectShortcut";
  }
  return "Incorrect";
}

std::string_view to_string(Answer a) {
  switch (a) {
    case Answer::TargetIncreases: return "TargetIncreases";
    case Answer::TargetDecreases: return "TargetDecreases";
    case Answer::CannotDetermine: return "CannotDetermine";
  }
  return "CannotDetermine";
}

std::string to_string(const QuizScope& scope) {
  return scope.section ? "section:" + *scope.section : std::string("everything");
}

QuizScope parse_quiz_scope(std::string_view text) {
  if (text == "everything") return QuizScope::everything();
  if (text.starts_with("section:") && text.size() > 8) {
    return QuizScope::of_section(std::string(text.substr(8)));
  }
  throw Error("invalid quiz scope '" + std::string(text) + "'");
}

int map_score(const CausalMap& student, const ExpertMap& expert) {
  int score = 0;
  for (const auto& [key, link] : student.links()) {
    const CausalLink* e = expert.map().find_link(key.first, key.second);
    score += (e != nullptr && e->sign == link.sign) ? 1 : -1;
  }
  return score;
}

namespace {

// Integer-indexed adjacency built once per map so repeated queries avoid
// string lookups.
class PathGraph {
 public:
  explicit PathGraph(const CausalMap& map) {
    for (const auto& [id, c] : map.concepts()) {
      index_.emplace(id, static_cast<int>(ids_.size()));
      ids_.push_back(id);
    }
    out_.resize(ids_.size());
    in_.resize(ids_.size());
    for (const auto& [key, link] : map.links()) {
      int s = index_.at(key.first);
      int t = index_.at(key.second);
      out_[s].push_back({t, &link});
      in_[t].push_back(s);
    }
  }

  bool contains(const std::string& id) const { return index_.contains(id); }

  template <typename Visit>
  void enumerate(const std::string& source, const std::string& target, std::size_t cap,
                 Visit&& visit) const {
    auto si = index_.find(source);
    if (si == index_.end()) throw UnknownConcept(source);
    auto ti = index_.find(target);
    if (ti == index_.end()) throw UnknownConcept(target);
    const int s = si->second;
    const int t = ti->second;
    if (s == t) return;

    // Only descend into nodes that can still reach the target.
    std::vector<char> reaches(ids_.size(), 0);
    std::vector<int> stack{t};
    reaches[t] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : in_[v]) {
        if (!reaches[u]) {
          reaches[u] = 1;
          stack.push_back(u);
        }
      }
    }
    if (!reaches[s]) return;

    std::vector<char> on_path(ids_.size(), 0);
    std::vector<const CausalLink*> path;
    std::size_t found = 0;
    on_path[s] = 1;
    dfs(s, t, reaches, on_path, path, found, cap, visit);
  }

 private:
  template <typename Visit>
  void dfs(int v, int t, const std::vector<char>& reaches, std::vector<char>& on_path,
           std::vector<const CausalLink*>& path, std::size_t& found, std::size_t cap,
           Visit& visit) const {
    for (const auto& [u, link] : out_[v]) {
      if (on_path[u] || !reaches[u]) continue;
      path.push_back(link);
      if (u == t) {
        if (++found > cap) throw PathLimitExceeded(cap);
        visit(static_cast<const std::vector<const CausalLink*>&>(path));
      } else {
        on_path[u] = 1;
        dfs(u, t, reaches, on_path, path, found, cap, visit);
        on_path[u] = 0;
      }
      path.pop_back();
    }
  }

  std::vector<std::string> ids_;
  std::map<std::string, int> index_;
  std::vector<std::vector<std::pair<int, const CausalLink*>>> out_;
  std::vector<std::vector<int>> in_;
};

Sign path_sign(const std::vector<const CausalLink*>& path) {
  Sign s = Sign::Increase;
  for (const auto* l : path) s = s * l->sign;
  return s;
}

QueryResult query(const PathGraph& graph, const std::string& source, const std::string& target,
                  std::size_t cap) {
  QueryResult r;
  std::map<LinkKey, const CausalLink*> used;
  graph.enumerate(source, target, cap, [&](const std::vector<const CausalLink*>& path) {
    r.path_sum += path_sign(path) == Sign::Increase ? 1 : -1;
    for (const auto* l : path) used.emplace(LinkKey{l->source, l->target}, l);
  });
  r.answer = r.path_sum > 0   ? Answer::TargetIncreases
             : r.path_sum < 0 ? Answer::TargetDecreases
                              : Answer::CannotDetermine;
  r.used_links.reserve(used.size());
  for (const auto& [k, l] : used) r.used_links.push_back(*l);
  return r;
}

}  // namespace

void for_each_simple_path(
    const CausalMap& map, const std::string& source, const std::string& target,
    const std::function<void(const std::vector<const CausalLink*>&)>& visit, std::size_t cap) {
  PathGraph graph(map);
  graph.enumerate(source, target, cap, visit);
}

QueryResult answer_query(const CausalMap& map, const std::string& source,
                         const std::string& target, std::size_t path_cap) {
  return query(PathGraph(map), source, target, path_cap);
}

LinkClass classify_link(const CausalLink& link, const ExpertMap& expert, std::size_t path_cap) {
  const CausalMap& em = expert.map();
  if (const CausalLink* direct = em.find_link(link.source, link.target)) {
    return direct->sign == link.sign ? LinkClass::Correct : LinkClass::Incorrect;
  }
  if (!em.has_concept(link.source) || !em.has_concept(link.target) ||
      link.source == link.target) {
    return LinkClass::Incorrect;
  }
  bool shortcut = false;
  for_each_simple_path(
      em, link.source, link.target,
      [&](const std::vector<const CausalLink*>& path) {
        if (path_sign(path) == link.sign) shortcut = true;
      },
      path_cap);
  return shortcut ? LinkClass::IncorrectShortcut : LinkClass::Incorrect;
}

std::vector<QuizQuestion> generate_quiz(const ExpertMap& expert, const QuizScope& scope,
                                        std::size_t path_cap) {
  std::set<std::string> allowed;
  if (scope.section) {
    auto ids = expert.section_concepts(*scope.section);
    if (ids.empty()) throw InvalidMap("unknown section '" + *scope.section + "'");
    allowed.insert(ids.begin(), ids.end());
  }
  auto in_scope = [&](const std::string& id) { return !scope.section || allowed.contains(id); };

  PathGraph graph(expert.map());
  std::vector<QuizQuestion> questions;
  const auto ids = expert.map().concept_ids();
  for (const auto& s : ids) {
    if (!in_scope(s)) continue;
    for (const auto& t : ids) {
      if (s == t || !in_scope(t)) continue;
      QueryResult r = query(graph, s, t, path_cap);
      if (r.answer == Answer::CannotDetermine) continue;
      bool inside = std::all_of(r.used_links.begin(), r.used_links.end(), [&](const auto& l) {
        return in_scope(l.source) && in_scope(l.target);
      });
      if (!inside) continue;
      questions.push_back({s, t, r.answer, std::move(r.used_links)});
    }
  }
  if (questions.empty()) throw EmptyQuiz();
  return questions;
}

std::size_t QuizResult::correct_count() const {
  return static_cast<std::size_t>(std::count_if(
      items.begin(), items.end(), [](const QuizItem& i) { return i.grade == Grade::Correct; }));
}

QuizResult grade_quiz(const CausalMap& student, const std::vector<QuizQuestion>& questions,
                      const QuizScope& scope, std::size_t path_cap) {
  if (questions.empty()) throw EmptyQuiz();
  PathGraph graph(student);
  QuizResult result;
  result.scope = scope;
  result.items.reserve(questions.size());
  std::size_t correct = 0;
  for (const auto& q : questions) {
    QuizItem item;
    item.question = q;
    if (graph.contains(q.source) && graph.contains(q.target)) {
      QueryResult r = query(graph, q.source, q.target, path_cap);
      item.betty_answer = r.answer;
      item.explanation_links = std::move(r.used_links);
    }
    item.grade = item.betty_answer == q.expert_answer ? Grade::Correct : Grade::Incorrect;
    if (item.grade == Grade::Correct) ++correct;
    result.items.push_back(std::move(item));
  }
  result.score = 100.0 * static_cast<double>(correct) / static_cast<double>(questions.size());
  return result;
}

CausalMap set_marking(CausalMap map, const std::string& source, const std::string& target,
                      Marking marking) {
  const CausalLink* existing = map.find_link(source, target);
  if (!existing) throw UnknownLink(source, target);
  CausalLink updated = *existing;
  updated.marking = marking;
  map.replace_link(updated);
  return map;
}

const std::vector<QuizQuestion>& QuizBank::questions(const QuizScope& scope) {
  auto key = to_string(scope);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(std::move(key), generate_quiz(*expert_, scope, path_cap_)).first;
  }
  return it->second;
}

QuizResult QuizBank::take(const CausalMap& student, const QuizScope& scope) {
  return grade_quiz(student, questions(scope), scope, path_cap_);
}

}  // namespace oele
