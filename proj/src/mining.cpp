#include "oele/mining.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"
#include "oele/error.hpp"
#include "oele/stats.hpp"

namespace oele {

namespace {

// Earliest index at which a full match starting at or after pos ends, or npos.
// last[k] is the latest token index where pattern[0..k] can end; updating k
// from high to low keeps one token from serving two pattern elements.
std::size_t earliest_match_end(const std::vector<std::string>& tokens, const Pattern& pattern,
                               std::size_t max_gap, std::size_t pos) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const std::size_t m = pattern.size();
  std::vector<std::size_t> last(m, kNone);
  for (std::size_t j = pos; j < tokens.size(); ++j) {
    for (std::size_t k = m; k-- > 0;) {
      if (tokens[j] != pattern[k]) continue;
      if (k > 0 && (last[k - 1] == kNone || j - last[k - 1] - 1 > max_gap)) continue;
      last[k] = j;
      if (k == m - 1) return j;
    }
  }
  return kNone;
}

struct GroupStats {
  std::vector<double> counts;
  double s_support = 0.0;
  double i_support = 0.0;
};

GroupStats group_stats(const std::vector<TokenSequence>& group, const Pattern& p,
                       std::size_t max_gap) {
  GroupStats g;
  g.counts.reserve(group.size());
  std::size_t with = 0;
  for (const auto& seq : group) {
    const auto c = count_occurrences(seq.tokens, p, max_gap);
    if (c > 0) ++with;
    g.counts.push_back(static_cast<double>(c));
  }
  g.s_support = static_cast<double>(with) / static_cast<double>(group.size());
  g.i_support = stats::mean(g.counts);
  return g;
}

std::string_view frequent_tag(FrequentIn f, const std::string& a, const std::string& b) {
  switch (f) {
    case FrequentIn::A: return a;
    case FrequentIn::B: return b;
    case FrequentIn::Both: return "Both";
  }
  return "Both";
}

}  // namespace

std::size_t count_occurrences(const std::vector<std::string>& tokens, const Pattern& pattern,
                              std::size_t max_gap) {
  if (pattern.empty()) throw EmptyPattern();
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    const std::size_t end = earliest_match_end(tokens, pattern, max_gap, pos);
    if (end == static_cast<std::size_t>(-1)) break;
    ++count;
    pos = end + 1;
  }
  return count;
}

std::vector<DsmPattern> mine(const std::vector<TokenSequence>& group_a,
                             const std::vector<TokenSequence>& group_b,
                             const MineOptions& options) {
  if (group_a.empty() || group_b.empty()) throw std::invalid_argument("mine: empty group");
  if (!(options.s_threshold > 0.0 && options.s_threshold <= 1.0)) {
    throw std::invalid_argument("mine: s_threshold must be in (0, 1]");
  }
  std::set<std::string> alphabet_set;
  for (const auto* g : {&group_a, &group_b}) {
    for (const auto& seq : *g) alphabet_set.insert(seq.tokens.begin(), seq.tokens.end());
  }
  const std::vector<std::string> alphabet(alphabet_set.begin(), alphabet_set.end());

  auto s_support = [&](const std::vector<TokenSequence>& group, const Pattern& p) {
    std::size_t with = 0;
    for (const auto& seq : group) {
      if (earliest_match_end(seq.tokens, p, options.max_gap, 0) != static_cast<std::size_t>(-1)) {
        ++with;
      }
    }
    return static_cast<double>(with) / static_cast<double>(group.size());
  };
  auto frequent = [&](const Pattern& p) {
    return s_support(group_a, p) >= options.s_threshold ||
           s_support(group_b, p) >= options.s_threshold;
  };

  std::vector<DsmPattern> out;
  // Dropping the first or the last element of a match leaves a match of the
  // shorter pattern, so both the prefix and the suffix of a frequent pattern
  // are frequent. Only such candidates are counted.
  std::set<Pattern> previous;
  for (const auto& a : alphabet) {
    if (frequent({a})) previous.insert({a});
  }
  for (std::size_t len = 2; len <= options.max_len && !previous.empty(); ++len) {
    std::set<Pattern> current;
    for (const auto& prefix : previous) {
      for (const auto& a : alphabet) {
        Pattern suffix(prefix.begin() + 1, prefix.end());
        suffix.push_back(a);
        if (!previous.contains(suffix)) continue;
        Pattern p = prefix;
        p.push_back(a);
        const GroupStats ga = group_stats(group_a, p, options.max_gap);
        const GroupStats gb = group_stats(group_b, p, options.max_gap);
        const bool in_a = ga.s_support >= options.s_threshold;
        const bool in_b = gb.s_support >= options.s_threshold;
        if (!in_a && !in_b) continue;
        const auto t = stats::pooled_t_test(ga.counts, gb.counts);
        DsmPattern d;
        d.pattern = p;
        d.s_support_a = ga.s_support;
        d.s_support_b = gb.s_support;
        d.i_support_a = ga.i_support;
        d.i_support_b = gb.i_support;
        d.t_statistic = t.statistic;
        d.p_value = t.p_value;
        d.effect_size = t.effect_size;
        d.frequent_in = in_a && in_b ? FrequentIn::Both : in_a ? FrequentIn::A : FrequentIn::B;
        out.push_back(std::move(d));
        current.insert(std::move(p));
      }
    }
    previous = std::move(current);
  }

  std::sort(out.begin(), out.end(), [](const DsmPattern& x, const DsmPattern& y) {
    const bool xn = std::isnan(x.t_statistic), yn = std::isnan(y.t_statistic);
    if (xn != yn) return yn;
    if (!xn) {
      const double ax = std::fabs(x.t_statistic), ay = std::fabs(y.t_statistic);
      if (ax != ay) return ax > ay;
    }
    return x.pattern < y.pattern;
  });
  return out;
}

std::string join_pattern(const Pattern& p, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += sep;
    out += p[i];
  }
  return out;
}

std::string format_dsm_table(const std::vector<DsmPattern>& patterns, const std::string& name_a,
                             const std::string& name_b) {
  std::string out = fmt::format(
      "pattern\ti_support_{0}\ti_support_{1}\tt\tp_value\teffect_size_d\t"
      "s_support_{0}\ts_support_{1}\ts_frequent_group\n",
      name_a, name_b);
  for (const auto& d : patterns) {
    out += fmt::format("{}\t{:.2f}\t{:.2f}\t{:.3f}\t{:.3f}\t{:.2f}\t{:.2f}\t{:.2f}\t{}\n",
                       join_pattern(d.pattern), d.i_support_a, d.i_support_b, d.t_statistic,
                       d.p_value, d.effect_size, d.s_support_a, d.s_support_b,
                       frequent_tag(d.frequent_in, name_a, name_b));
  }
  out += "# two groups: Cohen's f = |d| / 2\n";
  return out;
}

std::vector<TokenSequence> parse_token_sequences(std::string_view text) {
  std::vector<TokenSequence> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(start, nl - start);
    ++line_no;
    start = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TokenSequence s;
      s.student_id = j.at("student_id").get<std::string>();
      s.tokens = j.at("tokens").get<std::vector<std::string>>();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::string format_token_sequences(const std::vector<TokenSequence>& seqs) {
  std::string out;
  for (const auto& s : seqs) {
    nlohmann::ordered_json j;
    j["student_id"] = s.student_id;
    j["tokens"] = s.tokens;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace oele
