#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace oele {

using Pattern = std::vector<std::string>;

struct TokenSequence {
  std::string student_id;
  std::vector<std::string> tokens;
  bool operator==(const TokenSequence&) const = default;
};

// Number of non-overlapping gap-constrained matches of pattern in tokens.
// Consecutive pattern elements may be separated by at most max_gap other
// tokens. Scanning left to right, each counted match is the one ending
// earliest; the next search starts after its last token. Throws EmptyPattern.
std::size_t count_occurrences(const std::vector<std::string>& tokens, const Pattern& pattern,
                              std::size_t max_gap);

enum class FrequentIn { A, B, Both };

struct DsmPattern {
  Pattern pattern;
  double s_support_a = 0.0, s_support_b = 0.0;
  double i_support_a = 0.0, i_support_b = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double effect_size = 0.0;  // pooled-SD standardized mean difference, A - B
  FrequentIn frequent_in = FrequentIn::Both;
  bool operator==(const DsmPattern&) const = default;
};

struct MineOptions {
  std::size_t max_gap = 1;
  double s_threshold = 0.5;
  std::size_t max_len = 4;
};

// Every pattern of length 2..max_len whose s-support reaches s_threshold in
// at least one group. Ordered by descending |t| (undefined t last), then by
// pattern. Throws std::invalid_argument on an empty group or a threshold
// outside (0, 1].
std::vector<DsmPattern> mine(const std::vector<TokenSequence>& group_a,
                             const std::vector<TokenSequence>& group_b,
                             const MineOptions& options = {});

std::string join_pattern(const Pattern& p, std::string_view sep = " -> ");

// Tab-separated table, one row per pattern, with a header naming the groups
// and a trailing comment on converting d to Cohen's f.
std::string format_dsm_table(const std::vector<DsmPattern>& patterns, const std::string& name_a,
                             const std::string& name_b);

// One JSON object per line: {"student_id": "...", "tokens": ["...", ...]}.
std::vector<TokenSequence> parse_token_sequences(std::string_view text);
std::string format_token_sequences(const std::vector<TokenSequence>& seqs);

}  // namespace oele
