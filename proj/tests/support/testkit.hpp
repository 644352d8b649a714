#pragma once

// Shared fixtures for the unit tests and the acceptance runner: brute-force
// oracles, random instance generators and scripted trigger sessions.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "oele/causal_map.hpp"
#include "oele/engine.hpp"
#include "oele/events.hpp"
#include "oele/mining.hpp"
#include "oele/reasoning.hpp"

namespace testkit {

using oele::ActionEvent;
using oele::CausalLink;
using oele::CausalMap;
using oele::ExpertMap;

CausalLink link(const std::string& s, char sign, const std::string& t,
                oele::Marking m = oele::Marking::Unmarked);

// Concepts are created for every endpoint; each link gets its own page
// named "p_<source>_<target>".
ExpertMap expert_of(const std::vector<CausalLink>& links,
                    const std::vector<std::string>& extra_concepts = {});
CausalMap map_of(const std::vector<CausalLink>& links,
                 const std::vector<std::string>& extra_concepts = {});

// ---- causal maps --------------------------------------------------------

struct MapPair {
  CausalMap student;
  ExpertMap expert;
};
// Up to max_concepts concepts and max_links links per map, random signs.
MapPair random_map_pair(std::mt19937_64& rng, int max_concepts = 8, int max_links = 14);

// Student links whose exact (source, target, sign) triple appears in the
// expert link list count +1, everything else -1.
int oracle_map_score(const CausalMap& student, const ExpertMap& expert);

struct OracleQuery {
  oele::Answer answer = oele::Answer::CannotDetermine;
  int path_sum = 0;
  std::vector<std::pair<std::string, std::string>> used;  // sorted endpoints
};
// Tries every ordered selection of distinct intermediate concepts and keeps
// those whose consecutive pairs are all linked.
OracleQuery oracle_query(const CausalMap& map, const std::string& source,
                         const std::string& target);

// ---- sequences ----------------------------------------------------------

// Every (start, end) span of an in-order embedding respecting max_gap.
std::vector<std::pair<std::size_t, std::size_t>> oracle_embeddings(
    const std::vector<std::string>& tokens, const oele::Pattern& pattern, std::size_t max_gap);
// Largest number of embeddings with pairwise disjoint spans.
std::size_t oracle_count(const std::vector<std::string>& tokens, const oele::Pattern& pattern,
                         std::size_t max_gap);

struct OracleSupport {
  double s_a = 0, s_b = 0, i_a = 0, i_b = 0;
};
// Every pattern of length 2..max_len over the corpus alphabet that clears
// threshold in at least one group.
std::map<oele::Pattern, OracleSupport> oracle_mine(const std::vector<oele::TokenSequence>& a,
                                                   const std::vector<oele::TokenSequence>& b,
                                                   std::size_t max_gap, double threshold,
                                                   std::size_t max_len);

std::vector<oele::TokenSequence> random_corpus(std::mt19937_64& rng, const std::string& prefix,
                                               std::size_t max_students, std::size_t max_tokens,
                                               const std::vector<std::string>& alphabet);

// ---- scripted sessions --------------------------------------------------

// Expert used by the scripts: A+B (page p_A_B), B+C (p_B_C), C-D (p_C_D).
const ExpertMap& script_expert();

ActionEvent read(double t, double dur, const std::string& page);
ActionEvent notes(double t, double dur = 5);
ActionEvent add_concept(double t, const std::string& id);
ActionEvent add_link(double t, const CausalLink& l, double dur = 5);
ActionEvent modify_link(double t, const CausalLink& from, const CausalLink& to, double dur = 5);
ActionEvent delete_link(double t, const CausalLink& l, double dur = 5);
ActionEvent quiz(double t, double dur = 20);

struct Script {
  std::string name;
  oele::ScaffoldKind expected;
  oele::EngineConfig config;
  std::vector<ActionEvent> events;
};
// One session per scaffold kind, each built to fire that kind alone.
std::vector<Script> trigger_scripts();
// Hint2 followed 5 s later by an Edit-Ineff -> Quiz trigger inside the
// minimum gap; only the first fires.
Script window_script();

}  // namespace testkit
