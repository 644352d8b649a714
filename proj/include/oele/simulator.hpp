#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "oele/analytics.hpp"
#include "oele/causal_map.hpp"
#include "oele/engine.hpp"
#include "oele/events.hpp"

namespace oele {

// mt19937_64 with distributions written out here, so a seed produces the
// same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();                     // [0, 1)
  double normal();                      // Box-Muller, standard normal
  double lognormal(double mean, double spread);  // given mean, log-sd spread
  std::size_t index(std::size_t n);     // uniform in [0, n)
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// splitmix64 finalizer; derives independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct DurationSpec {
  double mean = 30.0;    // seconds
  double spread = 0.5;   // sd of log duration
  bool operator==(const DurationSpec&) const = default;
};

struct StudentProfile {
  std::string name;
  // Target share of time per activity, indexed by Activity.
  std::array<double, 5> activity_mix{0.262, 0.005, 0.47, 0.2313, 0.032};
  // Probability that a score-changing map edit raises the score.
  double read_effectiveness = 0.637;
  // Probability that a read is chosen to cover the link the next edit adds.
  double coherence = 0.88;
  // After an edit, the quiz weight is scaled by 1 + 4 * quiz_propensity.
  double quiz_propensity = 0.5;
  // Probability of marking explanation links correct after a quiz.
  double mark_propensity = 0.3;
  // Probability of acting on each scaffold, indexed by ScaffoldKind.
  std::array<double, 9> compliance{0.6, 0.6, 0.5, 0.5, 0.6, 0.6, 0.3, 0.5, 0.3};
  std::array<DurationSpec, 5> durations{
      DurationSpec{45.0, 0.6}, DurationSpec{25.0, 0.4}, DurationSpec{20.0, 0.5},
      DurationSpec{40.0, 0.4}, DurationSpec{20.0, 0.4}};
  // Baseline likelihood per emotion, indexed by Emotion.
  std::array<double, 5> affect_baseline{0.55, 0.12, 0.05, 0.08, 0.06};
  double affect_noise = 0.03;
  double confusion_bump = 0.05;
  // Pre/post test draws.
  double max_score = 23.0;
  double pre_mean = 4.19, pre_sd = 2.06;
  double nlg_mean = 0.33, nlg_sd = 0.17;

  // Throws InvalidConfig when the mix does not sum to 1, a probability is
  // outside [0, 1], or a duration is not positive.
  void validate() const;
  bool operator==(const StudentProfile&) const = default;
};

struct BundledProfiles {
  StudentProfile high;
  StudentProfile low;
};
const BundledProfiles& bundled_profiles();

// JSON object {"high": {...}, "low": {...}}; each profile overrides any
// subset of the fields of the corresponding bundled profile.
BundledProfiles parse_profiles(std::string_view json_text);
std::string format_profiles(const BundledProfiles& profiles);

struct SessionLog {
  std::string student_id;
  std::vector<ActionEvent> events;
  std::vector<AffectObservation> affect;
  CausalMap final_map;
  int final_map_score = 0;
  std::vector<ScaffoldDelivery> deliveries;
};

struct SimulationOptions {
  double budget_seconds = 7200.0;
  // Run the scaffold engine in the loop; deliveries then shape behavior.
  std::optional<EngineConfig> engine = EngineConfig{};
  std::size_t max_incorrect_links = 10;
};

SessionLog simulate_session(const StudentProfile& profile, const ExpertMap& expert,
                            const std::string& student_id, std::uint64_t seed,
                            const SimulationOptions& options = {});

struct Cohort {
  std::vector<SessionLog> logs;
  std::map<std::string, std::string> groups;  // student id -> "High" / "Low"
  std::vector<OutcomeRecord> outcomes;
};

// Student ids H001.., L001..; per-student seeds derive from seed.
Cohort simulate_cohort(std::size_t n_high, std::size_t n_low, std::uint64_t seed,
                       const ExpertMap& expert, const BundledProfiles& profiles = bundled_profiles(),
                       const SimulationOptions& options = {});

}  // namespace oele
