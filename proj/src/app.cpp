#include "oele/app.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "json.hpp"
#include "oele/analytics.hpp"
#include "oele/annotator.hpp"
#include "oele/causal_map.hpp"
#include "oele/engine.hpp"
#include "oele/error.hpp"
#include "oele/io.hpp"
#include "oele/mining.hpp"
#include "oele/reasoning.hpp"
#include "oele/simulator.hpp"

namespace oele {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Thrown by command bodies to exit with a message and nonzero status.
struct CommandFailure {
  std::string message;
};

bool verbose() {
  const char* v = std::getenv("OELE_VERBOSE");
  return v && *v && std::string(v) != "0";
}

struct EngineFlags {
  std::string config_path;
  std::optional<double> long_read;
  std::optional<double> min_gap;
  std::optional<std::size_t> hint1_events;
  std::optional<double> hint1_seconds;
  std::optional<unsigned> enc3_period;
  std::vector<std::string> disable;

  void attach(CLI::App* cmd) {
    cmd->add_option("--engine-config", config_path, "Engine config JSON file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--long-read", long_read, "Long-read threshold in seconds (default 60)");
    cmd->add_option("--min-gap", min_gap,
                    "Minimum seconds between scaffolds (default 60)");
    cmd->add_option("--hint1-events", hint1_events,
                    "Events to wait for marking after a quiz (default 5)");
    cmd->add_option("--hint1-seconds", hint1_seconds,
                    "Seconds to wait for marking after a quiz (default 120)");
    cmd->add_option("--enc3-period", enc3_period,
                    "Every n-th plain debug occasion reassures (default 3)");
    cmd->add_option("--disable", disable, "Scaffold kind to switch off (repeatable)");
  }

  EngineConfig resolve() const {
    EngineConfig c;
    if (!config_path.empty()) c = parse_engine_config(read_file(config_path));
    if (long_read) c.long_threshold_seconds = *long_read;
    if (min_gap) c.min_inter_scaffold_seconds = *min_gap;
    if (hint1_events) c.hint1_window_events = *hint1_events;
    if (hint1_seconds) c.hint1_window_seconds = *hint1_seconds;
    if (enc3_period) c.enc3_period = *enc3_period;
    for (const auto& k : disable) c.enabled[index_of(parse_scaffold_kind(k))] = false;
    c.validate();
    return c;
  }
};

Json config_json(const EngineConfig& c) { return Json::parse(format_engine_config(c)); }

const ExpertMap& expert_from(const std::string& path, std::optional<ExpertMap>& storage) {
  if (path.empty()) return default_expert_map();
  try {
    storage = load_expert_map(path);
  } catch (const ParseError& e) {
    throw CommandFailure{path + ": " + e.what()};
  }
  return *storage;
}

void write_manifest(const fs::path& path, const std::string& command, Json inputs, Json config,
                    Json outputs, std::optional<std::uint64_t> seed,
                    std::chrono::steady_clock::time_point started) {
  Json m;
  m["command"] = command;
  m["tool_version"] = kToolVersion;
  m["inputs"] = std::move(inputs);
  m["config"] = std::move(config);
  m["outputs"] = std::move(outputs);
  if (seed) m["seed"] = *seed;
  m["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_file(path.string(), m.dump(2) + "\n");
}

std::vector<fs::path> jsonl_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::size_t n_high = 40;
  std::size_t n_low = 40;
  std::uint64_t seed = 7;
  std::string profiles;
  std::string map;
  double budget = 7200.0;
  bool no_engine = false;
  std::string out;
  EngineFlags engine;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  std::optional<ExpertMap> storage;
  const ExpertMap& expert = expert_from(a.map, storage);
  BundledProfiles profiles = bundled_profiles();
  if (!a.profiles.empty()) profiles = parse_profiles(read_file(a.profiles));
  SimulationOptions options;
  options.budget_seconds = a.budget;
  if (a.no_engine) {
    options.engine.reset();
  } else {
    options.engine = a.engine.resolve();
  }

  const Cohort cohort = simulate_cohort(a.n_high, a.n_low, a.seed, expert, profiles, options);
  const fs::path root(a.out);
  for (const char* sub : {"events", "affect", "deliveries"}) fs::create_directories(root / sub);
  for (const auto& log : cohort.logs) {
    const std::string file = log.student_id + ".jsonl";
    write_file((root / "events" / file).string(), format_events(log.events));
    write_file((root / "affect" / file).string(), format_affect(log.student_id, log.affect));
    write_file((root / "deliveries" / file).string(), format_deliveries(log.deliveries));
    if (verbose()) {
      err << fmt::format("simulated {}: {} events, {} scaffolds, final map score {}\n",
                         log.student_id, log.events.size(), log.deliveries.size(),
                         log.final_map_score);
    }
  }
  write_file((root / "groups.tsv").string(), format_groups(cohort.groups));
  write_file((root / "outcomes.jsonl").string(), format_outcomes(cohort.outcomes));

  Json inputs;
  inputs["profiles"] = a.profiles.empty() ? "bundled" : a.profiles;
  inputs["map"] = a.map.empty() ? "bundled" : a.map;
  Json config;
  config["high"] = a.n_high;
  config["low"] = a.n_low;
  config["budget_seconds"] = a.budget;
  config["engine"] = options.engine ? config_json(*options.engine) : Json(nullptr);
  Json outputs = {"events/", "affect/", "deliveries/", "groups.tsv", "outcomes.jsonl"};
  write_manifest(root / "manifest.json", "simulate", inputs, config, outputs, a.seed, started);
  out << fmt::format("simulated {} students into {}\n", cohort.logs.size(), a.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct ReplayArgs {
  std::string events;
  std::string map;
  std::string out;
  std::optional<double> long_read_percentile;
  std::optional<double> coherence_lookback;
  bool verify = false;
  EngineFlags engine;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  std::optional<ExpertMap> storage;
  const ExpertMap& expert = expert_from(a.map, storage);
  const EngineConfig base = a.engine.resolve();

  const auto files = jsonl_files(a.events);
  if (files.empty()) {
    err << "warning: no event logs in " << a.events << "; nothing to replay\n";
    return 0;
  }
  const fs::path root(a.out);
  fs::create_directories(root / "annotated");
  fs::create_directories(root / "deliveries");

  std::vector<TokenSequence> tokens;
  std::size_t total_deliveries = 0, violations = 0;
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    std::vector<ActionEvent> events;
    try {
      events = parse_events(read_file(file.string()));
    } catch (const ParseError& e) {
      throw CommandFailure{file.string() + ": " + e.what()};
    }
    const std::string student = events.empty() ? file.stem().string() : events.front().student_id;
    EngineConfig config = base;
    if (a.long_read_percentile) {
      LongReadPolicy policy;
      policy.mode = LongReadPolicy::Mode::Percentile;
      policy.percentile = *a.long_read_percentile;
      config.long_threshold_seconds = long_read_threshold(events, policy);
    }
    EngineRun run;
    try {
      run = run_engine(events, expert, config, student);
    } catch (const ReplayError& e) {
      throw CommandFailure{fmt::format("{} (student {}) at event {}: {}", file.string(), student,
                                       e.index(), e.what())};
    } catch (const OutOfOrderEvent& e) {
      throw CommandFailure{fmt::format("{} (student {}) at event {}: out of order: {}",
                                       file.string(), student, e.index(), e.what())};
    }
    run.annotated = tag_coherence(std::move(run.annotated), expert, a.coherence_lookback);
    write_file((root / "annotated" / name).string(), format_annotated(run.annotated));
    write_file((root / "deliveries" / name).string(), format_deliveries(run.deliveries));
    tokens.push_back({student, token_labels(collapse(run.annotated))});
    total_deliveries += run.deliveries.size();
    if (a.verify) {
      for (const auto& v : verify_deliveries(events, run.deliveries, expert, config)) {
        err << "verify: " << v << "\n";
        ++violations;
      }
    }
    if (verbose()) err << fmt::format("replayed {}: {} scaffolds\n", name, run.deliveries.size());
  }
  write_file((root / "tokens.jsonl").string(), format_token_sequences(tokens));

  Json inputs;
  inputs["events"] = a.events;
  inputs["map"] = a.map.empty() ? "bundled" : a.map;
  Json config = config_json(base);
  if (a.long_read_percentile) config["long_read_percentile"] = *a.long_read_percentile;
  if (a.coherence_lookback) config["coherence_lookback_seconds"] = *a.coherence_lookback;
  write_manifest(root / "manifest.json", "replay", inputs, config,
                 {"annotated/", "deliveries/", "tokens.jsonl"}, std::nullopt, started);
  out << fmt::format("replayed {} logs, {} scaffolds", files.size(), total_deliveries);
  if (a.verify) out << fmt::format(", {} verification failures", violations);
  out << "\n";
  return violations == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct MineArgs {
  std::string tokens;
  std::string groups;
  std::string group_a = "High";
  std::string group_b = "Low";
  MineOptions options;
  std::string out;
};

int cmd_mine(const MineArgs& a, std::ostream& out, std::ostream&) {
  const auto started = std::chrono::steady_clock::now();
  const auto groups = parse_groups(read_file(a.groups));
  const auto seqs = parse_token_sequences(read_file(a.tokens));
  std::vector<TokenSequence> ga, gb;
  for (const auto& s : seqs) {
    const auto it = groups.find(s.student_id);
    if (it == groups.end() || s.tokens.empty()) continue;
    if (it->second == a.group_a) ga.push_back(s);
    if (it->second == a.group_b) gb.push_back(s);
  }
  if (ga.empty() || gb.empty()) {
    throw CommandFailure{fmt::format("groups '{}' and '{}' both need students with tokens",
                                     a.group_a, a.group_b)};
  }
  const auto table = format_dsm_table(mine(ga, gb, a.options), a.group_a, a.group_b);
  if (a.out.empty()) {
    out << table;
    return 0;
  }
  write_file(a.out, table);
  Json inputs = {{"tokens", a.tokens}, {"groups", a.groups}};
  Json config = {{"max_gap", a.options.max_gap},
                 {"s_threshold", a.options.s_threshold},
                 {"max_len", a.options.max_len},
                 {"group_a", a.group_a},
                 {"group_b", a.group_b}};
  write_manifest(a.out + ".manifest.json", "mine", inputs, config, {a.out}, std::nullopt, started);
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string run;
  std::string affect;
  std::string outcomes;
  std::string groups;
  std::string regressor = "ordinal";
  ReportOptions options;
  std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  const auto groups = parse_groups(read_file(a.groups));
  ReportOptions options = a.options;
  options.regressor =
      a.regressor == "wallclock" ? SlopeRegressor::WallClock : SlopeRegressor::EditOrdinal;

  std::map<std::string, OutcomeRecord> outcomes;
  if (!a.outcomes.empty()) {
    for (auto& o : parse_outcomes(read_file(a.outcomes))) outcomes[o.student_id] = o;
  }
  const fs::path run(a.run);
  std::vector<StudentRecord> cohort;
  for (const auto& file : jsonl_files(run / "annotated")) {
    StudentRecord s;
    s.annotated = parse_annotated(read_file(file.string()));
    s.student_id = s.annotated.empty() ? file.stem().string() : s.annotated.front().base.student_id;
    const auto g = groups.find(s.student_id);
    if (g == groups.end()) {
      if (verbose()) err << "skipping " << s.student_id << ": not in grouping\n";
      continue;
    }
    s.group = g->second;
    const fs::path deliveries = run / "deliveries" / file.filename();
    if (fs::exists(deliveries)) s.deliveries = parse_deliveries(read_file(deliveries.string()));
    if (!a.affect.empty()) {
      const fs::path affect = fs::path(a.affect) / file.filename();
      if (fs::exists(affect)) s.affect = parse_affect(read_file(affect.string()));
    }
    if (const auto o = outcomes.find(s.student_id); o != outcomes.end()) s.outcome = o->second;
    double end = 0.0;
    for (const auto& e : s.annotated) end = std::max(end, e.base.timestamp + e.base.duration);
    s.session_end = end;
    cohort.push_back(std::move(s));
  }
  if (cohort.empty()) throw CommandFailure{"no annotated logs of grouped students in " + a.run};

  const std::string report = full_report(cohort, options);
  if (a.out.empty()) {
    out << report;
    return 0;
  }
  write_file(a.out, report);
  Json inputs = {{"run", a.run}, {"affect", a.affect}, {"outcomes", a.outcomes}, {"groups", a.groups}};
  Json config = {{"slope_regressor", a.regressor},
                 {"median_band", options.median_band},
                 {"max_ordinal", options.max_ordinal}};
  write_manifest(a.out + ".manifest.json", "report", inputs, config, {a.out}, std::nullopt,
                 started);
  return 0;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::string map;
  std::string expert;
  std::string quiz = "everything";
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream&) {
  std::optional<ExpertMap> storage;
  const ExpertMap& expert = expert_from(a.expert, storage);
  CausalMap student;
  try {
    student = load_causal_map(a.map);
  } catch (const ParseError& e) {
    throw CommandFailure{a.map + ": " + e.what()};
  }
  out << fmt::format("map_score\t{}\n", map_score(student, expert));
  out << "\nsource\tsign\ttarget\tclass\n";
  for (const auto& [key, l] : student.links()) {
    out << fmt::format("{}\t{}\t{}\t{}\n", l.source, to_string(l.sign), l.target,
                       to_string(classify_link(l, expert)));
  }
  const QuizScope scope = parse_quiz_scope(a.quiz);
  const QuizResult quiz = grade_quiz(student, generate_quiz(expert, scope), scope);
  out << fmt::format("\nquiz\t{}\tscore\t{}%\n", a.quiz, fmt::format("{:g}", quiz.score));
  out << "source\ttarget\texpected\tanswer\tgrade\n";
  for (const auto& item : quiz.items) {
    out << fmt::format("{}\t{}\t{}\t{}\t{}\n", item.question.source, item.question.target,
                       to_string(item.question.expert_answer), to_string(item.betty_answer),
                       item.grade == Grade::Correct ? "Correct" : "Incorrect");
  }
  return 0;
}

int cmd_defaults(const std::string& what, std::ostream& out) {
  if (what == "map") {
    out << default_expert_map_text();
  } else if (what == "profiles") {
    out << format_profiles(bundled_profiles());
  } else if (what == "trees") {
    out << format_trees(bundled_trees());
  } else {
    out << format_engine_config(EngineConfig{});
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive scaffolding toolkit: simulate, replay, mine, report, score"};
  app.name("oele");
  app.failure_message(CLI::FailureMessage::help);
  app.require_subcommand(1, 1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic High/Low cohort");
  simulate->add_option("--high", sim.n_high, "High-profile students")->capture_default_str();
  simulate->add_option("--low", sim.n_low, "Low-profile students")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Cohort seed")->capture_default_str();
  simulate->add_option("--profiles", sim.profiles, "Profile JSON overriding bundled defaults")
      ->check(CLI::ExistingFile);
  simulate->add_option("--map", sim.map, "Expert map file (default: bundled)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--budget", sim.budget, "Session length in seconds")->capture_default_str();
  simulate->add_flag("--no-engine", sim.no_engine, "Simulate without scaffolds");
  simulate->add_option("--out", sim.out, "Output directory")->required();
  sim.engine.attach(simulate);

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "Annotate logs and run the scaffold engine offline");
  replay->add_option("--events", rep.events, "Directory of event logs")
      ->required()
      ->check(CLI::ExistingDirectory);
  replay->add_option("--map", rep.map, "Expert map file (default: bundled)")
      ->check(CLI::ExistingFile);
  replay->add_option("--out", rep.out, "Output directory")->required();
  replay->add_option("--long-read-percentile", rep.long_read_percentile,
                     "Per-session percentile of read durations used as the long-read threshold");
  replay->add_option("--coherence-lookback", rep.coherence_lookback,
                     "Seconds a read supports later edits (default: whole session)");
  replay->add_flag("--verify", rep.verify, "Re-check every delivery against its trigger");
  rep.engine.attach(replay);

  MineArgs mn;
  auto* mine_cmd = app.add_subcommand("mine", "Differential sequence mining between two groups");
  mine_cmd->add_option("--tokens", mn.tokens, "Token sequences (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  mine_cmd->add_option("--groups", mn.groups, "student_id<TAB>group file")
      ->required()
      ->check(CLI::ExistingFile);
  mine_cmd->add_option("--group-a", mn.group_a, "First group")->capture_default_str();
  mine_cmd->add_option("--group-b", mn.group_b, "Second group")->capture_default_str();
  mine_cmd->add_option("--max-gap", mn.options.max_gap, "Max tokens between pattern elements")
      ->capture_default_str();
  mine_cmd->add_option("--s-threshold", mn.options.s_threshold, "Minimum s-support in a group")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  mine_cmd->add_option("--max-len", mn.options.max_len, "Longest pattern")
      ->capture_default_str()
      ->check(CLI::Range(2, 16));
  mine_cmd->add_option("--out", mn.out, "Output table (default: stdout)");

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Emit the analysis tables");
  report->add_option("--run", rp.run, "Replay output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_option("--groups", rp.groups, "student_id<TAB>group file")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--affect", rp.affect, "Directory of affect logs")
      ->check(CLI::ExistingDirectory);
  report->add_option("--outcomes", rp.outcomes, "Pre/post outcomes (JSON lines)")
      ->check(CLI::ExistingFile);
  report->add_option("--slope-regressor", rp.regressor, "ordinal or wallclock")
      ->capture_default_str()
      ->check(CLI::IsMember({"ordinal", "wallclock"}));
  report->add_option("--median-band", rp.options.median_band, "Median split exclusion band")
      ->capture_default_str();
  report->add_option("--max-ordinal", rp.options.max_ordinal, "Per-ordinal rows up to this")
      ->capture_default_str();
  report->add_option("--out", rp.out, "Output file (default: stdout)");

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Score and quiz a single student map");
  score->add_option("--map", sc.map, "Student map file")->required()->check(CLI::ExistingFile);
  score->add_option("--expert", sc.expert, "Expert map file (default: bundled)")
      ->check(CLI::ExistingFile);
  score->add_option("--quiz", sc.quiz, "everything or section:<id>")->capture_default_str();

  std::string what = "engine-config";
  auto* defaults = app.add_subcommand("defaults", "Print a bundled default document");
  defaults->add_option("what", what, "map, profiles, trees or engine-config")
      ->capture_default_str()
      ->check(CLI::IsMember({"map", "profiles", "trees", "engine-config"}));

  std::vector<std::string> argv_store{"oele"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*simulate) return cmd_simulate(sim, out, err);
    if (*replay) return cmd_replay(rep, out, err);
    if (*mine_cmd) return cmd_mine(mn, out, err);
    if (*report) return cmd_report(rp, out, err);
    if (*score) return cmd_score(sc, out, err);
    if (*defaults) return cmd_defaults(what, out);
  } catch (const CommandFailure& f) {
    err << "error: " << f.message << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace oele
