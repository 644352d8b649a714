#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "oele/analytics.hpp"
#include "oele/engine.hpp"
#include "oele/events.hpp"

namespace oele {

// Line-delimited JSON, one record per line. Field layouts are listed in the
// README. Every parser throws ParseError with the 1-based line number.

std::string format_events(const std::vector<ActionEvent>& events);
std::vector<ActionEvent> parse_events(std::string_view text);

std::string format_annotated(const std::vector<AnnotatedEvent>& events);
std::vector<AnnotatedEvent> parse_annotated(std::string_view text);

std::string format_deliveries(const std::vector<ScaffoldDelivery>& deliveries);
std::vector<ScaffoldDelivery> parse_deliveries(std::string_view text);

std::string format_affect(const std::string& student_id,
                          const std::vector<AffectObservation>& observations);
std::vector<AffectObservation> parse_affect(std::string_view text);

std::string format_outcomes(const std::vector<OutcomeRecord>& outcomes);
std::vector<OutcomeRecord> parse_outcomes(std::string_view text);

// "student_id<TAB>group" per line; a leading "student_id" header is allowed.
std::string format_groups(const std::map<std::string, std::string>& groups);
std::map<std::string, std::string> parse_groups(std::string_view text);

// JSON object with any of the EngineConfig fields plus
// "disabled": ["Hint3", ...]. Missing fields keep their defaults.
EngineConfig parse_engine_config(std::string_view json_text, EngineConfig base = {});
std::string format_engine_config(const EngineConfig& config);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace oele
