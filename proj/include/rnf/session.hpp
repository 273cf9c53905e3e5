#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "rnf/pipeline.hpp"
#include "rnf/report.hpp"

namespace rnf {

// Malformed or inconsistent configuration; `what()` reads "<source>:<line>: <message>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& msg)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

SessionConfig parse_config(const std::string& text, const std::string& source = "<config>");
SessionConfig load_config(const std::string& path);

// NAME=VALUE; throws std::invalid_argument for unknown names or bad values.
void apply_tolerance(SessionConfig& c, const std::string& assignment);

enum class Subcommand { graph, normal_form, melnikov, stratify, kam, all };
std::optional<Subcommand> parse_subcommand(const std::string& s);
const char* subcommand_name(Subcommand s);

struct SessionOutput {
  int exit_code = 0;
  std::string report;   // report.json
  std::string summary;  // summary.txt
  std::string csv;      // decay.csv, empty when the KAM stage did not run
};

SessionOutput run_session(const SessionConfig& c, Subcommand cmd, int workers);

// Writes the outputs into out_dir (created if missing); throws on I/O failure.
void write_outputs(const SessionOutput& o, const std::string& out_dir);

}  // namespace rnf
