#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edchrom/harness.hpp"
#include "edchrom/isotherm.hpp"
#include "edchrom/stepper.hpp"

namespace edchrom {

/// Parse or validation failure; what() carries "source:line: message" when
/// a line is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, std::size_t line, const std::string& message);
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Everything one invocation of the driver needs.
struct RunRequest {
  std::optional<int> experiment;
  IsothermParams isotherm;
  SimulationConfig config;
  bool scheme_set = false;  // false only for a blank request with no scheme given
  SchemeKind reference_scheme = SchemeKind::ChrUpw;
  std::size_t reference_cells = 25600;
  std::vector<SchemeKind> sweep_schemes;
  std::vector<std::size_t> sweep_cells = {100, 200, 400, 800, 1600};
  std::string out_dir = "out";
  int jobs = 1;
  bool single_thread = false;
  bool table1 = false;
  bool sweep = false;

  Preset preset() const;
};

/// Request populated from an experiment preset.
RunRequest request_from_preset(int experiment);

/// Applies config text on top of request. Recognised layout:
///
///   [run]       experiment out jobs single_thread table1 sweep
///   [isotherm]  a b porosity nu
///   [stepper]   scheme u Da K T m outputs newton_tol newton_max_iter weno_epsilon max_dt
///   [injection] interval = start end : c1 .. cN   (repeatable; "none" clears)
///   [initial]   kind sampling amplitude center sharpness
///   [harness]   reference_scheme mref sweep_schemes sweep_m
///
/// An `experiment` key resets everything to that preset before the other
/// keys apply, wherever it appears. Lists are whitespace separated.
/// Unknown sections or keys are errors.
void apply_config_text(RunRequest& request, std::string_view text, std::string_view source = "<config>");

/// Full request from config text alone (blank base unless the text names an
/// experiment), validated.
RunRequest parse_config_text(std::string_view text, std::string_view source = "<config>");

/// Reads and parses a file.
RunRequest parse_config_file(const std::string& path);

/// Throws ConfigError if the request cannot be run.
void validate_request(const RunRequest& request);

/// Config text reproducing the request exactly (all keys explicit).
std::string config_text(const RunRequest& request);

/// Driver command line: --config FILE first, then flags override.
/// Returns std::nullopt when help was printed.
std::optional<RunRequest> parse_command_line(int argc, const char* const* argv);

}  // namespace edchrom
