#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pulse_esprit/error.hpp"
#include "pulse_esprit/linalg.hpp"
#include "pulse_esprit/signal_model.hpp"

namespace pulse_esprit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Library errors exit with 10 + the error code's ordinal.
int exit_code_for(ErrorCode code);

/// Runs one command. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Flat key = value file with [section] headers. Keys must belong to their
/// section (or to any section when given before the first header); unknown
/// keys raise ConfigError. Values may be double-quoted.
std::map<std::string, std::string> read_config(const std::string& path);

void write_measurements(std::ostream& out, const MeasurementSet& meas);
/// Parses the omega,l,re,im format. Rows may come in any order; every
/// (omega, l) cell must be present exactly once.
MeasurementSet read_measurements(std::istream& in);

}  // namespace pulse_esprit::cli
