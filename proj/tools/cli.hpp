#pragma once

#include "shiftbound/bounds.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace shiftbound::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2 };

// Runs one command; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 17 significant digits; inf and nan spelled out.
std::string format_double(double v);

std::string to_json(const BoundReport& r);

}  // namespace shiftbound::cli
