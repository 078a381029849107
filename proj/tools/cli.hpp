#pragma once

#include "fedm/inference.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fedm::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInferenceGap = 2,
    kFindings = 3,
    kInvalid = 4,
};

struct Scenario {
    int line = 0;
    CrispInput input;
};

/// Newline-delimited `name=value` records; pairs split on whitespace or commas,
/// `#` starts a comment, blank lines are skipped. Throws ParseError.
std::vector<Scenario> parse_scenarios(std::string_view text);

/// Evenly spaced points (`steps` per input, endpoints included) over every
/// input universe, first input outermost.
std::vector<Scenario> grid_scenarios(const EdmModel& model, int steps);

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fedm::cli
