#pragma once

// Command-line front end. `run` never throws; failures become an exit code
// and a one-line JSON error record on `err`.

#include "dogforge/dogsynth.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dogforge::cli {

enum ExitCode : int { Ok = 0, Usage = 2, PreconditionFailed = 3, NumericalFailure = 4 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "pi/2000", "3pi/4", "0.25*pi", "1.5e-3".
double parse_angle(const std::string& text);

// twisted:<xi> | orange2d:<phi0> | standard:<phi0>[:square|sech] | <bundle path>
struct DesignSpec {
    std::string text;
    dogsynth::Family family = dogsynth::Family::Custom;
    double value = 0.0;
    std::string shape = "square";
    std::string bundle;
};
DesignSpec parse_design_spec(const std::string& text);

}  // namespace dogforge::cli
