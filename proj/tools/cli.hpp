#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace slowvary::cli {

struct RunConfig {
    std::string command;              // reduce | validate | simulate | converge | demo
    std::string model = "walker-modal";
    std::string demo;                 // demo name
    int order = 2;
    std::optional<double> alpha;
    double tol = 1e-10;
    std::string grid;                 // "64", "64x1", cell n for built-in cells
    std::string length;               // simulate: domain lengths "64,1"
    double dt = 0.0;
    double T = 200.0;
    double sample = 1.0;
    std::vector<double> wavelengths{16, 32, 64, 128};
    std::string profile = "sine";     // converge: sine | constant
    std::string out = "out";
    bool exact = false;
    unsigned seed = 1;
    double a = 0.5;                   // built-in cell amplitude
    double k0 = 1.0;                  // built-in cell base diffusivity
};

/// Exit codes: 0 success, 1 usage or input error, 2 spectral assumption
/// violated, 3 numerical check failed.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (CLI11) and dispatches to run().
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace slowvary::cli
