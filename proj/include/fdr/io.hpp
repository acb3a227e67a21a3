#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fdr/divergence.hpp"
#include "fdr/measure.hpp"
#include "fdr/risk.hpp"

namespace fdr {

struct LambdaGrid {
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
    bool log_scale = false;

    std::vector<double> values() const;
};

// A parsed problem file. The "lambda" key holds either a number (solve)
// or a grid object (sweep); a file may omit it entirely and rely on the
// --lambda flag.
struct ProblemFile {
    DivergenceSpec divergence;
    std::optional<double> lambda;
    std::optional<LambdaGrid> grid;
    Measure reference;
    RiskSpec risk;
    std::optional<double> tol;
};

// panels_override > 0 replaces the panel count of density measures;
// discrete measures ignore it.
ProblemFile load_problem(const std::string& path, int panels_override = 0);

}  // namespace fdr
