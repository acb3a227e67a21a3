#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace fdr {

// Base class for every failure the library reports deliberately.
// The CLI maps subclasses onto its exit codes; anything else escaping
// is a bug, not a solver outcome.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or input schema: unknown builtin name, malformed
// measure, invalid dataset, ...
class ConfigError : public Error {
public:
    using Error::Error;
};

// The normalization constraint k(beta) = 1 has no solution on the
// feasible interval. `empty_interval` distinguishes B = {} from
// "interval nonempty but k never reaches 1" (lambda below lambda*).
class NoFeasibleBeta : public Error {
public:
    NoFeasibleBeta(const std::string& what, bool empty, std::optional<double> lstar = {})
        : Error(what), empty_interval(empty), lambda_star(lstar) {}

    bool empty_interval;
    std::optional<double> lambda_star;  // populated when the caller knows it
};

// A probed argument -(t+L)/lambda left the divergence's y_range at a
// support point; carries the offending point for diagnostics.
class InfeasiblePoint : public Error {
public:
    InfeasiblePoint(const std::string& what, double point, double arg)
        : Error(what), point(point), argument(arg) {}

    double point;
    double argument;
};

// Every probe of the constraint integral came back +inf.
class DivergentIntegral : public Error {
public:
    using Error::Error;
};

// Iteration budget exhausted without meeting the tolerance.
class NonConvergence : public Error {
public:
    using Error::Error;
};

// Boundary probes neither converged nor crossed the divergence
// threshold within the refinement budget. Never a silent guess.
class Inconclusive : public Error {
public:
    using Error::Error;
};

}  // namespace fdr
