#pragma once

#include <vector>

#include "fdr/divergence.hpp"
#include "fdr/measure.hpp"
#include "fdr/risk.hpp"

namespace fdr {

struct OracleResult {
    std::vector<double> masses;
    double objective = 0.0;
    long iterations = 0;
    bool converged = false;
    double final_step = 0.0;
};

// Brute-force minimizer of sum p L + lambda sum q f(p/q) over the
// simplex by exponentiated gradient (mirror descent in the entropic
// geometry). Never touches fdot_inv or the multiplier machinery: its
// whole value is independence from the closed form it certifies.
// Multiplicative updates keep iterates strictly interior, where f and
// fdot are finite for every builtin.
OracleResult simplex_minimize(const DiscreteMeasure& q, const BoundRisk& risk, double lambda,
                              const DivergenceSpec& spec, long max_iters = 200000,
                              double tol = 1e-12);

struct CertifyReport {
    double mass_gap = 0.0;       // sup-norm distance between the mass vectors
    double objective_gap = 0.0;  // objective(closed form) - objective(oracle)
    bool pass = false;
};

// pass = closed form no worse than the oracle (within tol) and masses
// within 10 sqrt(tol) in sup norm.
CertifyReport certify(const DivergenceSpec& spec, const DiscreteMeasure& q, const BoundRisk& risk,
                      double lambda, const std::vector<double>& posterior_masses,
                      const OracleResult& oracle, double tol);

}  // namespace fdr
