#pragma once

#include <functional>
#include <vector>

#include "fdr/divergence.hpp"
#include "fdr/measure.hpp"
#include "fdr/risk.hpp"
#include "fdr/solver.hpp"

namespace fdr {

// Reshaped risk under which g-divergence regularization reproduces the
// f-divergence posterior. The additive normalization constant of the
// transformed problem is deliberately left out of v: the g-solve's own
// multiplier absorbs any constant shift.
struct RiskTransform {
    DivergenceSpec f_spec;
    DivergenceSpec g_spec;
    double lambda = 0.0;
    double n_f = 0.0;  // normalization constant of the f-problem at this lambda

    // t -> -lambda * gdot(fdot_inv(-(n_f + t)/lambda)). The sign makes
    // gdot_inv applied to the g-problem's stationarity condition land
    // exactly on the f-posterior's Radon-Nikodym values.
    std::function<double(double)> v;

    std::vector<double> transformed;  // v(L) at the support points
};

RiskTransform risk_transform(const DivergenceSpec& f_spec, const DivergenceSpec& g_spec,
                             double lambda, const Measure& m, const BoundRisk& risk,
                             SolveOptions opts = {});

// Solves the f-problem on L and the g-problem on v(L); returns the
// sup-norm gap between the two posteriors over the support. The two
// optimal objective values are not compared: they differ by
// construction, only the posteriors coincide.
double verify_equivalence(const DivergenceSpec& f_spec, const DivergenceSpec& g_spec,
                          double lambda, const Measure& m, const BoundRisk& risk,
                          SolveOptions opts = {});

}  // namespace fdr
