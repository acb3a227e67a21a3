#include "fdr/equivalence.hpp"

#include <algorithm>
#include <cmath>

#include "fdr/errors.hpp"

namespace fdr {

RiskTransform risk_transform(const DivergenceSpec& f_spec, const DivergenceSpec& g_spec,
                             double lambda, const Measure& m, const BoundRisk& risk,
                             SolveOptions opts) {
    RiskTransform rt;
    rt.f_spec = f_spec;
    rt.g_spec = g_spec;
    rt.lambda = lambda;
    rt.n_f = solve_beta(f_spec, m, risk, lambda, opts);

    const DivergenceSpec f = f_spec;
    const DivergenceSpec g = g_spec;
    const double n_f = rt.n_f;
    rt.v = [f, g, lambda, n_f](double t) {
        return -lambda * g.fdot(f.fdot_inv(-(n_f + t) / lambda));
    };

    rt.transformed.reserve(risk.at_support.size());
    for (double L : risk.at_support) {
        const double vt = rt.v(L);
        if (!std::isfinite(vt))
            throw ConfigError("risk transform produced a non-finite value at L = " +
                              std::to_string(L));
        rt.transformed.push_back(vt);
    }
    return rt;
}

double verify_equivalence(const DivergenceSpec& f_spec, const DivergenceSpec& g_spec,
                          double lambda, const Measure& m, const BoundRisk& risk,
                          SolveOptions opts) {
    const RiskTransform rt = risk_transform(f_spec, g_spec, lambda, m, risk, opts);

    // The f-posterior, directly from the multiplier the transform already
    // solved for.
    std::vector<double> rn_f(risk.at_support.size());
    for (std::size_t i = 0; i < rn_f.size(); ++i)
        rn_f[i] = f_spec.fdot_inv(-(rt.n_f + risk.at_support[i]) / lambda);

    const BoundRisk tr = bind_risk(RiskSpec::transformed(rt.transformed), m);
    const Posterior pg = posterior(g_spec, m, tr, lambda, opts);

    double gap = 0.0;
    for (std::size_t i = 0; i < rn_f.size(); ++i)
        gap = std::max(gap, std::fabs(rn_f[i] - pg.rn[i]));
    return gap;
}

}  // namespace fdr
