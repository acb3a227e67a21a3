#include "fdr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fdr/errors.hpp"
#include "fdr/solver.hpp"

namespace fdr {

namespace {

// Keeps every iterate strictly interior so fdot stays finite. The
// multiplicative update cannot resurrect an exact zero, and fdot at a
// ratio of 0 is -inf for most builtins.
constexpr double kMassFloor = 1e-300;

}  // namespace

OracleResult simplex_minimize(const DiscreteMeasure& q, const BoundRisk& risk, double lambda,
                              const DivergenceSpec& spec, long max_iters, double tol) {
    const std::size_t n = q.size();
    if (risk.at_support.size() != n)
        throw ConfigError("oracle: risk table does not match the reference measure");
    if (!(lambda > 0.0)) throw ConfigError("oracle: lambda must be positive");

    OracleResult res;
    std::vector<double> p = q.masses();
    double obj = objective(spec, q, risk, lambda, p);

    std::vector<double> grad(n), cand(n);
    int flat = 0;
    double eta = 0.0;
    long it = 0;
    for (; it < max_iters; ++it) {
        double gmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = risk.at_support[i] + lambda * spec.fdot(p[i] / q.masses()[i]);
            gmin = std::min(gmin, grad[i]);
        }

        eta = 0.5 / (1.0 + std::sqrt(static_cast<double>(it)));
        double cobj;
        int halved = 0;
        for (;;) {
            // Shift by gmin so the exponent is <= 0: no overflow, and
            // the argmin coordinate keeps factor 1 so the sum stays
            // positive.
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cand[i] = std::max(p[i] * std::exp(-eta * (grad[i] - gmin)), kMassFloor);
                sum += cand[i];
            }
            for (std::size_t i = 0; i < n; ++i) cand[i] /= sum;
            cobj = objective(spec, q, risk, lambda, cand);
            if (cobj <= obj || ++halved > 30) break;
            eta *= 0.5;
        }

        if (cobj <= obj) {
            const double dec = obj - cobj;
            p.swap(cand);
            obj = cobj;
            flat = (dec < tol) ? flat + 1 : 0;
        } else {
            // Even the halved steps go uphill: treat as a flat
            // iteration rather than accept an objective increase.
            ++flat;
        }
        if (flat >= 10) {
            ++it;
            res.converged = true;
            break;
        }
    }

    res.masses = std::move(p);
    res.objective = obj;
    res.iterations = it;
    res.final_step = eta;
    return res;
}

CertifyReport certify(const DivergenceSpec& spec, const DiscreteMeasure& q, const BoundRisk& risk,
                      double lambda, const std::vector<double>& posterior_masses,
                      const OracleResult& oracle, double tol) {
    if (posterior_masses.size() != q.size() || oracle.masses.size() != q.size())
        throw ConfigError("certify: mass vector length does not match the reference measure");

    CertifyReport rep;
    for (std::size_t i = 0; i < q.size(); ++i)
        rep.mass_gap = std::max(rep.mass_gap, std::abs(posterior_masses[i] - oracle.masses[i]));
    rep.objective_gap = objective(spec, q, risk, lambda, posterior_masses) - oracle.objective;
    rep.pass = rep.objective_gap <= tol && rep.mass_gap <= 10.0 * std::sqrt(tol);
    return rep;
}

}  // namespace fdr
