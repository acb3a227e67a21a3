#include "fdr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdr/errors.hpp"

namespace fdr {

namespace {

constexpr double kDivergeAt = 1e9;

// Pointwise Radon-Nikodym candidate. Exactly at a finite y_hi the
// analytic limit is +inf (fdot_inv is the inverse of a derivative whose
// range ends there); rounding can also push a boundary probe a few ulp
// past it, which must read as the same limit, not as garbage from the
// raw formula (reverse_kl would give -1/+0 = -inf).
double rn_value(const DivergenceSpec& spec, double u) {
    if (spec.y_hi < kInf && u >= spec.y_hi) return kInf;
    const double v = spec.fdot_inv(u);
    if (std::isnan(v)) throw ConfigError("fdot_inv returned NaN at u = " + std::to_string(u));
    return v;
}

// Probing far past the feasible boundary is a caller error; probing the
// boundary itself (or a few ulp beyond, from forming t = -Lmin - lambda
// y_hi in floating point) is sanctioned and handled pointwise above.
void check_in_y_range(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                      double t, double lambda) {
    if (spec.y_hi == kInf) return;
    const double u_top = -(t + risk.lo) / lambda;
    const double slack = 4e-13 * std::max({1.0, std::fabs(spec.y_hi), std::fabs(u_top)});
    if (u_top > spec.y_hi + slack) {
        double where = risk.lo;  // report the minimizing point when we know it
        if (const auto* d = std::get_if<DiscreteMeasure>(&m)) {
            const auto it = std::min_element(risk.at_support.begin(), risk.at_support.end());
            where = d->atoms()[(std::size_t)(it - risk.at_support.begin())].front();
        } else if (!risk.minimizers_1d.empty()) {
            where = risk.minimizers_1d.front();
        }
        std::ostringstream os;
        os << "argument -(t + L)/lambda = " << u_top << " exceeds the derivative range (y_hi = "
           << spec.y_hi << ") at the risk minimizer near theta = " << where;
        throw InfeasiblePoint(os.str(), where, u_top);
    }
}

IntegrationResult sum_discrete(const DiscreteMeasure& d, const std::vector<double>& terms) {
    IntegrationResult r;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (terms[i] == kInf) {
            r.value = kInf;
            r.diverged = true;
            return r;
        }
        r.value += d.masses()[i] * terms[i];
    }
    return r;
}

IntegrationResult sum_fixed_rule(const QuadratureMeasure& q, const std::vector<double>& terms) {
    IntegrationResult r;
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes().size(); ++i) {
        if (terms[i] == kInf) {
            r.value = kInf;
            r.diverged = true;
            return r;
        }
        acc += q.weights()[i] * q.density(q.nodes()[i]) * terms[i];
    }
    r.value = acc * q.norm();
    r.error_estimate = 1e-12 * (1.0 + std::fabs(r.value));
    return r;
}

// L(theta) - risk.lo, evaluable anywhere; prefers the cancellation-free
// factored form when the binder provided one.
double shifted_risk(const BoundRisk& risk, double theta) {
    if (risk.shifted1d) return risk.shifted1d(theta);
    return risk.fn1d(theta) - risk.lo;
}

IntegrationResult k_integral(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                             double t, double lambda) {
    check_in_y_range(spec, m, risk, t, lambda);

    if (const auto* d = std::get_if<DiscreteMeasure>(&m)) {
        std::vector<double> terms(d->size());
        for (std::size_t i = 0; i < d->size(); ++i)
            terms[i] = rn_value(spec, -(t + risk.at_support[i]) / lambda);
        return sum_discrete(*d, terms);
    }

    const auto& q = std::get<QuadratureMeasure>(m);
    if (risk.fn1d) {
        // Route through s = L - Lmin so boundary probes keep precision
        // where the integrand is largest.
        const double tp = t + risk.lo;
        IntegrationOptions opts;
        opts.singular_points = risk.minimizers_1d;
        return integrate(
            q, [&](double th) { return rn_value(spec, -(tp + shifted_risk(risk, th)) / lambda); },
            opts);
    }

    // Tabulated risk is only known at the stored nodes.
    std::vector<double> terms(q.nodes().size());
    for (std::size_t i = 0; i < q.nodes().size(); ++i)
        terms[i] = rn_value(spec, -(t + risk.at_support[i]) / lambda);
    return sum_fixed_rule(q, terms);
}

double k_value(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk, double t,
               double lambda) {
    const IntegrationResult r = k_integral(spec, m, risk, t, lambda);
    if (r.diverged) return kInf;
    if (r.inconclusive)
        throw Inconclusive("constraint integral reached no verdict at t = " + std::to_string(t));
    return r.value;
}

// k at the binding endpoint of the feasible interval, evaluated in the
// shifted variables where the endpoint is exact: s = L - Lmin is an
// exact 0 at the minimizer, so the argument lands on y_pos_hi itself
// instead of a rounded neighbourhood of it. eps > 0 gives the ladder
// probes k(t* + eps). `upper` flips to the chi2-type endpoint, driven
// by r = Lmax - L.
IntegrationResult boundary_integral(const DivergenceSpec& spec, const Measure& m,
                                    const BoundRisk& risk, double lambda, double eps, bool upper) {
    const auto arg = [&](double s) {
        return upper ? spec.y_pos_lo + (s + eps) / lambda : spec.y_pos_hi - (s + eps) / lambda;
    };
    const auto shifted_at = [&](std::size_t i) {
        return upper ? risk.hi - risk.at_support[i] : risk.at_support[i] - risk.lo;
    };

    if (const auto* d = std::get_if<DiscreteMeasure>(&m)) {
        std::vector<double> terms(d->size());
        for (std::size_t i = 0; i < d->size(); ++i) terms[i] = rn_value(spec, arg(shifted_at(i)));
        return sum_discrete(*d, terms);
    }

    const auto& q = std::get<QuadratureMeasure>(m);
    if (risk.fn1d) {
        IntegrationOptions opts;
        if (!upper) opts.singular_points = risk.minimizers_1d;
        const auto s_of = [&](double th) {
            return upper ? risk.hi - risk.fn1d(th) : shifted_risk(risk, th);
        };
        return integrate(q, [&](double th) { return rn_value(spec, arg(s_of(th))); }, opts);
    }

    std::vector<double> terms(q.nodes().size());
    for (std::size_t i = 0; i < q.nodes().size(); ++i) terms[i] = rn_value(spec, arg(shifted_at(i)));
    return sum_fixed_rule(q, terms);
}

}  // namespace

BetaInterval feasible_beta_interval(const DivergenceSpec& spec, const BoundRisk& risk,
                                    double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    BetaInterval b;
    if (spec.y_pos_hi < kInf) b.lo = -risk.lo - lambda * spec.y_pos_hi;
    if (spec.y_pos_lo > -kInf) b.hi = -risk.hi - lambda * spec.y_pos_lo;
    return b;
}

double constraint_integral(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                           double t, double lambda) {
    return k_value(spec, m, risk, t, lambda);
}

IntegrationResult constraint_integral_detailed(const DivergenceSpec& spec, const Measure& m,
                                               const BoundRisk& risk, double t, double lambda) {
    return k_integral(spec, m, risk, t, lambda);
}

double default_tol(const Measure& m) {
    return std::holds_alternative<DiscreteMeasure>(m) ? 1e-10 : 1e-6;
}

double solve_beta(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                  double lambda, SolveOptions opts) {
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    const double tol = opts.tol > 0.0 ? opts.tol : default_tol(m);

    const BetaInterval box = feasible_beta_interval(spec, risk, lambda);
    if (box.empty())
        throw NoFeasibleBeta("the feasible multiplier interval is empty (B = {})", true);

    // Constant risk (a single support point included): the constraint
    // forces rn = 1 pointwise, so beta is available in closed form.
    if (risk.lo == risk.hi) return -risk.lo - lambda * spec.fdot(1.0);

    const auto k_of = [&](double t) { return k_value(spec, m, risk, t, lambda); };

    double t = -risk.mean(m) - lambda * spec.fdot(1.0);
    if (box.lo > -kInf && box.hi < kInf) {
        if (!(t > box.lo && t < box.hi)) t = 0.5 * (box.lo + box.hi);
    } else if (box.lo > -kInf) {
        if (!(t > box.lo)) t = box.lo + 1.0;
    } else if (box.hi < kInf) {
        if (!(t < box.hi)) t = box.hi - 1.0;
    }

    double kt = k_of(t);
    int n_probes = 1, n_inf = (kt == kInf);
    if (kt != kInf && std::fabs(kt - 1.0) <= tol) return t;

    // k is strictly decreasing, so the side of the root never flips
    // while marching: grow geometrically toward an infinite endpoint,
    // quarter the gap toward a finite one.
    double a = 0.0, b = 0.0;
    bool bracketed = false;
    double step = 1.0;
    for (int i = 0; i < 300 && !bracketed; ++i) {
        const bool right = kt > 1.0;  // +inf counts as above 1
        double nxt;
        if (right)
            nxt = (box.hi == kInf) ? t + step : box.hi - (box.hi - t) * 0.25;
        else
            nxt = (box.lo == -kInf) ? t - step : box.lo + (t - box.lo) * 0.25;
        step *= 4.0;

        if (!(nxt > box.lo) || !(nxt < box.hi) || nxt == t) break;  // endpoint exhausted

        const double kn = k_of(nxt);
        ++n_probes;
        if (kn == kInf) ++n_inf;
        if (kn != kInf && std::fabs(kn - 1.0) <= tol) return nxt;

        if ((kn > 1.0) != (kt > 1.0)) {
            a = std::min(t, nxt);
            b = std::max(t, nxt);
            bracketed = true;
        } else {
            t = nxt;
            kt = kn;
        }
    }

    if (!bracketed) {
        if (n_inf == n_probes)
            throw DivergentIntegral("every probe of the constraint integral diverged");
        std::ostringstream os;
        os << "no multiplier meets the normalization constraint at lambda = " << lambda
           << ": k stays " << (kt > 1.0 ? "above" : "below") << " 1 on the feasible interval";
        throw NoFeasibleBeta(os.str(), false);
    }

    for (int it = 0; it < opts.max_bisections; ++it) {
        const double mid = 0.5 * (a + b);
        if (!(mid > a && mid < b)) break;
        const double km = k_of(mid);
        if (km != kInf && std::fabs(km - 1.0) <= tol) return mid;
        if (km > 1.0)
            a = mid;
        else
            b = mid;
    }
    throw NonConvergence("bisection exhausted its budget before |k - 1| <= tol");
}

double normalization_function(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                              double lambda, SolveOptions opts) {
    return solve_beta(spec, m, risk, lambda, opts);
}

Posterior posterior(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                    double lambda, SolveOptions opts) {
    Posterior p{spec, lambda, solve_beta(spec, m, risk, lambda, opts), {}, m};
    p.rn.reserve(risk.at_support.size());
    for (double L : risk.at_support) p.rn.push_back(spec.fdot_inv(-(p.beta + L) / lambda));
    return p;
}

double objective(const DivergenceSpec& spec, const DiscreteMeasure& q, const BoundRisk& risk,
                 double lambda, const std::vector<double>& masses) {
    if (masses.size() != q.size()) throw ConfigError("objective: mass vector length mismatch");
    double er = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) er += masses[i] * risk.at_support[i];
    return er + lambda * f_divergence(masses, q.masses(), spec);
}

double objective(const Posterior& post, const BoundRisk& risk) {
    if (const auto* d = std::get_if<DiscreteMeasure>(&post.measure)) {
        std::vector<double> masses(d->size());
        for (std::size_t i = 0; i < d->size(); ++i) masses[i] = post.rn[i] * d->masses()[i];
        return objective(post.spec, *d, risk, post.lambda, masses);
    }
    const auto& q = std::get<QuadratureMeasure>(post.measure);
    double er = 0.0, div = 0.0;
    for (std::size_t i = 0; i < q.nodes().size(); ++i) {
        const double w = q.weights()[i] * q.density(q.nodes()[i]);
        er += w * post.rn[i] * risk.at_support[i];
        div += w * post.spec.f(post.rn[i]);
    }
    return (er + post.lambda * div) * q.norm();
}

double stationarity_residual(const Posterior& post, const BoundRisk& risk) {
    double worst = 0.0;
    for (std::size_t i = 0; i < post.rn.size(); ++i) {
        const double r =
            std::fabs(risk.at_support[i] + post.beta + post.lambda * post.spec.fdot(post.rn[i]));
        worst = std::max(worst, r);
    }
    return worst;
}

namespace {

// m(lambda) = k at the binding endpoint, as a function of lambda.
// Strictly increasing toward a lower binding endpoint, strictly
// decreasing toward an upper one; crosses 1 exactly at the edge of the
// admissible set. Whether it is finite at all does not depend on
// lambda, which is what makes a single lambda=1 probe decisive.
double boundary_value(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                      double lambda, bool upper) {
    const IntegrationResult r = boundary_integral(spec, m, risk, lambda, 0.0, upper);
    if (r.diverged) return kInf;
    if (r.inconclusive)
        throw Inconclusive("boundary integral reached no verdict at lambda = " +
                           std::to_string(lambda));
    return r.value;
}

// Root of m(lambda) = 1 by bracketing from lambda = 1 and bisecting.
// `increasing` states the monotonicity of m.
double solve_lambda_edge(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                         bool upper, bool increasing, double tol) {
    const auto m_of = [&](double l) { return boundary_value(spec, m, risk, l, upper); };

    double lo = 1.0, hi = 1.0;
    double v = m_of(1.0);
    if (v != kInf && std::fabs(v - 1.0) <= tol) return 1.0;

    const bool go_down = increasing ? (v > 1.0) : (v < 1.0);
    if (go_down) {
        for (int i = 0; i < 200; ++i) {
            lo *= 0.5;
            const double w = m_of(lo);
            if (w != kInf && std::fabs(w - 1.0) <= tol) return lo;
            if ((w > 1.0) != (v > 1.0)) break;
            hi = lo;
            if (i == 199) throw NonConvergence("no bracket for the admissible-lambda edge");
        }
    } else {
        for (int i = 0; i < 200; ++i) {
            hi *= 2.0;
            const double w = m_of(hi);
            if (w != kInf && std::fabs(w - 1.0) <= tol) return hi;
            if ((w > 1.0) != (v > 1.0)) break;
            lo = hi;
            if (i == 199) throw NonConvergence("no bracket for the admissible-lambda edge");
        }
    }
    if (lo > hi) std::swap(lo, hi);

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double w = m_of(mid);
        if (w != kInf && std::fabs(w - 1.0) <= tol) return mid;
        const bool above = (w == kInf) || w > 1.0;
        if (above == increasing)
            hi = mid;
        else
            lo = mid;
    }
    throw NonConvergence("admissible-lambda bisection exhausted its budget");
}

}  // namespace

BoundaryReport classify_boundary(const DivergenceSpec& spec, const Measure& m,
                                 const BoundRisk& risk, double tol) {
    if (tol <= 0.0) tol = default_tol(m);
    BoundaryReport rep;

    // Nonnegative fdot_inv: positivity never binds, every lambda works.
    if (spec.fdot_inv_nonneg) {
        rep.boundary = Boundary::all_reals;
        rep.t_star = -kInf;
        rep.orientation = "none";
        rep.admissible = LambdaInterval{0.0, false};
        return rep;
    }

    const bool upper = !(spec.y_pos_hi < kInf);
    const BetaInterval box1 = feasible_beta_interval(spec, risk, 1.0);
    if (box1.empty()) {
        rep.boundary = Boundary::empty;
        rep.t_star = kInf;  // inf of the empty set
        rep.orientation = upper ? "upper" : "lower";
        rep.binding_t = upper ? box1.hi : box1.lo;
        return rep;
    }

    if (upper) {
        // chi2-type: positivity caps t from above and the integrand at
        // the cap is bounded, so the endpoint value is always finite
        // and the admissible set is open: lambda* is an infimum only.
        rep.orientation = "upper";
        rep.t_star = -kInf;
        rep.binding_t = box1.hi + 0.0;
        const IntegrationResult ex = boundary_integral(spec, m, risk, 1.0, 0.0, true);
        rep.boundary_limit = ex.diverged ? kInf : ex.value;
        rep.refinement_sums = ex.level_sums;
        rep.boundary = Boundary::open_left;
        // The endpoint value decreases through 1 at the edge of the
        // admissible set; it sits at 0 for every lambda only when the
        // risk is constant, in which case nothing binds.
        double edge = 0.0;
        if (rep.boundary_limit == kInf)
            throw Inconclusive("endpoint integral diverges for every lambda");
        if (rep.boundary_limit == 1.0)
            edge = 1.0;
        else if (rep.boundary_limit > 0.0)
            edge = solve_lambda_edge(spec, m, risk, true, false, tol);
        rep.admissible = LambdaInterval{edge, false};
        return rep;
    }

    rep.orientation = "lower";
    rep.t_star = box1.lo + 0.0;  // +0.0 canonicalizes a -0 endpoint
    rep.binding_t = rep.t_star;

    // Ladder of finite offsets first, then the limit itself; the exact
    // evaluation decides whenever it reaches a verdict, the ladder
    // covers the rest.
    bool ladder_open = false, ladder_closed = false;
    for (double eps = 1e-2; eps >= 0.99e-8; eps *= 0.1) {
        const IntegrationResult p = boundary_integral(spec, m, risk, 1.0, eps, false);
        rep.probe_values.push_back(p.diverged ? kInf : p.value);
        const double last = rep.probe_values.back();
        if (last == kInf || last > kDivergeAt) {
            ladder_open = true;
            break;
        }
        const std::size_t n = rep.probe_values.size();
        if (n >= 2) {
            const double prev = rep.probe_values[n - 2];
            if (std::fabs(last - prev) < 1e-4 * std::max(std::fabs(last), 1e-300))
                ladder_closed = true;
        }
    }

    const IntegrationResult ex = boundary_integral(spec, m, risk, 1.0, 0.0, false);
    rep.refinement_sums = ex.level_sums;

    bool closed;
    if (ex.diverged)
        closed = false;
    else if (!ex.inconclusive)
        closed = true;
    else if (ladder_open || ladder_closed)
        closed = ladder_closed && !ladder_open;
    else {
        std::ostringstream os;
        os << "boundary classification inconclusive: " << rep.probe_values.size()
           << " offset probes neither settled nor crossed " << kDivergeAt
           << ", and the refinement budget at t* = " << rep.t_star << " ran out (last sum "
           << (rep.refinement_sums.empty() ? 0.0 : rep.refinement_sums.back()) << ")";
        throw Inconclusive(os.str());
    }

    if (closed) {
        rep.boundary = Boundary::closed_left;
        rep.boundary_limit = ex.diverged ? kInf : ex.value;
        rep.lambda_star = solve_lambda_edge(spec, m, risk, false, true, tol);
        rep.admissible = LambdaInterval{*rep.lambda_star, true};
    } else {
        rep.boundary = Boundary::open_left;
        rep.boundary_limit = kInf;
        rep.admissible = LambdaInterval{0.0, false};
    }
    return rep;
}

double min_regularization(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                          double tol) {
    const BoundaryReport rep = classify_boundary(spec, m, risk, tol);
    if (rep.boundary != Boundary::closed_left || !rep.lambda_star) {
        const char* what = rep.boundary == Boundary::open_left ? "open_left"
                           : rep.boundary == Boundary::all_reals
                               ? "all_reals"
                               : rep.boundary == Boundary::empty ? "empty" : "closed_left";
        throw ConfigError(std::string("min_regularization requires a closed-left feasible set; "
                                      "classification reported ") +
                          what);
    }
    return *rep.lambda_star;
}

}  // namespace fdr
