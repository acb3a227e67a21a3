#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fdr/divergence.hpp"
#include "fdr/measure.hpp"
#include "fdr/risk.hpp"

namespace fdr {

// Open interval of multipliers t for which fdot_inv(-(t+L(theta))/lambda)
// stays strictly positive over the whole support. Either endpoint may be
// infinite; lo >= hi encodes the empty set (chi2 with unbounded risk).
struct BetaInterval {
    double lo = -kInf;
    double hi = kInf;
    bool empty() const { return !(lo < hi); }
};

BetaInterval feasible_beta_interval(const DivergenceSpec& spec, const BoundRisk& risk,
                                    double lambda);

// k(t) = integral of fdot_inv(-(t + L)/lambda) dQ. Strictly decreasing in
// t on the feasible interval. +inf is an ordinary return value (the
// integral diverged at a boundary probe); an argument outside y_range at
// some support point raises InfeasiblePoint instead.
double constraint_integral(const DivergenceSpec& spec, const Measure& m,
                           const BoundRisk& risk, double t, double lambda);
IntegrationResult constraint_integral_detailed(const DivergenceSpec& spec, const Measure& m,
                                               const BoundRisk& risk, double t, double lambda);

// tol = 0 picks the measure-appropriate default.
struct SolveOptions {
    double tol = 0.0;
    int max_bisections = 200;
};

double default_tol(const Measure& m);

// Root of k(beta) = 1. Bracket by geometric growth from a seed (or
// geometric approach toward a finite endpoint), then bisect.
double solve_beta(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                  double lambda, SolveOptions opts = {});

// Same root, under the name it carries when viewed as a function of
// lambda: N(lambda) = beta. Continuous in lambda; the scale-adjusted value
// N(lambda)/lambda is strictly increasing whenever the risk is nonnegative
// and nonconstant, while the direction of N itself depends on the
// generator (up for reverse_kl, down for kl, constant -E_Q[L] for chi2).
double normalization_function(const DivergenceSpec& spec, const Measure& m,
                              const BoundRisk& risk, double lambda, SolveOptions opts = {});

struct Posterior {
    DivergenceSpec spec;
    double lambda = 0.0;
    double beta = 0.0;
    std::vector<double> rn;  // dP*/dQ at the atoms / quadrature nodes
    Measure measure;
};

Posterior posterior(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                    double lambda, SolveOptions opts = {});

// Expected risk under P plus lambda times the f-divergence to Q.
double objective(const DivergenceSpec& spec, const DiscreteMeasure& q, const BoundRisk& risk,
                 double lambda, const std::vector<double>& masses);
double objective(const Posterior& post, const BoundRisk& risk);

// Max over the support of |L + beta + lambda fdot(rn)|, the first-order
// optimality defect of a constructed posterior.
double stationarity_residual(const Posterior& post, const BoundRisk& risk);

enum class Boundary { closed_left, open_left, all_reals, empty };

// Admissible regularization factors; the upper endpoint is always +inf.
struct LambdaInterval {
    double lo = 0.0;
    bool lo_closed = false;
};

struct BoundaryReport {
    Boundary boundary = Boundary::all_reals;
    double t_star = -kInf;  // inf of the feasible set at the lambda=1 scaling
    std::optional<double> lambda_star;         // present iff closed_left
    std::optional<LambdaInterval> admissible;  // absent iff boundary == empty

    // Which endpoint of the feasible interval binds: "lower" for the
    // usual B subset of [t*, inf), "upper" when positivity caps t from
    // above (chi2), "none" when every real is feasible.
    std::string orientation = "lower";
    double binding_t = -kInf;     // the binding endpoint itself, lambda=1
    double boundary_limit = kInf; // k at that endpoint, lambda=1

    std::vector<double> probe_values;     // k(t* + eps) ladder, lambda=1
    std::vector<double> refinement_sums;  // partial sums of the exact boundary integral
};

// Decides whether the feasible set contains its infimum by probing k at
// t* and, from that, the shape of the admissible-lambda set.
BoundaryReport classify_boundary(const DivergenceSpec& spec, const Measure& m,
                                 const BoundRisk& risk, double tol = 0.0);

// lambda* = inf A for closed-left problems; errors otherwise.
double min_regularization(const DivergenceSpec& spec, const Measure& m, const BoundRisk& risk,
                          double tol = 0.0);

}  // namespace fdr
