#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fdr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Principal branch of the Lambert W function on x >= 0.
// Halley iteration from an asymptotic initial guess; relative residual
// |w e^w - x| <= 1e-12 max(x, tiny). Throws ConfigError for x < 0.
double lambert_w0(double x);

// W0(exp(z)) without forming exp(z); stable for arbitrarily large z.
// Needed by Jeffrey's inverse derivative where exp(1-y) overflows.
double lambert_w0_of_exp(double z);

// A regularization generator: convex f on (0,inf) with f(1) = 0,
// together with its derivative, the inverse of the derivative, and the
// derivative's range. The closed-form posterior density is built from
// that inverse, so user-supplied specs must state y_range explicitly;
// nothing here inverts fdot numerically.
struct DivergenceSpec {
    std::string name;

    std::function<double(double)> f;         // (0,inf) -> R
    std::function<double(double)> fdot;      // strictly increasing
    std::function<double(double)> fdot_inv;  // y_range -> (0,inf)

    double f_at_zero = kInf;  // lim_{x->0+} f(x), extended real

    // Open range of fdot. Arguments of fdot_inv must stay inside.
    double y_lo = -kInf;
    double y_hi = kInf;

    // Sub-interval of (y_lo, y_hi) where fdot_inv is strictly positive.
    // Coincides with y_range except for chi2, whose inverse 1 + y/2 is
    // defined on all of R but positive only above -2.
    double y_pos_lo = -kInf;
    double y_pos_hi = kInf;

    // True when fdot_inv, extended to all reals by clamping below y_lo
    // to 0, is nonnegative everywhere. The boundary classifier uses
    // this to decide that every multiplier is feasible.
    bool fdot_inv_nonneg = false;

    bool in_y_range(double y) const { return y > y_lo && y < y_hi; }
};

// One of: kl, reverse_kl, jeffrey, hellinger, jensen_shannon, chi2.
// Unknown names throw ConfigError.
const DivergenceSpec& builtin(const std::string& name);

const std::vector<std::string>& builtin_names();

// sum_i q_i f(p_i/q_i) with f(0) taken as the analytic limit (may be
// +inf). Requires equal lengths, strictly positive q, and both vectors
// normalized within 1e-9.
double f_divergence(const std::vector<double>& p,
                    const std::vector<double>& q,
                    const DivergenceSpec& spec);

}  // namespace fdr
