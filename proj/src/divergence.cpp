#include "fdr/divergence.hpp"

#include <cmath>
#include <map>

#include "fdr/errors.hpp"

namespace fdr {

namespace {

constexpr double kLog2 = 0.6931471805599453094;

double halley_w(double w, double x) {
    // Halley steps on h(w) = w e^w - x. Quadratic-plus convergence from
    // any reasonable seed; 50 iterations is far beyond what is needed.
    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double h = w * ew - x;
        if (std::abs(h) <= 1e-13 * std::max(x, 1e-300)) break;
        const double dh = ew * (w + 1.0);
        const double step = h / (dh - h * (w + 2.0) / (2.0 * (w + 1.0)));
        w -= step;
        if (std::abs(step) <= 1e-16 * std::max(std::abs(w), 1.0)) break;
    }
    return w;
}

}  // namespace

double lambert_w0(double x) {
    if (std::isnan(x) || x < 0.0)
        throw ConfigError("lambert_w0: argument must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return kInf;

    double w;
    if (x > 2.718281828459045) {
        const double lx = std::log(x);
        w = lx - std::log(lx);
    } else {
        w = x / (1.0 + x);  // small-argument seed, exact slope at 0
    }
    return halley_w(w, x);
}

double lambert_w0_of_exp(double z) {
    if (std::isnan(z)) throw ConfigError("lambert_w0_of_exp: NaN argument");
    if (z < 500.0) return lambert_w0(std::exp(z));
    // Solve w + log w = z by Newton; exp(z) would overflow long before
    // this branch is wrong.
    double w = z - std::log(z);
    for (int it = 0; it < 50; ++it) {
        const double h = w + std::log(w) - z;
        if (std::abs(h) <= 1e-13 * std::max(std::abs(z), 1.0)) break;
        w -= h * w / (w + 1.0);
    }
    return w;
}

namespace {

DivergenceSpec make_kl() {
    DivergenceSpec s;
    s.name = "kl";
    s.f = [](double x) { return x * std::log(x); };
    s.fdot = [](double x) { return 1.0 + std::log(x); };
    s.fdot_inv = [](double y) { return std::exp(y - 1.0); };
    s.f_at_zero = 0.0;
    s.fdot_inv_nonneg = true;
    return s;
}

DivergenceSpec make_reverse_kl() {
    DivergenceSpec s;
    s.name = "reverse_kl";
    s.f = [](double x) { return -std::log(x); };
    s.fdot = [](double x) { return -1.0 / x; };
    s.fdot_inv = [](double y) { return -1.0 / y; };
    s.f_at_zero = kInf;
    s.y_hi = 0.0;
    s.y_pos_hi = 0.0;
    s.fdot_inv_nonneg = false;
    return s;
}

DivergenceSpec make_jeffrey() {
    DivergenceSpec s;
    s.name = "jeffrey";
    s.f = [](double x) { return (x - 1.0) * std::log(x); };
    s.fdot = [](double x) { return std::log(x) + 1.0 - 1.0 / x; };
    // Inversion of log x + 1 - 1/x = y: substitute x = 1/w and the
    // equation becomes w e^w = e^{1-y}, hence x = 1/W0(exp(1-y)).
    s.fdot_inv = [](double y) { return 1.0 / lambert_w0_of_exp(1.0 - y); };
    s.f_at_zero = kInf;
    s.fdot_inv_nonneg = true;
    return s;
}

DivergenceSpec make_hellinger() {
    DivergenceSpec s;
    s.name = "hellinger";
    s.f = [](double x) {
        const double r = 1.0 - std::sqrt(x);
        return r * r;
    };
    s.fdot = [](double x) { return 1.0 - 1.0 / std::sqrt(x); };
    s.fdot_inv = [](double y) {
        const double r = 1.0 - y;
        return 1.0 / (r * r);
    };
    s.f_at_zero = 1.0;
    s.y_hi = 1.0;
    s.y_pos_hi = 1.0;
    s.fdot_inv_nonneg = true;
    return s;
}

DivergenceSpec make_jensen_shannon() {
    DivergenceSpec s;
    s.name = "jensen_shannon";
    s.f = [](double x) {
        // x log(2x/(x+1)) + log(2/(x+1)), grouped around log1p for
        // accuracy near x = 1.
        const double l1p = std::log1p(x);
        return x * (kLog2 + std::log(x) - l1p) + kLog2 - l1p;
    };
    s.fdot = [](double x) { return kLog2 + std::log(x) - std::log1p(x); };
    s.fdot_inv = [](double y) {
        // e^y / (2 - e^y); the denominator is -2 expm1(y - log 2),
        // which stays accurate as y approaches log 2.
        return std::exp(y) / (-2.0 * std::expm1(y - kLog2));
    };
    s.f_at_zero = kLog2;
    s.y_hi = kLog2;
    s.y_pos_hi = kLog2;
    s.fdot_inv_nonneg = false;
    return s;
}

DivergenceSpec make_chi2() {
    DivergenceSpec s;
    s.name = "chi2";
    s.f = [](double x) {
        const double r = x - 1.0;
        return r * r;
    };
    s.fdot = [](double x) { return 2.0 * (x - 1.0); };
    s.fdot_inv = [](double y) { return 0.5 * y + 1.0; };
    s.f_at_zero = 1.0;
    // fdot_inv is an entire function; positivity stops at y = -2.
    s.y_pos_lo = -2.0;
    s.fdot_inv_nonneg = false;
    return s;
}

const std::map<std::string, DivergenceSpec>& builtin_table() {
    static const std::map<std::string, DivergenceSpec> table = {
        {"kl", make_kl()},
        {"reverse_kl", make_reverse_kl()},
        {"jeffrey", make_jeffrey()},
        {"hellinger", make_hellinger()},
        {"jensen_shannon", make_jensen_shannon()},
        {"chi2", make_chi2()},
    };
    return table;
}

}  // namespace

const DivergenceSpec& builtin(const std::string& name) {
    const auto& table = builtin_table();
    auto it = table.find(name);
    if (it == table.end())
        throw ConfigError("unknown divergence '" + name +
                          "' (expected one of kl, reverse_kl, jeffrey, hellinger, "
                          "jensen_shannon, chi2)");
    return it->second;
}

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names = {
        "kl", "reverse_kl", "jeffrey", "hellinger", "jensen_shannon", "chi2"};
    return names;
}

double f_divergence(const std::vector<double>& p,
                    const std::vector<double>& q,
                    const DivergenceSpec& spec) {
    if (p.size() != q.size())
        throw ConfigError("f_divergence: mass vectors differ in length");
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(q[i] > 0.0))
            throw ConfigError("f_divergence: reference mass must be strictly positive");
        if (p[i] < 0.0)
            throw ConfigError("f_divergence: negative mass in p");
        sp += p[i];
        sq += q[i];
    }
    if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
        throw ConfigError("f_divergence: mass vectors must sum to 1 within 1e-9");

    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) {
            if (spec.f_at_zero == kInf) return kInf;
            acc += q[i] * spec.f_at_zero;
        } else {
            acc += q[i] * spec.f(p[i] / q[i]);
        }
    }
    return acc;
}

}  // namespace fdr
