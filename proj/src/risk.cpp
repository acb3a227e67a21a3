#include "fdr/risk.hpp"

#include <algorithm>
#include <cmath>

#include "fdr/divergence.hpp"
#include "fdr/errors.hpp"

namespace fdr {

double empirical_risk(const std::vector<double>& theta, const Dataset& data,
                      const std::string& loss, const std::string& predictor) {
    if (data.pairs.empty()) throw ConfigError("empirical_risk: empty dataset");
    if (loss != "squared") throw ConfigError("empirical_risk: unknown loss '" + loss + "'");
    if (predictor != "linear")
        throw ConfigError("empirical_risk: unknown predictor '" + predictor + "'");

    double acc = 0.0;
    for (const auto& [x, y] : data.pairs) {
        if (x.size() != theta.size())
            throw ConfigError("empirical_risk: feature and model dimensions differ");
        double h = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) h += x[k] * theta[k];
        const double r = h - y;
        acc += r * r;
    }
    return acc / (double)data.pairs.size();
}

RiskSpec RiskSpec::tabulated(std::vector<double> values) {
    for (double v : values)
        if (!(v >= 0.0)) throw ConfigError("risk: tabulated values must be nonnegative");
    RiskSpec r;
    r.kind_ = Kind::tabulated;
    r.values_ = std::move(values);
    return r;
}

RiskSpec RiskSpec::from_dataset(Dataset data, std::string loss, std::string predictor) {
    if (data.pairs.empty()) throw ConfigError("risk: empty dataset");
    RiskSpec r;
    r.kind_ = Kind::dataset;
    r.data_ = std::move(data);
    r.loss_ = std::move(loss);
    r.predictor_ = std::move(predictor);
    return r;
}

RiskSpec RiskSpec::transformed(std::vector<double> values) {
    RiskSpec r;
    r.kind_ = Kind::transformed;
    r.values_ = std::move(values);
    return r;
}

namespace {

// 1-D dataset risk under squared loss is the quadratic
// a t^2 - 2 b t + c with the moments below; its window extrema are
// analytic, which the binder uses for exact bounds and for locating
// the minimizer (the singular-point candidate of reverse-KL-type
// integrands).
struct Quadratic {
    double a, b, c;
    double at(double t) const { return (a * t - 2.0 * b) * t + c; }
};

Quadratic dataset_moments(const Dataset& data) {
    double a = 0.0, b = 0.0, c = 0.0;
    for (const auto& [x, y] : data.pairs) {
        if (x.size() != 1)
            throw ConfigError("risk: continuous supports take 1-D features only");
        a += x[0] * x[0];
        b += x[0] * y;
        c += y * y;
    }
    const double n = (double)data.pairs.size();
    return {a / n, b / n, c / n};
}

BoundRisk bind_values(const std::vector<double>& values, std::size_t n, bool allow_negative) {
    if (values.size() != n)
        throw ConfigError("risk: tabulated values must align with the support");
    BoundRisk b;
    b.at_support = values;
    b.allow_negative = allow_negative;
    b.lo = *std::min_element(values.begin(), values.end());
    b.hi = *std::max_element(values.begin(), values.end());
    for (double v : values)
        if (!std::isfinite(v)) throw ConfigError("risk: values must be finite");
    return b;
}

}  // namespace

BoundRisk bind_risk(const RiskSpec& risk, const Measure& m) {
    if (const auto* d = std::get_if<DiscreteMeasure>(&m)) {
        if (risk.kind() == RiskSpec::Kind::dataset) {
            BoundRisk b;
            b.at_support.reserve(d->size());
            for (const auto& atom : d->atoms())
                b.at_support.push_back(
                    empirical_risk(atom, risk.data(), risk.loss(), risk.predictor()));
            b.lo = *std::min_element(b.at_support.begin(), b.at_support.end());
            b.hi = *std::max_element(b.at_support.begin(), b.at_support.end());
            return b;
        }
        return bind_values(risk.values(), d->size(),
                           risk.kind() == RiskSpec::Kind::transformed);
    }

    const auto& q = std::get<QuadratureMeasure>(m);
    if (risk.kind() != RiskSpec::Kind::dataset)
        return bind_values(risk.values(), q.nodes().size(),
                           risk.kind() == RiskSpec::Kind::transformed);

    const Quadratic quad = dataset_moments(risk.data());

    BoundRisk b;
    b.fn1d = [quad](double t) { return quad.at(t); };
    b.at_support.reserve(q.nodes().size());
    for (double t : q.nodes()) b.at_support.push_back(quad.at(t));

    // Window extrema of the quadratic; the conceptual support may
    // extend past the truncation, making the supremum infinite.
    if (quad.a > 0.0) {
        const double t_min = quad.b / quad.a;
        const double t_hat = std::clamp(t_min, q.lo(), q.hi());
        b.lo = quad.at(t_hat);
        b.hi = std::max(quad.at(q.lo()), quad.at(q.hi()));
        if (q.unbounded_above()) b.hi = kInf;
        b.minimizers_1d = {t_hat};
        // a(t^2 - t_hat^2) - 2 a t_min (t - t_hat), factored so the
        // near-zero difference is a single exact subtraction.
        const double a = quad.a;
        b.shifted1d = [a, t_min, t_hat](double t) {
            return a * (t - t_hat) * (t + t_hat - 2.0 * t_min);
        };
    } else {
        // a == 0 forces every feature to 0, so the risk is constant.
        b.lo = b.hi = quad.c;
        b.shifted1d = [](double) { return 0.0; };
    }
    // Squared loss cannot go negative; clip the rounding of c - b^2/a.
    b.lo = std::max(b.lo, 0.0);
    return b;
}

double BoundRisk::mean(const Measure& m) const {
    if (const auto* d = std::get_if<DiscreteMeasure>(&m)) {
        double acc = 0.0;
        for (std::size_t i = 0; i < d->size(); ++i) acc += d->masses()[i] * at_support[i];
        return acc;
    }
    const auto& q = std::get<QuadratureMeasure>(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes().size(); ++i)
        acc += q.weights()[i] * q.density(q.nodes()[i]) * at_support[i];
    return acc * q.norm();
}

}  // namespace fdr
