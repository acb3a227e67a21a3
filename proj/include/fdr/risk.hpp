#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fdr/measure.hpp"

namespace fdr {

// Training pairs (x, y); x is a feature vector (scalar features are
// 1-vectors), y a real label.
struct Dataset {
    std::vector<std::pair<std::vector<double>, double>> pairs;
};

// (1/n) sum_i loss(h(theta, x_i), y_i). Supported ids: loss "squared",
// predictor "linear" with h(theta, x) = <x, theta>.
double empirical_risk(const std::vector<double>& theta, const Dataset& data,
                      const std::string& loss, const std::string& predictor);

// Risk description prior to binding against a measure. Raw risks
// (tabulated or dataset-derived) must be nonnegative; transformed risks
// produced by the equivalence module may take any real value.
class RiskSpec {
public:
    static RiskSpec tabulated(std::vector<double> values);
    static RiskSpec from_dataset(Dataset data, std::string loss, std::string predictor);
    // Signed tabulated values; nonnegativity deliberately not enforced.
    static RiskSpec transformed(std::vector<double> values);

    enum class Kind { tabulated, dataset, transformed };
    Kind kind() const { return kind_; }
    const std::vector<double>& values() const { return values_; }
    const Dataset& data() const { return data_; }
    const std::string& loss() const { return loss_; }
    const std::string& predictor() const { return predictor_; }

private:
    RiskSpec() = default;
    Kind kind_ = Kind::tabulated;
    std::vector<double> values_;
    Dataset data_;
    std::string loss_, predictor_;
};

// Risk evaluated against a concrete measure: values aligned with the
// support, extended-real bounds over the (conceptual, untruncated)
// support, and - for 1-D continuous measures - an everywhere-evaluable
// risk function plus candidate minimizer locations, which feed the
// quadrature's singularity handling.
struct BoundRisk {
    std::vector<double> at_support;
    double lo = 0.0;
    double hi = 0.0;  // +inf for unbounded continuous supports
    bool allow_negative = false;

    std::function<double(double)> fn1d;     // null for discrete/tabulated
    std::vector<double> minimizers_1d;      // empty when unknown

    // theta -> L(theta) - lo in a factored form that stays accurate
    // near the minimizer, where the plain difference cancels to
    // rounding noise. Boundary integrands divide by this quantity at
    // scales ~1e-18, so the naive form is unusable there.
    std::function<double(double)> shifted1d;

    double mean(const Measure& m) const;    // integral of L against Q
};

BoundRisk bind_risk(const RiskSpec& risk, const Measure& m);

}  // namespace fdr
