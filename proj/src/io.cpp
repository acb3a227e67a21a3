#include "fdr/io.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include "json.hpp"

#include "fdr/errors.hpp"

namespace fdr {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("problem file: " + msg); }

DivergenceSpec parse_divergence(const json& j) {
    if (j.is_string()) return builtin(j.get<std::string>());
    if (j.is_object() && j.contains("builtin")) return builtin(j.at("builtin").get<std::string>());
    fail("divergence must be a builtin name or {\"builtin\": <name>}");
}

std::vector<double> number_array(const json& j, const char* what) {
    if (!j.is_array()) fail(std::string(what) + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) fail(std::string(what) + " must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Measure parse_measure(const json& j, int panels_override) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "discrete") {
        const json& ja = j.at("atoms");
        if (!ja.is_array()) fail("atoms must be an array");
        std::vector<std::vector<double>> atoms;
        atoms.reserve(ja.size());
        for (const auto& a : ja) {
            if (a.is_number())
                atoms.push_back({a.get<double>()});
            else
                atoms.push_back(number_array(a, "atom"));
        }
        return DiscreteMeasure(std::move(atoms), number_array(j.at("masses"), "masses"));
    }
    if (type == "density1d") {
        const std::string name = j.at("name").get<std::string>();
        int panels = j.value("panels", 64);
        if (panels_override > 0) panels = panels_override;
        if (panels < 1) fail("panels must be >= 1");
        if (name == "example1_gamma") {
            double lo = 0.0, hi = 25.0;
            if (j.contains("domain")) {
                const auto dom = number_array(j.at("domain"), "domain");
                if (dom.size() != 2) fail("domain must be [lo, hi]");
                lo = dom[0];
                hi = dom[1];
            }
            return QuadratureMeasure::example1_gamma(lo, hi, panels);
        }
        if (name == "uniform") {
            const auto dom = number_array(j.at("domain"), "domain");
            if (dom.size() != 2) fail("domain must be [lo, hi]");
            return QuadratureMeasure::uniform(dom[0], dom[1], panels);
        }
        fail("unknown density name: " + name);
    }
    fail("unknown measure type: " + type);
}

RiskSpec parse_risk(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "values") return RiskSpec::tabulated(number_array(j.at("values"), "values"));
    if (type == "dataset") {
        const json& jd = j.at("data");
        if (!jd.is_array() || jd.empty()) fail("data must be a nonempty array of [x, y] pairs");
        Dataset data;
        data.pairs.reserve(jd.size());
        for (const auto& row : jd) {
            if (!row.is_array() || row.size() != 2) fail("each data entry must be [x, y]");
            std::vector<double> x;
            if (row[0].is_number())
                x = {row[0].get<double>()};
            else
                x = number_array(row[0], "feature");
            data.pairs.emplace_back(std::move(x), row[1].get<double>());
        }
        return RiskSpec::from_dataset(std::move(data), j.at("loss").get<std::string>(),
                                      j.at("predictor").get<std::string>());
    }
    fail("unknown risk type: " + type);
}

LambdaGrid parse_grid(const json& j) {
    LambdaGrid g;
    g.start = j.at("start").get<double>();
    g.stop = j.at("stop").get<double>();
    g.count = j.at("count").get<int>();
    const std::string scale = j.value("scale", "linear");
    if (scale == "log")
        g.log_scale = true;
    else if (scale != "linear")
        fail("scale must be \"linear\" or \"log\"");
    if (!(g.start > 0.0)) fail("grid start must be positive");
    if (!(g.stop >= g.start)) fail("grid stop must be >= start");
    if (g.count < 1) fail("grid count must be >= 1");
    return g;
}

}  // namespace

std::vector<double> LambdaGrid::values() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
        out.push_back(start);
        return out;
    }
    if (log_scale) {
        const double la = std::log(start), lb = std::log(stop);
        for (int i = 0; i < count; ++i)
            out.push_back(std::exp(la + (lb - la) * i / (count - 1)));
    } else {
        for (int i = 0; i < count; ++i) out.push_back(start + (stop - start) * i / (count - 1));
    }
    // Endpoints exact regardless of rounding in the interpolation.
    out.front() = start;
    out.back() = stop;
    return out;
}

ProblemFile load_problem(const std::string& path, int panels_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open problem file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("problem file is not valid JSON: " + std::string(e.what()));
    }

    try {
        DivergenceSpec div = parse_divergence(j.at("divergence"));

        std::optional<double> lambda;
        std::optional<LambdaGrid> grid;
        if (j.contains("lambda")) {
            const json& jl = j.at("lambda");
            if (jl.is_number()) {
                lambda = jl.get<double>();
                if (!(*lambda > 0.0)) fail("lambda must be positive");
            } else if (jl.is_object()) {
                grid = parse_grid(jl);
            } else {
                fail("lambda must be a number or a grid object");
            }
        }

        Measure ref = parse_measure(j.at("reference"), panels_override);
        RiskSpec risk = parse_risk(j.at("risk"));

        std::optional<double> tol;
        if (j.contains("tol")) {
            tol = j.at("tol").get<double>();
            if (!(*tol > 0.0)) fail("tol must be positive");
        }

        return ProblemFile{std::move(div), lambda,          grid,
                           std::move(ref), std::move(risk), tol};
    } catch (const json::exception& e) {
        throw ConfigError("problem file: " + std::string(e.what()));
    }
}

}  // namespace fdr
