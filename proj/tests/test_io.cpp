#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <variant>

#include "doctest.h"
#include "fdr/errors.hpp"
#include "fdr/io.hpp"

using namespace fdr;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& body) : path(name) {
        std::ofstream f(path);
        f << body;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("loading a discrete problem") {
    const TempFile f("tmp_io_discrete.json", R"({
        "divergence": "kl",
        "lambda": 0.75,
        "reference": {"type": "discrete", "atoms": [[0.0], [1.0]], "masses": [0.5, 0.5]},
        "risk": {"type": "values", "values": [0.0, 1.0]},
        "tol": 1e-9
    })");
    const auto pf = load_problem(f.path);
    CHECK(pf.divergence.name == "kl");
    REQUIRE(pf.lambda.has_value());
    CHECK(*pf.lambda == 0.75);
    CHECK_FALSE(pf.grid.has_value());
    REQUIRE(pf.tol.has_value());
    CHECK(*pf.tol == 1e-9);
    const auto& q = std::get<DiscreteMeasure>(pf.reference);
    CHECK(q.size() == 2);
    CHECK(pf.risk.values() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("inline divergence descriptor and scalar atoms") {
    const TempFile f("tmp_io_inline.json", R"({
        "divergence": {"builtin": "hellinger"},
        "reference": {"type": "discrete", "atoms": [0, 1, 2], "masses": [0.2, 0.3, 0.5]},
        "risk": {"type": "values", "values": [1, 2, 3]}
    })");
    const auto pf = load_problem(f.path);
    CHECK(pf.divergence.name == "hellinger");
    CHECK_FALSE(pf.lambda.has_value());
    CHECK(std::get<DiscreteMeasure>(pf.reference).atoms()[2] == std::vector<double>{2.0});
}

TEST_CASE("loading a dataset risk") {
    const TempFile f("tmp_io_dataset.json", R"({
        "divergence": "reverse_kl",
        "lambda": 1.0,
        "reference": {"type": "density1d", "name": "example1_gamma", "domain": [0.0, 25.0], "panels": 32},
        "risk": {"type": "dataset", "loss": "squared", "predictor": "linear",
                 "data": [[1.0, 0.0], [[2.0], 1.0]]}
    })");
    const auto pf = load_problem(f.path);
    const auto& q = std::get<QuadratureMeasure>(pf.reference);
    CHECK(q.panels() == 32);
    CHECK(pf.risk.kind() == RiskSpec::Kind::dataset);
    CHECK(pf.risk.data().pairs.size() == 2);
    CHECK(pf.risk.data().pairs[1].first == std::vector<double>{2.0});

    // The flag-level override replaces the file's panel count.
    const auto pf8 = load_problem(f.path, 8);
    CHECK(std::get<QuadratureMeasure>(pf8.reference).panels() == 8);
}

TEST_CASE("lambda grids") {
    const TempFile f("tmp_io_grid.json", R"({
        "divergence": "kl",
        "lambda": {"start": 1.0, "stop": 100.0, "count": 3, "scale": "log"},
        "reference": {"type": "discrete", "atoms": [[0.0], [1.0]], "masses": [0.5, 0.5]},
        "risk": {"type": "values", "values": [0.0, 1.0]}
    })");
    const auto pf = load_problem(f.path);
    CHECK_FALSE(pf.lambda.has_value());
    REQUIRE(pf.grid.has_value());
    const auto vals = pf.grid->values();
    REQUIRE(vals.size() == 3);
    CHECK(vals[0] == 1.0);
    CHECK(vals[1] == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(vals[2] == 100.0);

    LambdaGrid lin{0.5, 2.5, 5, false};
    const auto lv = lin.values();
    CHECK(lv.front() == 0.5);
    CHECK(lv.back() == 2.5);
    CHECK(lv[2] == doctest::Approx(1.5).epsilon(1e-15));

    LambdaGrid single{2.0, 9.0, 1, false};
    CHECK(single.values() == std::vector<double>{2.0});
}

TEST_CASE("schema violations are configuration errors") {
    const auto bad = [](const std::string& name, const std::string& body) {
        const TempFile f(name, body);
        CHECK_THROWS_AS(load_problem(f.path), ConfigError);
    };
    bad("tmp_io_bad1.json", "{not json");
    bad("tmp_io_bad2.json", R"({"divergence": "kl"})");
    bad("tmp_io_bad3.json", R"({
        "divergence": "mystery",
        "reference": {"type": "discrete", "atoms": [[0]], "masses": [1.0]},
        "risk": {"type": "values", "values": [0.0]}
    })");
    bad("tmp_io_bad4.json", R"({
        "divergence": "kl", "lambda": -1.0,
        "reference": {"type": "discrete", "atoms": [[0]], "masses": [1.0]},
        "risk": {"type": "values", "values": [0.0]}
    })");
    bad("tmp_io_bad5.json", R"({
        "divergence": "kl",
        "reference": {"type": "discrete", "atoms": [[0], [1]], "masses": [0.9, 0.2]},
        "risk": {"type": "values", "values": [0.0, 1.0]}
    })");
    bad("tmp_io_bad6.json", R"({
        "divergence": "kl",
        "lambda": {"start": 1.0, "stop": 2.0, "count": 4, "scale": "cubic"},
        "reference": {"type": "discrete", "atoms": [[0]], "masses": [1.0]},
        "risk": {"type": "values", "values": [0.0]}
    })");
    bad("tmp_io_bad7.json", R"({
        "divergence": "kl",
        "reference": {"type": "density1d", "name": "cauchy", "domain": [0, 1]},
        "risk": {"type": "values", "values": [0.0]}
    })");
    CHECK_THROWS_AS(load_problem("tmp_io_missing_file.json"), ConfigError);
}
