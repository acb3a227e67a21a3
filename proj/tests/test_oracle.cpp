#include <cmath>
#include <vector>

#include "doctest.h"
#include "fdr/divergence.hpp"
#include "fdr/errors.hpp"
#include "fdr/measure.hpp"
#include "fdr/oracle.hpp"
#include "fdr/risk.hpp"
#include "fdr/solver.hpp"

using namespace fdr;

TEST_CASE("mirror descent lands on the kl optimum") {
    const DiscreteMeasure q({{0.0}, {1.0}}, {0.5, 0.5});
    const Measure m{q};
    const auto risk = bind_risk(RiskSpec::tabulated({0.0, 1.0}), m);

    const auto res = simplex_minimize(q, risk, 1.0, builtin("kl"));
    CHECK(res.converged);
    CHECK(res.masses[0] == doctest::Approx(0.73105857863000488).epsilon(1e-4));
    CHECK(res.masses[1] == doctest::Approx(0.26894142136999512).epsilon(1e-4));
    CHECK(res.objective == doctest::Approx(0.37988549304172248).epsilon(1e-8));

    // The iteration starts at q and never walks uphill.
    CHECK(res.objective <= objective(builtin("kl"), q, risk, 1.0, q.masses()) + 1e-15);
}

TEST_CASE("mirror descent lands on the chi2 optimum") {
    const DiscreteMeasure q({{0.0}, {1.0}}, {0.5, 0.5});
    const Measure m{q};
    const auto risk = bind_risk(RiskSpec::tabulated({0.0, 1.0}), m);

    const auto res = simplex_minimize(q, risk, 1.0, builtin("chi2"));
    CHECK(res.masses[0] == doctest::Approx(0.625).epsilon(1e-4));
    CHECK(res.masses[1] == doctest::Approx(0.375).epsilon(1e-4));
}

TEST_CASE("certification accepts the closed form and rejects a corrupted one") {
    const DiscreteMeasure q({{0.0}, {1.0}, {2.0}}, {0.3, 0.45, 0.25});
    const Measure m{q};
    const auto risk = bind_risk(RiskSpec::tabulated({0.4, 1.2, 0.7}), m);
    const auto& spec = builtin("jensen_shannon");

    const auto post = posterior(spec, m, risk, 1.0);
    std::vector<double> masses(3);
    for (std::size_t i = 0; i < 3; ++i) masses[i] = post.rn[i] * q.masses()[i];

    const auto orc = simplex_minimize(q, risk, 1.0, spec);
    const auto ok = certify(spec, q, risk, 1.0, masses, orc, 1e-6);
    CHECK(ok.pass);
    CHECK(ok.mass_gap <= 1e-4);
    CHECK(ok.objective_gap <= 1e-6);

    // Shift mass between atoms so the corrupted vector is still a probability
    // vector; atom 0 has the smallest loss, so its posterior mass exceeds 0.3.
    std::vector<double> bad = {masses[0] - 0.15, masses[1] + 0.15, masses[2]};
    const auto rej = certify(spec, q, risk, 1.0, bad, orc, 1e-6);
    CHECK_FALSE(rej.pass);
}

TEST_CASE("oracle input validation") {
    const DiscreteMeasure q({{0.0}, {1.0}}, {0.5, 0.5});
    const Measure m{q};
    const auto risk = bind_risk(RiskSpec::tabulated({0.0, 1.0}), m);
    CHECK_THROWS_AS(simplex_minimize(q, risk, 0.0, builtin("kl")), ConfigError);
    CHECK_THROWS_AS(simplex_minimize(q, risk, -1.0, builtin("kl")), ConfigError);

    const auto orc = simplex_minimize(q, risk, 1.0, builtin("kl"));
    CHECK_THROWS_AS(certify(builtin("kl"), q, risk, 1.0, {0.5, 0.25, 0.25}, orc, 1e-6),
                    ConfigError);
}

TEST_CASE("oracle tracks the closed form across generators") {
    const DiscreteMeasure q({{0.0}, {1.0}, {2.0}, {3.0}}, {0.4, 0.3, 0.2, 0.1});
    const Measure m{q};
    const auto risk = bind_risk(RiskSpec::tabulated({0.3, 1.1, 0.2, 1.9}), m);

    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        const auto& spec = builtin(name);
        const auto post = posterior(spec, m, risk, 1.0);
        std::vector<double> masses(4);
        for (std::size_t i = 0; i < 4; ++i) masses[i] = post.rn[i] * q.masses()[i];
        const auto orc = simplex_minimize(q, risk, 1.0, spec);
        const auto rep = certify(spec, q, risk, 1.0, masses, orc, 1e-6);
        CHECK(rep.pass);
        CHECK(rep.mass_gap <= 1e-4);
    }
}
