#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fdr/equivalence.hpp"
#include "fdr/errors.hpp"
#include "fdr/io.hpp"
#include "fdr/oracle.hpp"
#include "fdr/solver.hpp"

namespace {

using nlohmann::json;

int g_log = 0;  // 0 error, 1 info, 2 debug

void init_log() {
    const char* v = std::getenv("FDR_LOG");
    if (!v) return;
    const std::string s(v);
    if (s == "info")
        g_log = 1;
    else if (s == "debug")
        g_log = 2;
    else if (s != "error" && !s.empty())
        std::cerr << "warning: FDR_LOG must be one of error|info|debug, got \"" << s << "\"\n";
}

bool debug_on() { return g_log >= 2; }

void log_info(const std::string& msg) {
    if (g_log >= 1) std::cerr << "[fdr] " << msg << "\n";
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

std::string num17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// JSON has no extended reals; keep infinities diffable instead of
// letting the serializer degrade them to null.
json ext_real(double v) {
    if (std::isnan(v)) return "nan";
    if (!std::isfinite(v)) return v > 0.0 ? "inf" : "-inf";
    return v;
}

json ext_real_array(const std::vector<double>& vs) {
    json arr = json::array();
    for (double v : vs) arr.push_back(ext_real(v));
    return arr;
}

void emit_text(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw fdr::ConfigError("cannot open output file: " + out);
    f << text;
}

void emit_json(const json& rec, const std::string& out) { emit_text(rec.dump(2) + "\n", out); }

// Zero means "not given" for tol/lambda/panels: all three are
// constrained positive at the parser.
struct Flags {
    std::string problem;
    std::string out;
    std::string second;
    double tol = 0.0;
    double lambda = 0.0;
    long long seed = 0;
    int panels = 0;
};

fdr::SolveOptions make_opts(const Flags& fl, const fdr::ProblemFile& pf) {
    fdr::SolveOptions opts;
    opts.tol = fl.tol > 0.0 ? fl.tol : pf.tol.value_or(0.0);
    return opts;
}

double pick_lambda(const Flags& fl, const fdr::ProblemFile& pf) {
    if (fl.lambda > 0.0) return fl.lambda;
    if (pf.lambda) return *pf.lambda;
    throw fdr::ConfigError("no lambda: set it in the problem file or pass --lambda");
}

const char* boundary_name(fdr::Boundary b) {
    switch (b) {
        case fdr::Boundary::closed_left: return "closed_left";
        case fdr::Boundary::open_left: return "open_left";
        case fdr::Boundary::all_reals: return "all_reals";
        case fdr::Boundary::empty: return "empty";
    }
    return "?";
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const fdr::NoFeasibleBeta& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const fdr::InfeasiblePoint& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const fdr::DivergentIntegral& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const fdr::NonConvergence& e) {
        std::cerr << "did not converge: " << e.what() << "\n";
        return 3;
    } catch (const fdr::Inconclusive& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        return 3;
    } catch (const fdr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_solve(const Flags& fl) {
    Timer timer;
    const auto pf = fdr::load_problem(fl.problem, fl.panels);
    const double lam = pick_lambda(fl, pf);
    const auto risk = fdr::bind_risk(pf.risk, pf.reference);
    const auto opts = make_opts(fl, pf);

    const fdr::Posterior post = [&] {
        try {
            return fdr::posterior(pf.divergence, pf.reference, risk, lam, opts);
        } catch (const fdr::NoFeasibleBeta& e) {
            if (e.empty_interval || e.lambda_star) throw;
            // Name the minimum admissible lambda when the boundary
            // classification can produce one; best effort only.
            std::optional<double> lstar;
            try {
                lstar = fdr::classify_boundary(pf.divergence, pf.reference, risk, opts.tol)
                            .lambda_star;
            } catch (const fdr::Error&) {
            }
            if (lstar)
                throw fdr::NoFeasibleBeta(
                    std::string(e.what()) + "; minimum admissible lambda* = " + num17(*lstar),
                    false, lstar);
            throw;
        }
    }();

    json rec;
    rec["command"] = "solve";
    rec["divergence"] = pf.divergence.name;
    rec["lambda"] = lam;
    rec["beta"] = post.beta;
    rec["rn"] = post.rn;
    rec["objective"] = fdr::objective(post, risk);
    rec["stationarity"] = fdr::stationarity_residual(post, risk);
    if (const auto* q = std::get_if<fdr::DiscreteMeasure>(&pf.reference)) {
        std::vector<double> masses(q->size());
        for (std::size_t i = 0; i < q->size(); ++i) masses[i] = post.rn[i] * q->masses()[i];
        rec["masses"] = masses;
    } else {
        rec["nodes"] = std::get<fdr::QuadratureMeasure>(pf.reference).nodes();
    }
    rec["diagnostics"] = json{
        {"support", fdr::support_size(pf.reference)},
        {"tol", opts.tol > 0.0 ? opts.tol : fdr::default_tol(pf.reference)},
    };
    if (debug_on()) rec["timings"] = json{{"total_ms", timer.ms()}};
    emit_json(rec, fl.out);
    return 0;
}

int run_sweep(const Flags& fl) {
    const auto pf = fdr::load_problem(fl.problem, fl.panels);
    if (!pf.grid)
        throw fdr::ConfigError("sweep needs a lambda grid: {\"start\",\"stop\",\"count\",\"scale\"}");
    const auto risk = fdr::bind_risk(pf.risk, pf.reference);
    const auto opts = make_opts(fl, pf);

    std::string csv = "lambda,N_lambda,beta,min_rn,max_rn,feasible\n";
    for (const double lam : pf.grid->values()) {
        double beta = std::numeric_limits<double>::quiet_NaN();
        double mn = beta, mx = beta;
        bool ok = true;
        try {
            const auto post = fdr::posterior(pf.divergence, pf.reference, risk, lam, opts);
            beta = post.beta;
            mn = *std::min_element(post.rn.begin(), post.rn.end());
            mx = *std::max_element(post.rn.begin(), post.rn.end());
        } catch (const fdr::ConfigError&) {
            throw;
        } catch (const fdr::Error& e) {
            ok = false;
            mn = mx = beta = std::numeric_limits<double>::quiet_NaN();
            log_info("lambda = " + num17(lam) + " infeasible: " + e.what());
        }
        csv += num17(lam);
        csv += ',';
        csv += num17(beta);
        csv += ',';
        csv += num17(beta);
        csv += ',';
        csv += num17(mn);
        csv += ',';
        csv += num17(mx);
        csv += ',';
        csv += ok ? '1' : '0';
        csv += '\n';
    }
    emit_text(csv, fl.out);
    return 0;
}

int run_classify(const Flags& fl) {
    Timer timer;
    const auto pf = fdr::load_problem(fl.problem, fl.panels);
    const auto risk = fdr::bind_risk(pf.risk, pf.reference);
    const auto opts = make_opts(fl, pf);
    const auto rep = fdr::classify_boundary(pf.divergence, pf.reference, risk, opts.tol);

    json rec;
    rec["command"] = "classify";
    rec["divergence"] = pf.divergence.name;
    rec["boundary"] = boundary_name(rep.boundary);
    rec["orientation"] = rep.orientation;
    rec["t_star"] = ext_real(rep.t_star);
    rec["binding_t"] = ext_real(rep.binding_t);
    rec["boundary_limit"] = ext_real(rep.boundary_limit);
    if (rep.lambda_star) rec["lambda_star"] = *rep.lambda_star;
    if (rep.admissible)
        rec["admissible"] =
            json{{"lo", rep.admissible->lo}, {"lo_closed", rep.admissible->lo_closed}};
    rec["probes"] = ext_real_array(rep.probe_values);
    rec["refinement_sums"] = ext_real_array(rep.refinement_sums);
    if (debug_on()) rec["timings"] = json{{"total_ms", timer.ms()}};
    emit_json(rec, fl.out);
    return 0;
}

int run_equiv(const Flags& fl) {
    const auto pf = fdr::load_problem(fl.problem, fl.panels);
    const double lam = pick_lambda(fl, pf);
    const auto risk = fdr::bind_risk(pf.risk, pf.reference);
    const auto opts = make_opts(fl, pf);
    const auto& g = fdr::builtin(fl.second);
    const auto rt = fdr::risk_transform(pf.divergence, g, lam, pf.reference, risk, opts);
    const double gap = fdr::verify_equivalence(pf.divergence, g, lam, pf.reference, risk, opts);

    json rec;
    rec["command"] = "equiv";
    rec["f"] = pf.divergence.name;
    rec["g"] = g.name;
    rec["lambda"] = lam;
    rec["n_f"] = rt.n_f;
    rec["transformed_risk"] = rt.transformed;
    rec["posterior_gap"] = gap;
    emit_json(rec, fl.out);
    return 0;
}

int run_oracle_check(const Flags& fl) {
    Timer timer;
    const auto pf = fdr::load_problem(fl.problem, fl.panels);
    const double lam = pick_lambda(fl, pf);

    // The oracle walks a finite simplex, so continuous references are
    // frozen at their quadrature nodes first.
    const fdr::DiscreteMeasure dq = [&]() -> fdr::DiscreteMeasure {
        if (const auto* q = std::get_if<fdr::DiscreteMeasure>(&pf.reference)) return *q;
        const auto& qm = std::get<fdr::QuadratureMeasure>(pf.reference);
        std::vector<std::vector<double>> atoms;
        std::vector<double> masses;
        atoms.reserve(qm.nodes().size());
        masses.reserve(qm.nodes().size());
        for (std::size_t i = 0; i < qm.nodes().size(); ++i) {
            atoms.push_back({qm.nodes()[i]});
            masses.push_back(qm.weights()[i] * qm.density(qm.nodes()[i]) * qm.norm());
        }
        return fdr::DiscreteMeasure(std::move(atoms), std::move(masses));
    }();
    const std::vector<double> values = fdr::bind_risk(pf.risk, pf.reference).at_support;
    const fdr::Measure dm{dq};
    const auto risk = fdr::bind_risk(fdr::RiskSpec::tabulated(values), dm);

    const auto opts = make_opts(fl, pf);
    const auto post = fdr::posterior(pf.divergence, dm, risk, lam, opts);
    std::vector<double> p(post.rn.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = post.rn[i] * dq.masses()[i];

    const double ctol = fl.tol > 0.0 ? fl.tol : pf.tol.value_or(1e-6);
    const auto orc = fdr::simplex_minimize(dq, risk, lam, pf.divergence);
    const auto rep = fdr::certify(pf.divergence, dq, risk, lam, p, orc, ctol);

    json rec;
    rec["command"] = "oracle-check";
    rec["divergence"] = pf.divergence.name;
    rec["lambda"] = lam;
    rec["beta"] = post.beta;
    rec["closed_form_objective"] = fdr::objective(post, risk);
    rec["oracle"] = json{{"objective", orc.objective},
                         {"iterations", orc.iterations},
                         {"converged", orc.converged}};
    rec["mass_gap"] = rep.mass_gap;
    rec["objective_gap"] = rep.objective_gap;
    rec["tol"] = ctol;
    rec["pass"] = rep.pass;
    if (debug_on()) rec["timings"] = json{{"total_ms", timer.ms()}};
    emit_json(rec, fl.out);
    if (!rep.pass) {
        std::cerr << "oracle certification failed: objective gap " << num17(rep.objective_gap)
                  << ", mass gap " << num17(rep.mass_gap) << "\n";
        return 3;
    }
    return 0;
}

struct CheckRow {
    std::string name;
    std::string value;
    std::string target;
    double err = 0.0;
    double tol = 0.0;
    bool pass = false;
};

CheckRow num_row(std::string name, double value, double target, double tol) {
    CheckRow r;
    r.name = std::move(name);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    r.value = buf;
    std::snprintf(buf, sizeof buf, "%.10g", target);
    r.target = buf;
    r.err = std::abs(value - target);
    r.tol = tol;
    r.pass = r.err <= tol;
    return r;
}

CheckRow text_row(std::string name, std::string value, std::string target) {
    CheckRow r;
    r.name = std::move(name);
    r.value = std::move(value);
    r.target = std::move(target);
    r.err = std::numeric_limits<double>::quiet_NaN();
    r.pass = r.value == r.target;
    return r;
}

CheckRow error_row(std::string name, const std::string& what) {
    CheckRow r;
    r.name = std::move(name);
    r.value = "error: " + what;
    r.err = std::numeric_limits<double>::quiet_NaN();
    r.pass = false;
    return r;
}

int run_examples(const Flags& fl) {
    const double tol_repro = fl.tol > 0.0 ? fl.tol : 1e-3;
    const double tol_equiv = fl.tol > 0.0 ? fl.tol : 1e-6;
    const int panels = fl.panels > 0 ? fl.panels : 64;

    std::vector<CheckRow> rows;
    bool ex1 = false, ex2 = false, ex4 = false;

    // Reproduction 1: gamma-type reference, L(theta) = theta^2,
    // reverse KL. The inverse second moment is 2, the normalization
    // constant vanishes at lambda = 1/2, and that same value is the
    // smallest admissible regularization.
    try {
        const auto Q = fdr::QuadratureMeasure::example1_gamma(0.0, 25.0, panels);
        const fdr::Measure m{Q};
        fdr::Dataset d;
        d.pairs.push_back({{1.0}, 0.0});
        const auto risk = fdr::bind_risk(fdr::RiskSpec::from_dataset(d, "squared", "linear"), m);
        const auto& rkl = fdr::builtin("reverse_kl");

        const double integral = fdr::integrate(Q, [](double t) { return 1.0 / (t * t); }).value;
        rows.push_back(num_row("example1_inverse_second_moment", integral, 2.0, tol_repro));

        const double beta = fdr::solve_beta(rkl, m, risk, 0.5);
        rows.push_back(num_row("example1_beta_at_half", beta, 0.0, tol_repro));

        const auto rep = fdr::classify_boundary(rkl, m, risk);
        rows.push_back(
            text_row("example1_boundary", boundary_name(rep.boundary), "closed_left"));
        if (rep.lambda_star)
            rows.push_back(num_row("example1_lambda_star", *rep.lambda_star, 0.5, tol_repro));
        else
            rows.push_back(error_row("example1_lambda_star", "no lambda* reported"));

        ex1 = true;
        for (std::size_t i = rows.size() - 4; i < rows.size(); ++i) ex1 = ex1 && rows[i].pass;
    } catch (const std::exception& e) {
        rows.push_back(error_row("example1", e.what()));
    }

    // Reproduction 2: same reference, L(theta) = (theta - 1)^2. The
    // boundary integral diverges, so the feasible set is open on the
    // left and every positive lambda is admissible.
    try {
        const auto Q = fdr::QuadratureMeasure::example1_gamma(0.0, 25.0, panels);
        const fdr::Measure m{Q};
        fdr::Dataset d;
        d.pairs.push_back({{1.0}, 1.0});
        const auto risk = fdr::bind_risk(fdr::RiskSpec::from_dataset(d, "squared", "linear"), m);
        const auto rep = fdr::classify_boundary(fdr::builtin("reverse_kl"), m, risk);
        rows.push_back(text_row("example2_boundary", boundary_name(rep.boundary), "open_left"));
        ex2 = rows.back().pass;
    } catch (const std::exception& e) {
        rows.push_back(error_row("example2", e.what()));
    }

    // Reproduction 4: the KL problem restated as a reverse-KL problem.
    // The reshaped risk is lambda exp(L/lambda) Z up to one additive
    // constant, and both posteriors coincide.
    try {
        const fdr::DiscreteMeasure q({{0.0}, {1.0}}, {0.5, 0.5});
        const fdr::Measure m{q};
        const auto risk = fdr::bind_risk(fdr::RiskSpec::tabulated({0.0, 1.0}), m);
        const double lambda = 1.0;
        const auto& kl = fdr::builtin("kl");
        const auto& rkl = fdr::builtin("reverse_kl");

        const auto rt = fdr::risk_transform(kl, rkl, lambda, m, risk);
        double z = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i)
            z += q.masses()[i] * std::exp(-risk.at_support[i] / lambda);
        std::vector<double> target(q.size());
        double scale = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            target[i] = lambda * std::exp(risk.at_support[i] / lambda) * z;
            scale = std::max(scale, std::abs(target[i]));
        }
        const double shift = rt.transformed[0] - target[0];
        double rel = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i)
            rel = std::max(rel, std::abs(rt.transformed[i] - target[i] - shift) / scale);
        rows.push_back(num_row("example4_transform", rel, 0.0, tol_equiv));

        const double gap = fdr::verify_equivalence(kl, rkl, lambda, m, risk);
        rows.push_back(num_row("example4_posterior_gap", gap, 0.0, tol_equiv));
        ex4 = rows[rows.size() - 2].pass && rows.back().pass;
    } catch (const std::exception& e) {
        rows.push_back(error_row("example4", e.what()));
    }

    std::string table;
    char line[256];
    std::snprintf(line, sizeof line, "%-34s %-16s %-16s %-10s %-9s %s\n", "check", "value",
                  "target", "error", "tol", "status");
    table += line;
    for (const auto& r : rows) {
        char err[32], tol[32];
        if (std::isnan(r.err))
            std::snprintf(err, sizeof err, "-");
        else
            std::snprintf(err, sizeof err, "%.3g", r.err);
        if (r.tol > 0.0)
            std::snprintf(tol, sizeof tol, "%.3g", r.tol);
        else
            std::snprintf(tol, sizeof tol, "-");
        std::snprintf(line, sizeof line, "%-34s %-16s %-16s %-10s %-9s %s\n", r.name.c_str(),
                      r.value.c_str(), r.target.c_str(), err, tol, r.pass ? "pass" : "FAIL");
        table += line;
    }
    const int passed = (ex1 ? 1 : 0) + (ex2 ? 1 : 0) + (ex4 ? 1 : 0);
    std::snprintf(line, sizeof line, "reproductions passed: %d/3\n", passed);
    table += line;
    emit_text(table, fl.out);
    return passed == 3 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    init_log();
    CLI::App app{"f-divergence regularized posterior solver"};
    app.require_subcommand(1);

    Flags fl;
    int rc = 0;

    const auto add_common = [&fl](CLI::App* sub, bool with_problem) {
        if (with_problem)
            sub->add_option("--problem", fl.problem, "JSON problem file")
                ->required()
                ->check(CLI::ExistingFile);
        sub->add_option("--out", fl.out, "write output here instead of stdout");
        sub->add_option("--tol", fl.tol, "tolerance override")->check(CLI::PositiveNumber);
        sub->add_option("--seed", fl.seed,
                        "seed for randomized runs (built-in commands are deterministic)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--panels", fl.panels, "quadrature panel count override")
            ->check(CLI::PositiveNumber);
    };

    auto* solve = app.add_subcommand("solve", "compute the posterior at one lambda");
    add_common(solve, true);
    solve->add_option("--lambda", fl.lambda, "override the problem's lambda")
        ->check(CLI::PositiveNumber);
    solve->callback([&] { rc = run_guarded([&] { return run_solve(fl); }); });

    auto* sweep = app.add_subcommand("sweep", "tabulate the normalization function over a grid");
    add_common(sweep, true);
    sweep->callback([&] { rc = run_guarded([&] { return run_sweep(fl); }); });

    auto* classify = app.add_subcommand("classify", "characterize the feasible boundary");
    add_common(classify, true);
    classify->callback([&] { rc = run_guarded([&] { return run_classify(fl); }); });

    auto* equiv = app.add_subcommand("equiv", "restate the problem under a second divergence");
    add_common(equiv, true);
    equiv->add_option("--lambda", fl.lambda, "override the problem's lambda")
        ->check(CLI::PositiveNumber);
    equiv->add_option("--second", fl.second, "the divergence to transform into")->required();
    equiv->callback([&] { rc = run_guarded([&] { return run_equiv(fl); }); });

    auto* oracle = app.add_subcommand("oracle-check", "certify a solve against mirror descent");
    add_common(oracle, true);
    oracle->add_option("--lambda", fl.lambda, "override the problem's lambda")
        ->check(CLI::PositiveNumber);
    oracle->callback([&] { rc = run_guarded([&] { return run_oracle_check(fl); }); });

    auto* examples = app.add_subcommand("examples", "run the built-in worked reproductions");
    add_common(examples, false);
    examples->callback([&] { rc = run_guarded([&] { return run_examples(fl); }); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
