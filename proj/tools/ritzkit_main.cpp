// ritzkit command-line front end.
// Exit codes: 0 ok, 1 other errors (missing files, bad data), 2 config, 3 numeric,
// 4 threshold failure (selftest, audit-coercivity).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "ritzkit/config.hpp"
#include "ritzkit/error.hpp"
#include "ritzkit/experiment.hpp"
#include "ritzkit/reference.hpp"

namespace fs = std::filesystem;
using namespace ritzkit;

namespace {

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out,
            bool quiet) {
    const ExperimentConfig cfg = load_config(config, seed);
    const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
    const auto res = run_experiment(cfg, dir, quiet ? nullptr : &std::cerr);
    std::cout << "wrote " << res.dir.string() << "\n";
    return 0;
}

int cmd_compare(const std::string& dir, const std::string& ref, std::vector<double> ts,
                std::size_t nx, const std::string& out) {
    const fs::path run(dir);
    const NetworkParams net = params_from_json(read_file(run / "params_final.json"));
    const auto meta = nlohmann::ordered_json::parse(read_file(run / "metadata.json"));
    const ExperimentConfig cfg = parse_config(meta.at("config"));
    const Domain& dom = *cfg.domain;
    if (dom.dim() != 2 || net.d != 2)
        throw DataError("compare needs a two-dimensional (t, x) problem");
    auto u = [&net](double t, double x) {
        const double p[2] = {t, x};
        return eval(net, p);
    };
    std::function<double(double, double)> reference;
    std::optional<NetworkParams> other;
    std::optional<SeparableFunction> exact;
    double nu = 0.0;
    if (ref == "cole_hopf") {
        if (!cfg.problem || !cfg.problem->nonlinear ||
            cfg.problem->nonlinear->kind != NonlinearKind::burgers)
            throw DataError("cole_hopf reference needs a Burgers run");
        nu = cfg.problem->nonlinear->nu;
        reference = [nu](double t, double x) { return burgers_reference(t, x, nu); };
    } else if (ref.rfind("manufactured:", 0) == 0) {
        exact = manufactured_function(ref.substr(13), 2);
        reference = [&exact](double t, double x) {
            const double p[2] = {t, x};
            return exact->value(p);
        };
    } else if (ref.rfind("params:", 0) == 0) {
        other = params_from_json(read_file(ref.substr(7)));
        if (other->d != 2) throw DataError("reference network must have d = 2");
        reference = [&other](double t, double x) {
            const double p[2] = {t, x};
            return eval(*other, p);
        };
    } else {
        throw ConfigError("unknown reference '" + ref + "' (cole_hopf, manufactured:<id>, params:<path>)");
    }
    const auto rows = compare_slices(u, reference, ts, dom.lo()[1], dom.hi()[1], nx);
    const std::string csv = slice_errors_csv(rows);
    if (out == "-") {
        std::cout << csv;
    } else {
        const fs::path target = out.empty() ? run / "compare.csv" : fs::path(out);
        write_file_atomic(target, csv);
        std::cout << csv << "wrote " << target.string() << "\n";
    }
    return 0;
}

int cmd_audit(const std::string& config, std::optional<std::uint64_t> seed,
              const std::string& out) {
    const ExperimentConfig cfg = load_config(config, seed);
    const AuditReport rep = run_coercivity_audit(cfg);
    const auto j = rep.to_json();
    const fs::path target = out.empty() ? fs::path(cfg.output_dir) / "coercivity_audit.json"
                                        : fs::path(out);
    write_file_atomic(target, j.dump(2) + "\n");
    const bool pos = j["all_positive"].get<bool>();
    const bool bound = rep.worst_ratio() <= 1.0 + 1e-8;
    const bool dup = !rep.duplicate_checked || rep.duplicate_lambda_min < 1e-10;
    std::printf("cases %zu  min lambda %.3e  worst ratio %.12f  duplicate lambda %.3e\n",
                rep.cases.size(), rep.min_lambda(), rep.worst_ratio(), rep.duplicate_lambda_min);
    std::printf("wrote %s\n", target.string().c_str());
    return pos && bound && dup ? 0 : 4;
}

int cmd_fit_rate(const std::string& path, std::optional<double> floor, double tail) {
    const TrainingTrace tr = TrainingTrace::from_csv(read_file(path));
    RateFitOptions opt;
    opt.floor = floor;
    opt.tail_fraction = tail;
    std::cout << fit_rate(tr, opt).to_json() << "\n";
    return 0;
}

int cmd_selftest(std::uint64_t seed) {
    bool ok = true;
    for (const auto& rep : {oracle::derivative_suite(seed), oracle::gradient_suite(seed + 1)}) {
        std::printf("%-18s %s  cases %zu  worst %.3e  tol %.0e  (%s)\n", rep.name.c_str(),
                    rep.passed ? "PASS" : "FAIL", rep.cases, rep.worst, rep.tolerance,
                    rep.worst_case.c_str());
        ok = ok && rep.passed;
    }
    return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ritzkit: two-layer tanh networks for PINN and Ritz training experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", RITZKIT_VERSION);

    std::string config, dir, ref, out, trace;
    std::optional<std::uint64_t> seed;
    std::optional<double> floor;
    bool quiet = false;
    std::vector<double> ts{0.25, 0.5, 0.75};
    std::size_t nx = 201;
    double tail = 0.5;
    std::uint64_t selftest_seed = 1;

    auto* run = app.add_subcommand("run", "run a training experiment");
    run->add_option("config", config, "experiment JSON")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out, "output directory (default: config output_dir)");
    run->add_flag("--quiet", quiet, "no progress lines");

    auto* cmp = app.add_subcommand("compare", "slice errors of a trained network");
    cmp->add_option("dir", dir, "run directory")->required();
    cmp->add_option("--ref", ref, "cole_hopf | manufactured:<id> | params:<path>")->required();
    cmp->add_option("--t", ts, "time slices");
    cmp->add_option("--nx", nx, "grid nodes per slice")->check(CLI::Range(2, 1000000));
    cmp->add_option("--out", out, "CSV path, '-' for stdout (default: <dir>/compare.csv)");

    auto* aud = app.add_subcommand("audit-coercivity", "boundary coercivity audit");
    aud->add_option("config", config, "config with an audit section")->required();
    aud->add_option("--seed", seed, "override the config seed");
    aud->add_option("--out", out, "report path (default: <output_dir>/coercivity_audit.json)");

    auto* fit = app.add_subcommand("fit-rate", "Lojasiewicz rate fit of a trace");
    fit->add_option("trace", trace, "trace.csv")->required();
    fit->add_option("--floor", floor, "limit value J* (estimated when absent)");
    fit->add_option("--tail-fraction", tail, "fraction of records in the fit window")
        ->check(CLI::Range(0.01, 1.0));

    auto* self = app.add_subcommand("selftest", "finite-difference oracle suites");
    self->add_option("--seed", selftest_seed, "suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(config, seed, out, quiet);
        if (*cmp) return cmd_compare(dir, ref, ts, nx, out);
        if (*aud) return cmd_audit(config, seed, out);
        if (*fit) return cmd_fit_rate(trace, floor, tail);
        if (*self) return cmd_selftest(selftest_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
