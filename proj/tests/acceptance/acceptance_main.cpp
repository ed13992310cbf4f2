// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Training criteria run the shipped configs into --work and judge the written artifacts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oracles.hpp"
#include "ritzkit/config.hpp"
#include "ritzkit/diagnostics.hpp"
#include "ritzkit/dynamics.hpp"
#include "ritzkit/experiment.hpp"
#include "ritzkit/operators.hpp"

namespace fs = std::filesystem;
using namespace ritzkit;
using json = nlohmann::ordered_json;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

char buf[1024];

template <class... A>
std::string fmt(const char* f, A... a) {
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

struct Context {
    fs::path configs;
    fs::path work;
};

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

fs::path run_config(const Context& ctx, const std::string& name) {
    const auto cfg = load_config(ctx.configs / (name + ".json"));
    const fs::path dir = ctx.work / name;
    fs::remove_all(dir);
    run_experiment(cfg, dir, nullptr);
    return dir;
}

// ---------------------------------------------------------------- 1

Verdict derivative_oracles(const Context&) {
    const auto d = oracle::derivative_suite(1, 100);
    const auto g = oracle::gradient_suite(2);
    return {d.passed && g.passed,
            fmt("partials %zu cases worst %.2e (tol %.0e); gradients %zu cases worst %.2e (tol %.0e)",
                d.cases, d.worst, d.tolerance, g.cases, g.worst, g.tolerance)};
}

// ---------------------------------------------------------------- 2

Verdict ntk_drift(const Context& ctx) {
    const fs::path dir = run_config(ctx, "ntk_drift");
    std::vector<double> interior(101, -1.0), boundary(101, -1.0);
    std::istringstream in(read_file(dir / "gram_drift.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string it, prov, drift;
        std::getline(row, it, ',');
        std::getline(row, prov, ',');
        std::getline(row, drift, ',');
        const auto k = static_cast<std::size_t>(std::stoul(it));
        if (k > 100) continue;
        (prov == "interior_outer" ? interior : boundary)[k] = std::stod(drift);
    }
    bool ok = true;
    double max_b = 0.0;
    for (std::size_t k = 0; k <= 100; ++k) {
        if (interior[k] < 0.0 || boundary[k] < 0.0) return {false, fmt("iteration %zu missing", k)};
        max_b = std::max(max_b, boundary[k]);
    }
    ok = max_b < 0.02;
    double by20 = 0.0;
    for (std::size_t k = 0; k <= 20; ++k) by20 = std::max(by20, interior[k]);
    ok = ok && by20 > 0.05 && interior[100] > 10.0 * boundary[100];
    return {ok, fmt("max boundary drift %.3e; interior drift %.3f by it 20, %.3f at it 100 "
                    "(boundary %.3e)",
                    max_b, by20, interior[100], boundary[100])};
}

// ---------------------------------------------------------------- 3

Verdict heat_decay(const Context& ctx) {
    const fs::path dir = run_config(ctx, "heat_decay");
    const auto sum = read_json(dir / "summary.json");
    const auto tr = TrainingTrace::from_csv(read_file(dir / "trace.csv"));
    const double j0 = tr.records.front().loss;
    // Least squares of log J on t over the first decade.
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    for (const auto& r : tr.records) {
        if (r.loss < j0 / 10.0) break;
        const double y = std::log(r.loss);
        n += 1;
        st += r.time;
        sy += y;
        stt += r.time * r.time;
        sty += r.time * y;
        syy += y * y;
    }
    if (n < 3) return {false, "fewer than 3 records in the first decade"};
    const double ctt = stt - st * st / n, cty = sty - st * sy / n, cyy = syy - sy * sy / n;
    const double slope = cty / ctt;
    const double r2 = cty * cty / (ctt * cyy);
    const double rate = -slope;
    const double bound = 0.5 * sum.at("init_gram").at("sum").get<double>();
    const bool reached = sum.at("flow").at("stop_loss_reached").get<bool>();
    return {reached && r2 > 0.95 && rate >= bound,
            fmt("%g records, R^2 %.4f, rate %.4g vs bound %.4g, 1000x drop %s at t = %.3g",
                n, r2, rate, bound, reached ? "reached" : "NOT reached", tr.records.back().time)};
}

// ---------------------------------------------------------------- 4

Verdict rf_burgers(const Context& ctx) {
    const fs::path dir = run_config(ctx, "rf_burgers");
    const auto tr = TrainingTrace::from_csv(read_file(dir / "trace.csv"));
    const auto& rec = tr.records;
    double worst = -INFINITY;
    for (std::size_t k = 1; k < rec.size(); ++k) worst = std::max(worst, rec[k].loss - rec[k - 1].loss);
    double max_a = 0.0, last_q = 0.0;
    const std::size_t q = rec.size() - rec.size() / 4;
    for (std::size_t k = 0; k < rec.size(); ++k) {
        max_a = std::max(max_a, rec[k].a_norm);
        if (k >= q) last_q = std::max(last_q, rec[k].a_norm);
    }
    const double g = rec.back().grad_norm;
    const bool ok = worst <= 1e-10 && g < 1e-4 && max_a <= 1.01 * last_q;
    return {ok, fmt("%zu steps, max loss increase %.2e, final grad norm %.3e, max ||a|| %.4g vs "
                    "last quartile %.4g",
                    rec.back().step, worst, g, max_a, last_q)};
}

// ---------------------------------------------------------------- 5

TrainingTrace sampled(std::size_t n, double dt, const std::function<double(double)>& J) {
    TrainingTrace tr;
    for (std::size_t k = 0; k <= n; ++k) {
        TraceRecord r;
        r.step = k;
        r.time = dt * static_cast<double>(k);
        r.loss = J(r.time);
        tr.records.push_back(r);
    }
    return tr;
}

Verdict rate_fitting(const Context&) {
    bool ok = true;
    std::string detail;
    RateFitOptions known;
    known.floor = 0.0;
    for (double eps : {0.1, 0.25, 0.4, 0.5}) {
        // z' = -c z^{2(1-eps)}, the decay along a flow with Lojasiewicz exponent eps.
        const double c = 0.7, z0 = 2.0, e = 1.0 - 2.0 * eps;
        const auto ode = sampled(500, 0.2, [&](double t) {
            return e == 0.0 ? z0 * std::exp(-c * t) : std::pow(std::pow(z0, -e) + c * e * t, -1.0 / e);
        });
        // The same exponent from an actual gradient flow on |theta|^{1/eps} / (1/eps).
        oracle::PowerObjective J(3, 1.0 / eps);
        FlowOptions fo;
        fo.run.record_stride = 10;
        const auto flow = gradient_flow(J, {0.3, -0.5, 0.4}, eps == 0.5 ? 40.0 : 2000.0,
                                        eps == 0.5 ? 0.01 : 0.1, fo);
        for (const auto* tr : {&ode, &flow.trace}) {
            const auto fit = fit_rate(*tr, known);
            const bool good = eps == 0.5 ? fit.regime == RateRegime::exponential
                                         : fit.regime == RateRegime::power &&
                                               std::abs(fit.epsilon - eps) <= 0.1 * eps;
            ok = ok && good;
            detail += fmt("%s%.2f->%s%.3f", detail.empty() ? "" : " ", eps,
                          tr == &ode ? "ode " : "flow ", fit.epsilon);
            if (!good) detail += fmt("(%s!)", to_string(fit.regime));
        }
    }
    return {ok, detail};
}

// ---------------------------------------------------------------- 6

Verdict coercivity(const Context& ctx) {
    const auto cfg = load_config(ctx.configs / "coercivity_audit.json");
    const auto rep = run_coercivity_audit(cfg);
    bool ok = rep.cases.size() == 60 && rep.width <= 30 && rep.duplicate_checked &&
              rep.duplicate_lambda_min < 1e-10;
    for (const auto& c : rep.cases) ok = ok && c.lambda_min > 1e-10 && c.worst_ratio <= 1.0 + 1e-8;
    fs::create_directories(ctx.work);
    write_file_atomic(ctx.work / "coercivity_audit.json", rep.to_json().dump(2) + "\n");
    return {ok, fmt("%zu cases, m = %zu, min lambda %.3e, worst ratio %.6f, duplicate lambda %.2e",
                    rep.cases.size(), rep.width, rep.min_lambda(), rep.worst_ratio(),
                    rep.duplicate_lambda_min)};
}

// ---------------------------------------------------------------- 7

Verdict independence(const Context& ctx) {
    const auto cfg = load_config(ctx.configs / "coercivity_audit.json");
    const Domain& dom = *cfg.domain;
    const std::size_t m = 20;
    InitScheme s;
    s.kind = InitKind::small_normal;
    s.delta = 1e-2;
    bool ok = true;
    double smallest = INFINITY, dup_max = 0.0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        s.seed = cfg.seed * 1000 + t;
        const auto net = initialize(s, m, dom.dim());
        auto pts = sample_facet(dom, dom.gamma(), m, s.seed).points;
        const double det = std::abs(discrete_independence_det(net, pts));
        smallest = std::min(smallest, det);
        ok = ok && det > 0.0;
        std::copy_n(pts.begin(), dom.dim(), pts.begin() + static_cast<std::ptrdiff_t>(dom.dim()));
        const double dup = std::abs(discrete_independence_det(net, pts));
        dup_max = std::max(dup_max, dup);
        ok = ok && dup == 0.0;
    }
    return {ok, fmt("100 trials, m = 20, d = %zu: min |det| %.3e, duplicated-point max |det| %g",
                    dom.dim(), smallest, dup_max)};
}

// ---------------------------------------------------------------- 8

Verdict igd_contract(const Context& ctx) {
    double worst = 0.0;
    CounterRng rng(8, 60);
    QuadraticObjective q(5, 1.0);
    InnerOptions inner;
    inner.grad_tol = 1e-13;
    inner.max_iters = 50;
    for (double eta : {0.1, 0.5, 1.0, 4.0}) {
        std::vector<double> th(5);
        for (auto& v : th) v = rng.normal();
        const auto r = igd_step(q, th, eta, inner);
        for (std::size_t i = 0; i < 5; ++i)
            worst = std::max(worst, std::abs(r.theta[i] - th[i] / (1.0 + eta)));
    }
    bool ok = worst <= 1e-10;
    std::string detail = fmt("closed form error %.2e", worst);
    for (const char* name : {"ntk_drift", "rf_burgers"}) {
        const fs::path p = ctx.work / name / "summary.json";
        if (!fs::exists(p)) return {false, detail + fmt("; %s has no summary", name)};
        const auto igd = read_json(p).at("igd");
        const double res = igd.at("max_converged_residual").get<double>();
        const double bound = igd.at("eta").get<double>() * igd.at("grad_tol").get<double>();
        const auto conv = igd.at("converged_steps").get<std::size_t>();
        ok = ok && res <= bound;
        detail += fmt("; %s %zu/%zu converged, max residual %.2e <= %.0e", name, conv,
                      igd.at("steps").get<std::size_t>(), res, bound);
    }
    return {ok, detail};
}

// ---------------------------------------------------------------- 9

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

// Composite rule split at the cutoff ramp ends, where eta'' has kinks.
void axis_rule(double lo, double hi, double margin, std::vector<double>& x, std::vector<double>& w) {
    std::vector<double> gx, gw;
    gauss_legendre(16, gx, gw);
    x.clear();
    w.clear();
    const double cuts[4] = {lo, lo + margin, hi - margin, hi};
    for (int s = 0; s < 3; ++s) {
        const double c = 0.5 * (cuts[s] + cuts[s + 1]), h = 0.5 * (cuts[s + 1] - cuts[s]);
        for (std::size_t i = 0; i < gx.size(); ++i) {
            x.push_back(c + h * gx[i]);
            w.push_back(h * gw[i]);
        }
    }
}

Verdict monotone_control(const Context&) {
    const std::vector<double> lo{-1.0, 0.0}, hi{1.0, 1.5};
    const CutoffSpec cut(lo, hi, 0.1);
    std::vector<double> x0, w0, x1, w1;
    axis_rule(lo[0], hi[0], cut.margin(0), x0, w0);
    axis_rule(lo[1], hi[1], cut.margin(1), x1, w1);
    CounterRng rng(9, 61);
    bool ok = true;
    double worst = -INFINITY;  // max of (energy - pairing) / scale
    std::size_t cases = 0;
    for (std::size_t net_i = 0; net_i < 50; ++net_i) {
        NetworkParams p(3 + net_i % 8, 2);
        for (auto& v : p.a) v = rng.normal();
        for (auto& v : p.w) v = 2.0 * rng.normal();
        for (auto& v : p.b) v = rng.normal();
        const double qv = net_i % 2 ? 0.0 : 0.5 * rng.uniform();
        const auto h = net_i % 3 ? ScalarFunction::cubic() : ScalarFunction::zero();
        std::vector<std::pair<NonlinearOperatorSpec, double>> ops;
        for (double pe : {2.0, 3.0, 4.0}) ops.emplace_back(NonlinearOperatorSpec::p_laplace(pe, qv, h), pe);
        ops.emplace_back(NonlinearOperatorSpec::quasilinear(qv, h), 2.0);
        for (const auto& [op, pe] : ops) {
            double pairing = 0.0, energy = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < x0.size(); ++i)
                for (std::size_t j = 0; j < x1.size(); ++j) {
                    const double x[2] = {x0[i], x1[j]};
                    const double wq = w0[i] * w1[j];
                    const double eta = cut.eval(x, MultiIndex{0, 0}), u = eval(p, x);
                    double g2 = 0.0;
                    for (std::size_t k = 0; k < 2; ++k) {
                        const auto e = MultiIndex::unit(2, k);
                        const double gk = cut.eval(x, e) * u + eta * partial_derivative(p, x, e);
                        g2 += gk * gk;
                    }
                    const double lu = monotone_residual(op, cut, p, x) * eta * u;
                    const double gp = std::pow(g2, 0.5 * pe);
                    pairing += wq * lu;
                    energy += wq * gp;
                    scale += wq * (std::abs(lu) + gp);
                }
            const double gap = (energy - pairing) / scale;
            worst = std::max(worst, gap);
            ok = ok && pairing >= energy - 1e-3 * scale;
            ++cases;
        }
    }
    return {ok, fmt("%zu cases, worst (energy - pairing) / scale %.3e (allowed 1e-3)", cases, worst)};
}

// ---------------------------------------------------------------- 10

double min_eig_2(const double* a) {
    const double mid = 0.5 * (a[0] + a[3]);
    const double rad = std::hypot(0.5 * (a[0] - a[3]), a[1]);
    return mid - rad;
}

// Trigonometric solution of the characteristic cubic.
double min_eig_3(const double* a) {
    const double p1 = a[1] * a[1] + a[2] * a[2] + a[5] * a[5];
    const double q = (a[0] + a[4] + a[8]) / 3.0;
    const double p2 = (a[0] - q) * (a[0] - q) + (a[4] - q) * (a[4] - q) + (a[8] - q) * (a[8] - q) +
                      2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    if (p == 0.0) return q;
    double b[9];
    for (int i = 0; i < 9; ++i) b[i] = (a[i] - (i % 4 == 0 ? q : 0.0)) / p;
    const double det = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6]) +
                       b[2] * (b[3] * b[7] - b[4] * b[6]);
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
}

Verdict eigen_oracle(const Context&) {
    CounterRng rng(10, 62);
    double worst = 0.0;
    for (std::size_t t = 0; t < 1000; ++t) {
        const std::size_t n = t % 2 ? 3 : 2;
        std::vector<double> a(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) a[i * n + j] = a[j * n + i] = rng.normal();
        const double ref = n == 2 ? min_eig_2(a.data()) : min_eig_3(a.data());
        worst = std::max(worst, std::abs(min_eigenvalue(a, n) - ref));
    }
    return {worst <= 1e-10, fmt("1000 matrices, max |jacobi - closed form| %.2e", worst)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ritzkit acceptance suite"};
    Context ctx;
    std::vector<int> only;
    app.add_option("--configs", ctx.configs, "directory with the shipped configs")->required();
    app.add_option("--work", ctx.work, "scratch directory for run outputs")->required();
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    struct Criterion {
        int id;
        const char* name;
        double budget;  // seconds
        Verdict (*fn)(const Context&);
    };
    const Criterion all[] = {
        {1, "derivative and gradient oracles", 30, derivative_oracles},
        {2, "ntk gram drift", 600, ntk_drift},
        {3, "linear exponential decay", 600, heat_decay},
        {4, "random-feature burgers", 1200, rf_burgers},
        {5, "rate fitting", 10, rate_fitting},
        {6, "boundary coercivity audit", 120, coercivity},
        {7, "discrete independence", 30, independence},
        {8, "igd proximal contract", 60, igd_contract},
        {9, "interior monotone control", 120, monotone_control},
        {10, "eigen oracle", 10, eigen_oracle},
    };
    bool all_ok = true;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.fn(ctx);
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        // Criterion 8 reuses the runs of 2 and 4, so its clock excludes them.
        const bool in_time = secs <= c.budget;
        const bool ok = v.pass && in_time;
        all_ok = all_ok && ok;
        std::printf("%s %2d %-32s %8.2f s%s  %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs,
                    in_time ? "" : fmt(" (over %.0f s)", c.budget).c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    return all_ok ? 0 : 1;
}
