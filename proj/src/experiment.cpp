#include "ritzkit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "ritzkit/diagnostics.hpp"
#include "ritzkit/error.hpp"
#include "ritzkit/kernels.hpp"

namespace ritzkit {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

GramMatrix snapshot_gram(const LossEvaluator& ev, GramProvenance p) {
    switch (p) {
        case GramProvenance::interior_outer: return gram_outer(ev, Region::interior);
        case GramProvenance::boundary_outer: return gram_outer(ev, Region::boundary);
        case GramProvenance::full_w: return gram_full(ev).first;
        case GramProvenance::full_a: return gram_full(ev).second;
        default: break;
    }
    throw ConfigError("Gram provenance not trackable during training");
}

// Drift tracking against the at-init matrices, one CSV row per (iteration, provenance).
class DriftTracker {
public:
    DriftTracker(const ExperimentConfig& cfg, const LossSpec& spec, const NetworkParams& p0)
        : stride_(cfg.diagnostics.gram_stride), grams_(cfg.diagnostics.grams),
          ev_(spec, p0) {
        if (!enabled()) return;
        csv_ << "iteration,provenance,rel_drift,min_eig\n";
        for (auto p : grams_) {
            GramMatrix k0 = snapshot_gram(ev_, p);
            if (!(k0.frobenius() > 0.0))
                throw NumericError(std::string("initial ") + to_string(p) +
                                   " Gram matrix is zero; drift is undefined");
            row(0, p, 0.0, min_eigenvalue(k0));
            init_.emplace(p, std::move(k0));
        }
    }

    bool enabled() const { return stride_ > 0 && !grams_.empty(); }

    void observe(std::size_t k, std::span<const double> theta) {
        if (!enabled() || k % stride_ != 0) return;
        ev_.params().set_trainable(theta);
        for (auto p : grams_) {
            const GramMatrix kt = snapshot_gram(ev_, p);
            const double drift = relative_drift(kt, init_.at(p));
            row(k, p, drift, min_eigenvalue(kt));
            auto& s = stats_[to_string(p)];
            s.first = std::max(s.first, drift);
            s.second = drift;
            last_[p] = kt;
        }
    }

    std::string csv() const { return csv_.str(); }

    json summary() const {
        json j = json::object();
        for (const auto& [name, s] : stats_) j[name] = {{"max_drift", s.first}, {"final_drift", s.second}};
        return j;
    }

    const std::map<GramProvenance, GramMatrix>& initial() const { return init_; }
    const std::map<GramProvenance, GramMatrix>& last() const { return last_; }

private:
    void row(std::size_t k, GramProvenance p, double drift, double eig) {
        csv_ << k << "," << to_string(p) << "," << fmt(drift) << "," << fmt(eig) << "\n";
    }

    std::size_t stride_;
    std::vector<GramProvenance> grams_;
    LossEvaluator ev_;
    std::ostringstream csv_;
    std::map<GramProvenance, GramMatrix> init_;
    std::map<GramProvenance, GramMatrix> last_;
    std::map<std::string, std::pair<double, double>> stats_;
};

json trace_summary(const TrainingTrace& tr) {
    json j;
    const auto& r = tr.records;
    if (r.empty()) return j;
    j["records"] = r.size();
    j["last_step"] = r.back().step;
    j["final_time"] = r.back().time;
    j["initial_loss"] = r.front().loss;
    j["final_loss"] = r.back().loss;
    j["final_grad_norm"] = r.back().grad_norm;
    double max_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < r.size(); ++i)
        max_increase = std::max(max_increase, r[i].loss - r[i - 1].loss);
    j["max_loss_increase"] = r.size() > 1 ? finite_or_null(max_increase) : json(0.0);
    j["monotone"] = r.size() < 2 || max_increase <= 1e-10;
    double amax = 0.0, aq = 0.0;
    const std::size_t q0 = (3 * r.size()) / 4;
    for (std::size_t i = 0; i < r.size(); ++i) {
        amax = std::max(amax, r[i].a_norm);
        if (i >= q0) aq = std::max(aq, r[i].a_norm);
    }
    j["max_a_norm"] = amax;
    j["last_quartile_max_a_norm"] = aq;
    return j;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir,
                                 std::ostream* log) {
    if (!cfg.has_training()) throw ConfigError("config has no problem section");
    const auto wall0 = std::chrono::steady_clock::now();
    const std::string started = utc_now();
    fs::create_directories(out_dir);

    const LossSpec spec = build_loss(cfg, build_collocation(cfg));
    const NetworkParams p0 = build_network(cfg);
    LossEvaluator ev(spec, p0);
    const auto& dc = cfg.dynamics;
    const auto& dg = cfg.diagnostics;

    json summary;
    summary["name"] = cfg.name;
    summary["seed"] = cfg.seed;
    summary["scheme"] = to_string(dc.scheme);
    summary["width"] = cfg.width;
    summary["trainable"] = to_string(p0.trainable);
    summary["parameters"] = p0.trainable_size();
    summary["n_interior"] = spec.collocation.n_interior();
    summary["n_boundary"] = spec.collocation.n_boundary();

    if (dg.full_gram_init) {
        const auto [G, Gt] = gram_full(ev);
        const double l0 = min_eigenvalue(G), lt0 = min_eigenvalue(Gt);
        summary["init_gram"] = {{"G_min_eig", l0}, {"G_tilde_min_eig", lt0},
                                {"sum", l0 + lt0}};
        if (dg.dump_matrices) {
            write_file_atomic(out_dir / "gram_full_w_init.csv", G.to_csv());
            write_file_atomic(out_dir / "gram_full_a_init.csv", Gt.to_csv());
        }
    }

    DriftTracker drift(cfg, spec, p0);
    TrainingTrace partial;
    std::vector<double> last_theta = p0.trainable_vector();

    RunOptions ro;
    ro.a_size = p0.m;
    ro.record_stride = dc.record_stride;
    const std::size_t expected_records =
        dc.scheme == Scheme::gradient_flow ? 0 : dc.steps / dc.record_stride + 2;
    ro.keep_iterates = dg.rate_fit && expected_records > 0 &&
                       expected_records * p0.trainable_size() <= 20'000'000;
    const std::size_t report_every = std::max<std::size_t>(1, dc.steps / 10);
    ro.observer = [&](std::size_t k, std::span<const double> theta) {
        last_theta.assign(theta.begin(), theta.end());
        drift.observe(k, theta);
    };
    ro.on_record = [&](const TraceRecord& r) {
        partial.records.push_back(r);
        if (log && dc.scheme != Scheme::gradient_flow && r.step % report_every == 0)
            *log << cfg.name << ": step " << r.step << " loss " << fmt(r.loss) << " |grad| "
                 << fmt(r.grad_norm) << "\n";
    };

    auto write_common = [&](const json& summ, double wall) {
        if (drift.enabled()) write_file_atomic(out_dir / "gram_drift.csv", drift.csv());
        write_file_atomic(out_dir / "summary.json", summ.dump(2) + "\n");
        json meta;
        meta["config"] = cfg.resolved;
        meta["version"] = RITZKIT_VERSION;
        meta["prng"] = CounterRng::kName;
        meta["threads"] = kernel_threads();
        meta["started_utc"] = started;
        meta["wall_seconds"] = wall;
        write_file_atomic(out_dir / "metadata.json", meta.dump(2) + "\n");
    };
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    };

    TrainingTrace trace;
    std::vector<double> theta = p0.trainable_vector();
    try {
        switch (dc.scheme) {
            case Scheme::igd: {
                IgdRun run = run_igd(ev, theta, dc.eta, dc.steps, dc.inner, ro);
                theta = std::move(run.theta);
                trace = std::move(run.trace);
                const auto& st = run.stats;
                summary["igd"] = {{"eta", dc.eta},
                                  {"grad_tol", dc.inner.grad_tol},
                                  {"inner_max_iters", dc.inner.max_iters},
                                  {"warm_start", dc.inner.warm_start},
                                  {"steps", st.steps},
                                  {"converged_steps", st.converged_steps},
                                  {"failed_steps", st.failed_steps},
                                  {"inner_iters_total", st.inner_iters_total},
                                  {"max_converged_residual", st.max_converged_residual},
                                  {"max_residual", st.max_residual},
                                  {"residual_bound", dc.eta * dc.inner.grad_tol}};
                break;
            }
            case Scheme::gd:
                trace = run_gd(ev, theta, dc.eta, dc.steps, ro);
                break;
            case Scheme::gradient_flow: {
                FlowOptions fo;
                fo.run = ro;
                const double j0 = ev.value(theta);
                if (dc.stop_loss_factor) fo.stop_loss = j0 / *dc.stop_loss_factor;
                FlowRun run = gradient_flow(ev, theta, dc.horizon, dc.dt, fo);
                theta = std::move(run.theta);
                trace = std::move(run.trace);
                const bool reached = fo.stop_loss && trace.records.back().loss <= *fo.stop_loss;
                summary["flow"] = {{"dt", dc.dt},
                                   {"final_dt", run.final_dt},
                                   {"halvings", run.halvings},
                                   {"horizon", dc.horizon},
                                   {"stop_loss", fo.stop_loss ? json(*fo.stop_loss) : json(nullptr)},
                                   {"stop_loss_reached", reached}};
                break;
            }
        }
    } catch (const NumericError& e) {
        partial.scheme = to_string(dc.scheme);
        write_file_atomic(out_dir / "trace.csv", partial.to_csv());
        NetworkParams pl = p0;
        pl.set_trainable(last_theta);
        write_file_atomic(out_dir / "params_final.json", params_to_json(pl) + "\n");
        summary["status"] = "numeric_failure";
        summary["error"] = e.what();
        summary["trace"] = trace_summary(partial);
        summary["gram_drift"] = drift.summary();
        write_common(summary, elapsed());
        throw;
    }

    trace.seed = cfg.seed;
    NetworkParams pf = p0;
    pf.set_trainable(theta);

    if (dg.rate_fit) {
        std::string body;
        if (ro.keep_iterates) trace.backfill_distance(theta);
        try {
            RateFit fit = fit_rate(trace, dg.rate);
            body = fit.to_json();
            summary["rate_fit"] = json::parse(body);
        } catch (const InsufficientTail& e) {
            json j;
            j["regime"] = "undetermined";
            j["epsilon"] = nullptr;
            j["error"] = e.what();
            body = j.dump(2);
            summary["rate_fit"] = j;
        }
        write_file_atomic(out_dir / "rate_fit.json", body + "\n");
    }
    if (dg.dump_matrices)
        for (const auto& [p, k] : drift.last())
            write_file_atomic(out_dir / (std::string("gram_") + to_string(p) + "_final.csv"),
                              k.to_csv());

    write_file_atomic(out_dir / "trace.csv", trace.to_csv());
    write_file_atomic(out_dir / "params_final.json", params_to_json(pf) + "\n");
    summary["status"] = "ok";
    summary["trace"] = trace_summary(trace);
    if (drift.enabled()) summary["gram_drift"] = drift.summary();
    write_common(summary, elapsed());
    if (log) *log << cfg.name << ": done, final loss " << fmt(trace.records.back().loss) << "\n";
    return {out_dir, summary};
}

// ---------------------------------------------------------------- coercivity audit

double AuditReport::min_lambda() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& c : cases) v = std::min(v, c.lambda_min);
    return v;
}

double AuditReport::worst_ratio() const {
    double v = 0.0;
    for (const auto& c : cases) v = std::max(v, c.worst_ratio);
    return v;
}

json AuditReport::to_json() const {
    json j;
    j["d"] = d;
    j["width"] = width;
    j["quadrature_points"] = quadrature_points;
    j["cases"] = cases.size();
    j["min_lambda"] = min_lambda();
    j["worst_ratio"] = worst_ratio();
    j["all_positive"] = std::all_of(cases.begin(), cases.end(),
                                    [](const AuditCase& c) { return c.lambda_min > 1e-10; });
    if (duplicate_checked) j["duplicate_lambda_min"] = duplicate_lambda_min;
    json rows = json::array();
    for (const auto& c : cases)
        rows.push_back({{"trial", c.trial},
                        {"alpha", c.robin.alpha},
                        {"beta", c.robin.beta},
                        {"lambda_min", c.lambda_min},
                        {"C", finite_or_null(c.C)},
                        {"bootstrap_se", c.bootstrap_se},
                        {"worst_ratio", c.worst_ratio}});
    j["details"] = rows;
    return j;
}

AuditReport run_coercivity_audit(const ExperimentConfig& cfg) {
    if (!cfg.audit) throw ConfigError("config has no audit section");
    const auto& ac = *cfg.audit;
    const Domain& domain = *cfg.domain;
    const std::size_t d = domain.dim();
    AuditReport rep;
    rep.d = d;
    rep.width = ac.width;
    rep.quadrature_points = ac.quadrature_points.value_or(coercivity_quadrature_size(ac.width));
    const std::size_t m = ac.width;

    for (std::size_t trial = 0; trial < ac.trials; ++trial) {
        const std::uint64_t tseed = splitmix64_mix(cfg.seed) + trial;
        InitScheme scheme;
        scheme.kind = InitKind::random_feature;
        scheme.seed = tseed;
        const NetworkParams params = initialize(scheme, m, d);
        const FacetSample gamma = sample_facet(domain, domain.gamma(), rep.quadrature_points, tseed);
        for (const auto& robin : ac.robin) {
            const auto cert = boundary_coercivity_certificate(params, gamma, robin, tseed);
            AuditCase c;
            c.trial = trial;
            c.robin = robin;
            c.lambda_min = cert.lambda_min;
            c.C = cert.C;
            c.bootstrap_se = cert.bootstrap_se;
            c.positive = cert.positive;
            CounterRng rng(tseed, streams::audit);
            for (std::size_t v = 0; v < ac.random_vectors; ++v) {
                std::vector<double> a(m);
                for (auto& x : a) x = rng.normal();
                double quad = 0.0, na = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    na += a[i] * a[i];
                    for (std::size_t k = 0; k < m; ++k) quad += a[i] * cert.gram(i, k) * a[k];
                }
                const double ratio = cert.positive && quad > 0.0
                                         ? std::sqrt(na) / (cert.C * std::sqrt(quad))
                                         : std::numeric_limits<double>::infinity();
                c.worst_ratio = std::max(c.worst_ratio, ratio);
            }
            rep.cases.push_back(c);
        }
    }

    if (ac.duplicate_control && m >= 2) {
        InitScheme scheme;
        scheme.kind = InitKind::random_feature;
        scheme.seed = splitmix64_mix(cfg.seed);
        NetworkParams params = initialize(scheme, m, d);
        for (std::size_t i = 0; i < d; ++i) params.weight(1, i) = params.weight(0, i);
        params.b[1] = params.b[0];
        const FacetSample gamma =
            sample_facet(domain, domain.gamma(), rep.quadrature_points, scheme.seed);
        rep.duplicate_lambda_min =
            boundary_coercivity_certificate(params, gamma, ac.robin.front(), scheme.seed, false)
                .lambda_min;
        rep.duplicate_checked = true;
    }
    return rep;
}

// ---------------------------------------------------------------- comparison

std::vector<SliceError> compare_slices(const std::function<double(double, double)>& u,
                                       const std::function<double(double, double)>& ref,
                                       std::span<const double> ts, double x_lo, double x_hi,
                                       std::size_t nx) {
    if (nx < 2 || !(x_lo < x_hi)) throw DataError("slice grid needs nx >= 2 and x_lo < x_hi");
    std::vector<SliceError> out;
    const double dx = (x_hi - x_lo) / static_cast<double>(nx - 1);
    for (double t : ts) {
        SliceError row;
        row.t = t;
        double sq = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = i + 1 == nx ? x_hi : x_lo + static_cast<double>(i) * dx;
            const double e = u(t, x) - ref(t, x);
            const double wgt = (i == 0 || i + 1 == nx) ? 0.5 : 1.0;
            sq += wgt * e * e * dx;
            row.linf = std::max(row.linf, std::abs(e));
        }
        row.l2 = std::sqrt(sq);
        out.push_back(row);
    }
    return out;
}

std::string slice_errors_csv(std::span<const SliceError> rows) {
    std::ostringstream os;
    os << "t,l2,linf\n";
    for (const auto& r : rows) os << fmt(r.t) << "," << fmt(r.l2) << "," << fmt(r.linf) << "\n";
    return os.str();
}

}  // namespace ritzkit
