#include "ritzkit/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "ritzkit/error.hpp"
#include "ritzkit/reference.hpp"

namespace ritzkit {

using json = nlohmann::ordered_json;

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::igd: return "igd";
        case Scheme::gd: return "gd";
        case Scheme::gradient_flow: return "gradient_flow";
    }
    return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

bool is_comment(const std::string& key) { return key.rfind("comment", 0) == 0; }

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (is_comment(key)) continue;
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(path, "unknown key '" + key + "'");
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const std::string& path) {
    const json* v = find(obj, key);
    if (!v) fail(path, std::string("missing key '") + key + "'");
    return *v;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
}

double number_or(const json& obj, const char* key, const std::string& path, double dflt) {
    const json* v = find(obj, key);
    return v ? number(*v, path + "." + key) : dflt;
}

std::uint64_t count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::uint64_t count_or(const json& obj, const char* key, const std::string& path,
                       std::uint64_t dflt) {
    const json* v = find(obj, key);
    return v ? count(*v, path + "." + key) : dflt;
}

bool bool_or(const json& obj, const char* key, const std::string& path, bool dflt) {
    const json* v = find(obj, key);
    if (!v) return dflt;
    if (!v->is_boolean()) fail(path + "." + key, "expected true or false");
    return v->get<bool>();
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Domain parse_domain(const json& j, const std::string& path) {
    const std::string kind = text(require(j, "kind", path), path + ".kind");
    if (kind == "time_slab") {
        check_keys(j, path, {"kind", "t", "x"});
        const auto t = numbers(require(j, "t", path), path + ".t");
        if (t.size() != 2 || !(t[0] < t[1])) fail(path + ".t", "expected [t0, t1] with t0 < t1");
        const json& x = require(j, "x", path);
        if (!x.is_array() || x.empty()) fail(path + ".x", "expected a list of [lo, hi] intervals");
        std::vector<double> lo, hi;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const std::string ip = path + ".x[" + std::to_string(i) + "]";
            const auto iv = numbers(x[i], ip);
            if (iv.size() != 2 || !(iv[0] < iv[1])) fail(ip, "expected [lo, hi] with lo < hi");
            lo.push_back(iv[0]);
            hi.push_back(iv[1]);
        }
        return Domain::time_slab(t[0], t[1], lo, hi);
    }
    if (kind == "hyperrectangle") {
        check_keys(j, path, {"kind", "lo", "hi", "gamma"});
        const auto lo = numbers(require(j, "lo", path), path + ".lo");
        const auto hi = numbers(require(j, "hi", path), path + ".hi");
        if (lo.size() != hi.size()) fail(path, "lo and hi differ in length");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) fail(path, "empty side");
        std::size_t axis = lo.size() - 1;
        bool upper = false;
        if (const json* g = find(j, "gamma")) {
            const std::string gp = path + ".gamma";
            check_keys(*g, gp, {"axis", "side"});
            axis = count_or(*g, "axis", gp, axis);
            if (axis >= lo.size()) fail(gp + ".axis", "axis out of range");
            if (const json* s = find(*g, "side")) {
                const std::string side = text(*s, gp + ".side");
                if (side != "lower" && side != "upper") fail(gp + ".side", "lower or upper");
                upper = side == "upper";
            }
        }
        return Domain::hyperrectangle(lo, hi, axis, upper);
    }
    fail(path + ".kind", "unknown domain kind '" + kind + "'");
}

ScalarField parse_field(const json& v, const std::string& path) {
    if (v.is_number()) return ScalarField(number(v, path));
    if (v.is_string()) {
        try {
            return builtin_field(v.get<std::string>());
        } catch (const ConfigError& e) {
            fail(path, e.what());
        }
    }
    fail(path, "expected a number or a field name");
}

ScalarFunction parse_h(const json& obj, const std::string& path) {
    const json* v = find(obj, "h");
    if (!v) return ScalarFunction::zero();
    const std::string name = text(*v, path + ".h");
    if (name == "zero") return ScalarFunction::zero();
    if (name == "cubic") return ScalarFunction::cubic();
    fail(path + ".h", "unknown nonlinearity '" + name + "' (zero or cubic)");
}

RobinSpec parse_robin(const json& v, const std::string& path) {
    RobinSpec r;
    if (v.is_array()) {
        const auto ab = numbers(v, path);
        if (ab.size() != 2) fail(path, "expected [alpha, beta]");
        r.alpha = ab[0];
        r.beta = ab[1];
    } else {
        check_keys(v, path, {"alpha", "beta"});
        r.alpha = number_or(v, "alpha", path, 1.0);
        r.beta = number_or(v, "beta", path, 0.0);
    }
    try {
        r.validate();
    } catch (const Error& e) {
        fail(path, e.what());
    }
    return r;
}

void parse_operator(const json& j, const std::string& path, std::size_t d, ProblemConfig& pc) {
    const std::string type = text(require(j, "type", path), path + ".type");
    try {
        if (type == "burgers") {
            check_keys(j, path, {"type", "nu"});
            double nu = burgers_benchmark_viscosity();
            if (const json* v = find(j, "nu")) {
                if (!(v->is_string() && v->get<std::string>() == "benchmark"))
                    nu = number(*v, path + ".nu");
            }
            pc.kind = LossKind::pinn_nonlinear;
            pc.nonlinear = NonlinearOperatorSpec::burgers(nu);
        } else if (type == "p_laplace" || type == "quasilinear") {
            check_keys(j, path, {"type", "p", "q", "h"});
            const double q = number_or(j, "q", path, 0.0);
            pc.kind = LossKind::pinn_nonlinear;
            if (type == "p_laplace")
                pc.nonlinear = NonlinearOperatorSpec::p_laplace(number_or(j, "p", path, 2.0), q,
                                                                parse_h(j, path));
            else {
                if (find(j, "p")) fail(path + ".p", "quasilinear operators have no exponent");
                pc.nonlinear = NonlinearOperatorSpec::quasilinear(q, parse_h(j, path));
            }
        } else if (type == "heat" || type == "laplacian" || type == "identity") {
            check_keys(j, path, {"type"});
            pc.kind = LossKind::pinn_linear;
            pc.linear = type == "heat"        ? LinearOperatorSpec::heat(d)
                        : type == "laplacian" ? LinearOperatorSpec::laplacian(d)
                                              : LinearOperatorSpec::identity(d);
        } else if (type == "linear") {
            check_keys(j, path, {"type", "terms", "require_admissible"});
            const json& terms = require(j, "terms", path);
            if (!terms.is_array() || terms.empty()) fail(path + ".terms", "expected a list");
            std::vector<LinearTerm> out;
            for (std::size_t k = 0; k < terms.size(); ++k) {
                const std::string tp = path + ".terms[" + std::to_string(k) + "]";
                check_keys(terms[k], tp, {"xi", "coeff"});
                const json& xi = require(terms[k], "xi", tp);
                if (!xi.is_array() || xi.size() != d) fail(tp + ".xi", "expected d entries");
                std::vector<int> idx;
                for (const auto& e : xi) idx.push_back(static_cast<int>(count(e, tp + ".xi")));
                out.push_back({MultiIndex(idx), parse_field(require(terms[k], "coeff", tp),
                                                            tp + ".coeff")});
            }
            pc.kind = LossKind::pinn_linear;
            pc.linear = LinearOperatorSpec(std::move(out),
                                           bool_or(j, "require_admissible", path, true));
        } else {
            fail(path + ".type", "unknown operator type '" + type + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

ProblemConfig parse_problem(const json& j, const std::string& path, const Domain& domain) {
    check_keys(j, path, {"kind", "operator", "energy", "f", "g", "manufactured", "robin",
                         "lambda", "cutoff"});
    const std::size_t d = domain.dim();
    ProblemConfig pc;
    const std::string kind = text(require(j, "kind", path), path + ".kind");
    if (kind == "pinn") {
        if (find(j, "energy")) fail(path + ".energy", "only for kind ritz");
        parse_operator(require(j, "operator", path), path + ".operator", d, pc);
    } else if (kind == "ritz") {
        if (find(j, "operator")) fail(path + ".operator", "only for kind pinn");
        const json& e = require(j, "energy", path);
        const std::string ep = path + ".energy";
        check_keys(e, ep, {"type", "p", "f", "epsilon"});
        EnergySpec es;
        const std::string type = text(require(e, "type", ep), ep + ".type");
        if (type == "allen_cahn") {
            es.kind = EnergyKind::allen_cahn;
            es.epsilon = number_or(e, "epsilon", ep, es.epsilon);
            if (find(e, "p") || find(e, "f")) fail(ep, "allen_cahn takes only epsilon");
        } else if (type == "p_laplace") {
            es.kind = EnergyKind::p_laplace;
            es.p = number_or(e, "p", ep, 2.0);
            if (const json* f = find(e, "f")) es.f = parse_field(*f, ep + ".f");
            if (find(e, "epsilon")) fail(ep + ".epsilon", "only for allen_cahn");
        } else {
            fail(ep + ".type", "unknown energy '" + type + "'");
        }
        try {
            es.validate();
        } catch (const Error& err) {
            fail(ep, err.what());
        }
        pc.kind = LossKind::ritz;
        pc.energy = es;
    } else {
        fail(path + ".kind", "expected pinn or ritz");
    }

    if (const json* r = find(j, "robin")) pc.robin = parse_robin(*r, path + ".robin");
    pc.lambda = number_or(j, "lambda", path, 1.0);
    if (!(pc.lambda > 0.0)) fail(path + ".lambda", "must be positive");
    if (const json* c = find(j, "cutoff")) {
        check_keys(*c, path + ".cutoff", {"margin_fraction"});
        const double margin = number_or(*c, "margin_fraction", path + ".cutoff", 0.1);
        if (!(margin > 0.0 && margin < 0.5)) fail(path + ".cutoff", "margin in (0, 0.5)");
        std::vector<double> lo(domain.lo().begin(), domain.lo().end());
        std::vector<double> hi(domain.hi().begin(), domain.hi().end());
        pc.cutoff = CutoffSpec(lo, hi, margin);
    }

    if (const json* m = find(j, "manufactured")) {
        const std::string id = text(*m, path + ".manufactured");
        if (!pc.linear) fail(path + ".manufactured", "needs a linear operator");
        if (find(j, "f") || find(j, "g"))
            fail(path, "f and g are derived from the manufactured solution");
        try {
            auto mp = manufactured_linear(id, *pc.linear, domain, pc.robin);
            pc.f = mp.f;
            pc.g = mp.g;
        } catch (const Error& e) {
            fail(path + ".manufactured", e.what());
        }
        pc.manufactured = id;
    } else {
        if (const json* f = find(j, "f")) pc.f = parse_field(*f, path + ".f");
        if (const json* g = find(j, "g")) pc.g = parse_field(*g, path + ".g");
    }
    return pc;
}

GramProvenance parse_provenance(const json& v, const std::string& path) {
    const std::string s = text(v, path);
    for (auto p : {GramProvenance::interior_outer, GramProvenance::boundary_outer,
                   GramProvenance::full_w, GramProvenance::full_a})
        if (s == to_string(p)) return p;
    fail(path, "unknown Gram '" + s + "'");
}

}  // namespace

ExperimentConfig parse_config(const json& doc, std::optional<std::uint64_t> seed_override) {
    const std::string root = "config";
    check_keys(doc, root, {"name", "seed", "domain", "problem", "collocation", "network",
                           "dynamics", "diagnostics", "audit", "output_dir"});
    ExperimentConfig cfg;
    cfg.name = text(require(doc, "name", root), "config.name");
    if (cfg.name.empty()) fail("config.name", "must not be empty");
    cfg.seed = seed_override ? *seed_override : count_or(doc, "seed", root, 0);
    cfg.domain = parse_domain(require(doc, "domain", root), "config.domain");
    const Domain& domain = *cfg.domain;
    const std::size_t d = domain.dim();
    if (const json* o = find(doc, "output_dir")) cfg.output_dir = text(*o, "config.output_dir");
    if (cfg.output_dir.empty()) cfg.output_dir = "runs/" + cfg.name;

    const json* problem = find(doc, "problem");
    const json* audit = find(doc, "audit");
    if (!problem && !audit) fail(root, "needs a problem section, an audit section or both");

    if (problem) {
        cfg.problem = parse_problem(*problem, "config.problem", domain);
        const auto& pc = *cfg.problem;

        const json& col = require(doc, "collocation", root);
        check_keys(col, "config.collocation", {"interior", "boundary"});
        cfg.n_interior = count(require(col, "interior", "config.collocation"),
                               "config.collocation.interior");
        cfg.n_boundary = count_or(col, "boundary", "config.collocation", 0);
        if (cfg.n_interior == 0) fail("config.collocation.interior", "must be at least 1");
        if (cfg.n_boundary == 0 && !pc.cutoff)
            fail("config.collocation.boundary", "must be at least 1 unless a cutoff is used");

        const json& net = require(doc, "network", root);
        const std::string np = "config.network";
        check_keys(net, np, {"width", "init", "delta", "normal_axis", "trainable"});
        cfg.width = count(require(net, "width", np), np + ".width");
        if (cfg.width == 0) fail(np + ".width", "must be at least 1");
        const std::string init = text(require(net, "init", np), np + ".init");
        if (init == "ntk") cfg.init.kind = InitKind::ntk;
        else if (init == "random_feature") cfg.init.kind = InitKind::random_feature;
        else if (init == "small_normal") cfg.init.kind = InitKind::small_normal;
        else fail(np + ".init", "unknown init '" + init + "'");
        cfg.init.seed = cfg.seed;
        cfg.init.delta = number_or(net, "delta", np, cfg.init.delta);
        cfg.init.normal_axis = count_or(net, "normal_axis", np, domain.gamma().axis);
        if (*cfg.init.normal_axis >= d) fail(np + ".normal_axis", "axis out of range");
        try {
            cfg.init.validate();
        } catch (const Error& e) {
            fail(np, e.what());
        }
        if (const json* t = find(net, "trainable")) {
            const std::string s = text(*t, np + ".trainable");
            if (s == "full") cfg.trainable = Trainable::full;
            else if (s == "outer_only") cfg.trainable = Trainable::outer_only;
            else fail(np + ".trainable", "full or outer_only");
        }

        const json& dyn = require(doc, "dynamics", root);
        const std::string dp = "config.dynamics";
        check_keys(dyn, dp, {"scheme", "eta", "steps", "inner", "dt", "horizon",
                             "stop_loss_factor", "record_stride"});
        auto& dc = cfg.dynamics;
        const std::string scheme = text(require(dyn, "scheme", dp), dp + ".scheme");
        if (scheme == "igd") dc.scheme = Scheme::igd;
        else if (scheme == "gd") dc.scheme = Scheme::gd;
        else if (scheme == "gradient_flow") dc.scheme = Scheme::gradient_flow;
        else fail(dp + ".scheme", "igd, gd or gradient_flow");
        dc.record_stride = count_or(dyn, "record_stride", dp, 1);
        if (dc.record_stride == 0) fail(dp + ".record_stride", "must be at least 1");
        if (dc.scheme == Scheme::gradient_flow) {
            for (const char* k : {"eta", "steps", "inner"})
                if (find(dyn, k)) fail(dp + "." + k, "not used by gradient_flow");
            dc.dt = number(require(dyn, "dt", dp), dp + ".dt");
            dc.horizon = number(require(dyn, "horizon", dp), dp + ".horizon");
            if (!(dc.dt > 0.0) || !(dc.horizon > 0.0)) fail(dp, "dt and horizon must be positive");
            if (const json* s = find(dyn, "stop_loss_factor")) {
                dc.stop_loss_factor = number(*s, dp + ".stop_loss_factor");
                if (!(*dc.stop_loss_factor > 1.0)) fail(dp + ".stop_loss_factor", "must exceed 1");
            }
        } else {
            for (const char* k : {"dt", "horizon", "stop_loss_factor"})
                if (find(dyn, k)) fail(dp + "." + k, "only used by gradient_flow");
            dc.eta = number(require(dyn, "eta", dp), dp + ".eta");
            if (!(dc.eta > 0.0)) fail(dp + ".eta", "must be positive");
            dc.steps = count(require(dyn, "steps", dp), dp + ".steps");
            if (const json* in = find(dyn, "inner")) {
                if (dc.scheme != Scheme::igd) fail(dp + ".inner", "only used by igd");
                check_keys(*in, dp + ".inner", {"max_iters", "grad_tol", "warm_start"});
                dc.inner.max_iters = count_or(*in, "max_iters", dp + ".inner", 10);
                dc.inner.grad_tol = number_or(*in, "grad_tol", dp + ".inner", 1e-8);
                dc.inner.warm_start = bool_or(*in, "warm_start", dp + ".inner", false);
                if (dc.inner.max_iters == 0 || !(dc.inner.grad_tol > 0.0))
                    fail(dp + ".inner", "max_iters >= 1 and grad_tol > 0");
            }
        }

        if (const json* diag = find(doc, "diagnostics")) {
            const std::string gp = "config.diagnostics";
            check_keys(*diag, gp, {"gram_stride", "grams", "full_gram_init", "rate_fit",
                                   "dump_matrices"});
            auto& dg = cfg.diagnostics;
            dg.gram_stride = count_or(*diag, "gram_stride", gp, 0);
            if (const json* g = find(*diag, "grams")) {
                if (!g->is_array()) fail(gp + ".grams", "expected a list");
                for (std::size_t i = 0; i < g->size(); ++i)
                    dg.grams.push_back(
                        parse_provenance((*g)[i], gp + ".grams[" + std::to_string(i) + "]"));
            } else if (dg.gram_stride > 0) {
                dg.grams = {GramProvenance::interior_outer, GramProvenance::boundary_outer};
            }
            dg.full_gram_init = bool_or(*diag, "full_gram_init", gp, false);
            dg.dump_matrices = bool_or(*diag, "dump_matrices", gp, false);
            if (const json* r = find(*diag, "rate_fit")) {
                if (r->is_boolean()) {
                    dg.rate_fit = r->get<bool>();
                } else {
                    check_keys(*r, gp + ".rate_fit", {"floor", "tail_fraction", "min_tail"});
                    dg.rate_fit = true;
                    if (const json* f = find(*r, "floor"))
                        dg.rate.floor = number(*f, gp + ".rate_fit.floor");
                    dg.rate.tail_fraction =
                        number_or(*r, "tail_fraction", gp + ".rate_fit", dg.rate.tail_fraction);
                    dg.rate.min_tail = count_or(*r, "min_tail", gp + ".rate_fit", dg.rate.min_tail);
                    if (!(dg.rate.tail_fraction > 0.0 && dg.rate.tail_fraction <= 1.0))
                        fail(gp + ".rate_fit.tail_fraction", "must lie in (0, 1]");
                }
            }
            const bool full = cfg.trainable ? *cfg.trainable == Trainable::full
                                            : cfg.init.kind == InitKind::ntk;
            for (auto p : dg.grams) {
                if ((p == GramProvenance::full_w || p == GramProvenance::full_a) && !full)
                    fail(gp + ".grams", "full Gram matrices need full training");
                if (p == GramProvenance::boundary_outer && cfg.n_boundary == 0)
                    fail(gp + ".grams", "no boundary points for boundary_outer");
            }
            if (dg.full_gram_init && !full)
                fail(gp + ".full_gram_init", "full Gram matrices need full training");
        }

        // Catch operator / domain / cutoff mismatches now rather than at run time.
        try {
            build_loss(cfg, sample(domain, 1, pc.cutoff ? 0 : 1, cfg.seed)).validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            fail("config.problem", e.what());
        }
    } else {
        for (const char* k : {"collocation", "network", "dynamics", "diagnostics"})
            if (find(doc, k)) fail(std::string("config.") + k, "needs a problem section");
    }

    if (audit) {
        const std::string ap = "config.audit";
        check_keys(*audit, ap, {"trials", "width", "robin", "random_vectors",
                                "quadrature_points", "duplicate_control"});
        AuditConfig ac;
        ac.trials = count_or(*audit, "trials", ap, ac.trials);
        ac.width = count_or(*audit, "width", ap, ac.width);
        ac.random_vectors = count_or(*audit, "random_vectors", ap, ac.random_vectors);
        if (const json* q = find(*audit, "quadrature_points"))
            ac.quadrature_points = count(*q, ap + ".quadrature_points");
        ac.duplicate_control = bool_or(*audit, "duplicate_control", ap, true);
        if (const json* r = find(*audit, "robin")) {
            if (!r->is_array() || r->empty()) fail(ap + ".robin", "expected a list");
            for (std::size_t i = 0; i < r->size(); ++i)
                ac.robin.push_back(parse_robin((*r)[i], ap + ".robin[" + std::to_string(i) + "]"));
        } else {
            ac.robin = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
        }
        if (ac.trials == 0 || ac.width == 0) fail(ap, "trials and width must be positive");
        if (d < 2) fail(ap, "the audit needs d >= 2");
        if (ac.quadrature_points && *ac.quadrature_points < ac.width)
            fail(ap + ".quadrature_points", "need at least width points");
        cfg.audit = ac;
    }

    cfg.resolved = doc;
    cfg.resolved["seed"] = cfg.seed;
    cfg.resolved["output_dir"] = cfg.output_dir;
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/false);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(doc, seed_override);
}

CollocationSet build_collocation(const ExperimentConfig& cfg) {
    if (!cfg.has_training()) throw ConfigError("config has no problem section");
    return sample(*cfg.domain, cfg.n_interior, cfg.problem->cutoff ? 0 : cfg.n_boundary,
                  cfg.seed);
}

LossSpec build_loss(const ExperimentConfig& cfg, CollocationSet pts) {
    if (!cfg.has_training()) throw ConfigError("config has no problem section");
    const auto& pc = *cfg.problem;
    LossSpec spec;
    switch (pc.kind) {
        case LossKind::pinn_linear:
            spec = LossSpec::pinn(*pc.linear, std::move(pts), pc.f, pc.g, pc.robin, pc.lambda);
            break;
        case LossKind::pinn_nonlinear:
            spec = LossSpec::pinn(*pc.nonlinear, std::move(pts), pc.f, pc.g, pc.robin,
                                  pc.lambda);
            break;
        case LossKind::ritz:
            spec = LossSpec::ritz(*pc.energy, std::move(pts), pc.g, pc.robin, pc.lambda);
            break;
    }
    spec.cutoff = pc.cutoff;
    return spec;
}

NetworkParams build_network(const ExperimentConfig& cfg) {
    if (!cfg.has_training()) throw ConfigError("config has no problem section");
    NetworkParams p = initialize(cfg.init, cfg.width, cfg.domain->dim());
    if (cfg.trainable) p.trainable = *cfg.trainable;
    return p;
}

}  // namespace ritzkit
