#include "ritzkit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ritzkit/error.hpp"

namespace ritzkit {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

QuadraticObjective::QuadraticObjective(std::size_t n, double curvature,
                                       std::vector<double> center)
    : n_(n), curvature_(curvature), center_(std::move(center)) {
    if (center_.empty()) center_.assign(n_, 0.0);
    if (center_.size() != n_) throw DimensionError("quadratic center has wrong length");
}

double QuadraticObjective::value(std::span<const double> theta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += (theta[i] - center_[i]) * (theta[i] - center_[i]);
    return 0.5 * curvature_ * s;
}

double QuadraticObjective::value_and_gradient(std::span<const double> theta,
                                              std::span<double> grad) const {
    for (std::size_t i = 0; i < n_; ++i) grad[i] = curvature_ * (theta[i] - center_[i]);
    return value(theta);
}

// ---------------------------------------------------------------- L-BFGS

LbfgsResult lbfgs_minimize(const ValueGradFn& fg, std::vector<double> x0,
                           const LbfgsOptions& opt, LbfgsMemory* memory) {
    const std::size_t n = x0.size();
    LbfgsResult res;
    res.x = std::move(x0);
    res.grad.assign(n, 0.0);
    res.f = fg(res.x, res.grad);
    res.evaluations = 1;
    if (!std::isfinite(res.f)) throw NumericError("objective is not finite at the start point");
    const double f0 = res.f;

    LbfgsMemory local;
    LbfgsMemory& mem = memory ? *memory : local;
    if (!mem.s.empty() && mem.s.front().size() != n) mem = {};
    auto& S = mem.s;
    auto& Y = mem.y;
    auto& rho = mem.rho;
    std::vector<double> d(n), xn(n), gn(n), alpha_buf;
    res.converged = norm2(res.grad) <= opt.grad_tol;

    while (!res.converged && res.iters < opt.max_iters) {
        // Two-loop recursion for d = -H g.
        double gamma = opt.initial_scale;
        if (!S.empty()) gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
        for (std::size_t i = 0; i < n; ++i) d[i] = -res.grad[i];
        alpha_buf.assign(S.size(), 0.0);
        for (std::size_t k = S.size(); k-- > 0;) {
            alpha_buf[k] = rho[k] * dot(S[k], d);
            for (std::size_t i = 0; i < n; ++i) d[i] -= alpha_buf[k] * Y[k][i];
        }
        for (auto& v : d) v *= gamma;
        for (std::size_t k = 0; k < S.size(); ++k) {
            const double beta = rho[k] * dot(Y[k], d);
            for (std::size_t i = 0; i < n; ++i) d[i] += (alpha_buf[k] - beta) * S[k][i];
        }
        double gd = dot(res.grad, d);
        if (!(gd < 0.0)) {
            S.clear();
            Y.clear();
            rho.clear();
            for (std::size_t i = 0; i < n; ++i) d[i] = -opt.initial_scale * res.grad[i];
            gd = dot(res.grad, d);
        }

        // Weak Wolfe bracketing: Armijo decrease plus the curvature condition, which keeps
        // s.y > 0 for every accepted step even where the objective is not convex.
        double step = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
        bool accepted = false;
        double fn = 0.0, f_lo = 0.0;
        std::vector<double> x_lo, g_lo;
        for (std::size_t bt = 0; bt <= opt.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + step * d[i];
            fn = fg(xn, gn);
            ++res.evaluations;
            if (!std::isfinite(fn) || fn > res.f + opt.armijo * step * gd) {
                hi = step;
            } else if (dot(gn, d) < opt.wolfe * gd) {
                lo = step;
                f_lo = fn;
                x_lo = xn;
                g_lo = gn;
            } else {
                accepted = true;
                break;
            }
            step = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * lo;
        }
        if (!accepted && lo > 0.0) {
            // Budget spent inside the bracket; keep the best Armijo point.
            xn = std::move(x_lo);
            gn = std::move(g_lo);
            fn = f_lo;
            accepted = true;
        }
        if (!accepted) break;

        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = xn[i] - res.x[i];
            y[i] = gn[i] - res.grad[i];
        }
        const double sy = dot(s, y);
        if (sy > 1e-10 * norm2(s) * norm2(y)) {
            if (S.size() == opt.memory) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
            S.push_back(std::move(s));
            Y.push_back(std::move(y));
            rho.push_back(1.0 / sy);
        }
        res.x.swap(xn);
        res.grad.swap(gn);
        res.f = fn;
        ++res.iters;
        res.converged = norm2(res.grad) <= opt.grad_tol;
    }
    res.improved = res.f < f0;
    return res;
}

// ---------------------------------------------------------------- steps

IgdResult igd_step(const Objective& J, std::span<const double> theta_k, double eta,
                   const InnerOptions& inner, LbfgsMemory* memory) {
    if (!(eta > 0.0)) throw DataError("IGD step size must be positive");
    const std::size_t n = theta_k.size();
    if (n != J.size()) throw DimensionError("parameter vector has wrong length");
    const std::vector<double> center(theta_k.begin(), theta_k.end());
    auto prox = [&](std::span<const double> th, std::span<double> g) {
        double v = J.value_and_gradient(th, g);
        double q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = th[i] - center[i];
            q += diff * diff;
            g[i] += diff / eta;
        }
        return v + q / (2.0 * eta);
    };
    LbfgsOptions opt;
    opt.max_iters = inner.max_iters;
    opt.grad_tol = inner.grad_tol;
    opt.initial_scale = eta;
    LbfgsResult r = lbfgs_minimize(prox, center, opt, memory);

    IgdResult out;
    out.converged = r.converged;
    out.failed = !r.improved && !r.converged;
    out.inner_iters = r.iters;
    out.theta = std::move(r.x);
    out.grad.assign(n, 0.0);
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = out.theta[i] - center[i];
        q += diff * diff;
        out.grad[i] = r.grad[i] - diff / eta;
    }
    out.loss = r.f - q / (2.0 * eta);
    if (q == 0.0) out.loss = r.f;
    out.fixed_point_residual = eta * norm2(r.grad);
    return out;
}

std::vector<double> gd_step(const Objective& J, std::span<const double> theta_k, double eta) {
    if (!(eta > 0.0)) throw DataError("GD step size must be positive");
    std::vector<double> g(theta_k.size());
    J.value_and_gradient(theta_k, g);
    std::vector<double> out(theta_k.begin(), theta_k.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= eta * g[i];
    return out;
}

// ---------------------------------------------------------------- traces

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

TraceRecord make_record(std::size_t step, double time, double loss,
                        std::span<const double> grad, std::span<const double> theta,
                        std::size_t a_size) {
    TraceRecord r;
    r.step = step;
    r.time = time;
    r.loss = loss;
    r.grad_norm = norm2(grad);
    const std::size_t na = a_size == 0 ? theta.size() : std::min(a_size, theta.size());
    r.a_norm = norm2(theta.subspan(0, na));
    return r;
}

void push_record(TrainingTrace& tr, TraceRecord rec, std::span<const double> theta,
                 const RunOptions& opt) {
    tr.records.push_back(rec);
    if (opt.keep_iterates) tr.iterates.emplace_back(theta.begin(), theta.end());
    if (opt.on_record) opt.on_record(rec);
}

}  // namespace

std::string TrainingTrace::to_csv() const {
    const bool with_dist = !records.empty() &&
                           std::all_of(records.begin(), records.end(),
                                       [](const TraceRecord& r) { return r.dist.has_value(); });
    std::ostringstream os;
    os << "step,time,loss,grad_norm,a_norm" << (with_dist ? ",dist" : "") << "\n";
    for (const auto& r : records) {
        os << r.step << "," << fmt(r.time) << "," << fmt(r.loss) << "," << fmt(r.grad_norm)
           << "," << fmt(r.a_norm);
        if (with_dist) os << "," << fmt(*r.dist);
        os << "\n";
    }
    return os.str();
}

TrainingTrace TrainingTrace::from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw DataError("empty trace file");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            out.push_back(cell);
        }
        return out;
    };
    const auto header = split(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"step", "time", "loss"})
        if (!col.count(need)) throw DataError(std::string("trace is missing column ") + need);
    TrainingTrace tr;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw DataError("trace line " + std::to_string(lineno) + " has wrong column count");
        auto num = [&](const char* name) -> std::optional<double> {
            auto it = col.find(name);
            if (it == col.end()) return std::nullopt;
            try {
                return std::stod(cells[it->second]);
            } catch (const std::exception&) {
                throw DataError("trace line " + std::to_string(lineno) + ": bad number");
            }
        };
        TraceRecord r;
        r.step = static_cast<std::size_t>(*num("step"));
        r.time = *num("time");
        r.loss = *num("loss");
        r.grad_norm = num("grad_norm").value_or(0.0);
        r.a_norm = num("a_norm").value_or(0.0);
        r.dist = num("dist");
        tr.records.push_back(r);
    }
    return tr;
}

void TrainingTrace::backfill_distance(std::span<const double> theta_final) {
    if (iterates.size() != records.size())
        throw DataError("distance back-fill needs the stored iterates");
    for (std::size_t i = 0; i < records.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < theta_final.size(); ++j) {
            const double diff = iterates[i][j] - theta_final[j];
            s += diff * diff;
        }
        records[i].dist = std::sqrt(s);
    }
}

IgdRun run_igd(const Objective& J, std::vector<double> theta0, double eta, std::size_t steps,
               const InnerOptions& inner, const RunOptions& opt) {
    if (theta0.size() != J.size()) throw DimensionError("parameter vector has wrong length");
    const std::size_t stride = std::max<std::size_t>(1, opt.record_stride);
    IgdRun run;
    run.trace.scheme = "igd";
    run.trace.step_size = eta;
    run.theta = std::move(theta0);
    std::vector<double> g(run.theta.size());
    const double f0 = J.value_and_gradient(run.theta, g);
    push_record(run.trace, make_record(0, 0.0, f0, g, run.theta, opt.a_size), run.theta, opt);
    LbfgsMemory memory;
    for (std::size_t k = 1; k <= steps; ++k) {
        IgdResult r = igd_step(J, run.theta, eta, inner, inner.warm_start ? &memory : nullptr);
        if (!std::isfinite(r.loss)) throw NumericError("IGD produced a non-finite loss");
        run.theta = std::move(r.theta);
        auto& st = run.stats;
        ++st.steps;
        st.inner_iters_total += r.inner_iters;
        st.residuals.push_back(r.fixed_point_residual);
        st.converged.push_back(r.converged);
        st.max_residual = std::max(st.max_residual, r.fixed_point_residual);
        if (r.converged) {
            ++st.converged_steps;
            st.max_converged_residual = std::max(st.max_converged_residual,
                                                 r.fixed_point_residual);
        }
        if (r.failed) ++st.failed_steps;
        if (k % stride == 0 || k == steps)
            push_record(run.trace,
                        make_record(k, static_cast<double>(k) * eta, r.loss, r.grad, run.theta,
                                    opt.a_size),
                        run.theta, opt);
        if (opt.observer) opt.observer(k, run.theta);
    }
    return run;
}

TrainingTrace run_gd(const Objective& J, std::vector<double>& theta, double eta,
                     std::size_t steps, const RunOptions& opt) {
    if (theta.size() != J.size()) throw DimensionError("parameter vector has wrong length");
    if (!(eta > 0.0)) throw DataError("GD step size must be positive");
    const std::size_t stride = std::max<std::size_t>(1, opt.record_stride);
    TrainingTrace tr;
    tr.scheme = "gd";
    tr.step_size = eta;
    std::vector<double> g(theta.size());
    double f = J.value_and_gradient(theta, g);
    push_record(tr, make_record(0, 0.0, f, g, theta, opt.a_size), theta, opt);
    for (std::size_t k = 1; k <= steps; ++k) {
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= eta * g[i];
        f = J.value_and_gradient(theta, g);
        if (!std::isfinite(f)) throw NumericError("gradient descent produced a non-finite loss");
        if (k % stride == 0 || k == steps)
            push_record(tr, make_record(k, static_cast<double>(k) * eta, f, g, theta, opt.a_size),
                        theta, opt);
        if (opt.observer) opt.observer(k, theta);
    }
    return tr;
}

FlowRun gradient_flow(const Objective& J, std::vector<double> theta0, double T, double dt,
                      const FlowOptions& opt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw DataError("gradient flow needs T > 0 and dt > 0");
    const std::size_t n = theta0.size();
    if (n != J.size()) throw DimensionError("parameter vector has wrong length");
    const std::size_t stride = std::max<std::size_t>(1, opt.run.record_stride);
    FlowRun run;
    run.trace.scheme = "gradient_flow";
    run.trace.step_size = dt;
    run.theta = std::move(theta0);
    std::vector<double> g(n), gn(n), k2(n), k3(n), k4(n), tmp(n), next(n);
    double f = J.value_and_gradient(run.theta, g);
    push_record(run.trace, make_record(0, 0.0, f, g, run.theta, opt.run.a_size), run.theta,
                opt.run);

    double t = 0.0;
    double h_cur = dt;
    std::size_t step = 0;
    bool last_recorded = true;
    const double t_eps = 1e-12 * T;
    while (T - t > t_eps) {
        if (opt.stop_loss && f <= *opt.stop_loss) break;
        const double h = std::min(h_cur, T - t);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = run.theta[i] - 0.5 * h * g[i];
        J.value_and_gradient(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = run.theta[i] - 0.5 * h * k2[i];
        J.value_and_gradient(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = run.theta[i] - h * k3[i];
        J.value_and_gradient(tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            next[i] = run.theta[i] - h / 6.0 * (g[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        const double fn = J.value_and_gradient(next, gn);
        if (!(fn <= f + 1e-12 * std::abs(f))) {
            h_cur *= 0.5;
            ++run.halvings;
            if (h_cur < 1e-12 * dt)
                throw StepUnderflow("gradient-flow step fell below 1e-12 of the initial step");
            continue;
        }
        run.theta.swap(next);
        g.swap(gn);
        f = fn;
        t += h;
        ++step;
        last_recorded = false;
        if (step % stride == 0) {
            push_record(run.trace, make_record(step, t, f, g, run.theta, opt.run.a_size),
                        run.theta, opt.run);
            last_recorded = true;
        }
        if (opt.run.observer) opt.run.observer(step, run.theta);
    }
    if (!last_recorded)
        push_record(run.trace, make_record(step, t, f, g, run.theta, opt.run.a_size), run.theta,
                    opt.run);
    run.final_dt = h_cur;
    return run;
}

// ---------------------------------------------------------------- rate fitting

const char* to_string(RateRegime r) {
    switch (r) {
        case RateRegime::power: return "power";
        case RateRegime::exponential: return "exponential";
        case RateRegime::undetermined: return "undetermined";
    }
    return "?";
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
    return f;
}

struct ModelFits {
    LineFit power;
    LineFit expo;
    std::size_t used = 0;
    double best() const { return std::max(power.r2, expo.r2); }
};

ModelFits fit_models(std::span<const double> t, std::span<const double> J, double floor) {
    std::vector<double> lt, tt, lz;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double gap = J[i] - floor;
        if (!(gap > 0.0)) continue;
        lt.push_back(std::log(t[i]));
        tt.push_back(t[i]);
        lz.push_back(std::log(gap));
    }
    ModelFits m;
    m.used = lz.size();
    if (m.used < 3) return m;
    m.power = fit_line(lt, lz);
    m.expo = fit_line(tt, lz);
    return m;
}

// A tail whose spread is below this fraction of its level is flat (rounding noise).
constexpr double kFlatRel = 1e-12;
constexpr double kTieR2 = 1e-9;

}  // namespace

std::string RateFit::to_json() const {
    nlohmann::ordered_json j;
    j["regime"] = to_string(regime);
    if (std::isfinite(epsilon)) j["epsilon"] = epsilon;
    else j["epsilon"] = nullptr;
    j["C"] = C;
    j["r2"] = r2;
    j["r2_power"] = r2_power;
    j["r2_exponential"] = r2_exponential;
    j["slope"] = slope;
    j["floor"] = floor;
    j["floor_estimated"] = floor_estimated;
    j["tail_begin"] = tail_begin;
    j["tail_count"] = tail_count;
    if (epsilon_distance) j["epsilon_distance"] = *epsilon_distance;
    return j.dump(2);
}

RateFit fit_rate(const TrainingTrace& trace, const RateFitOptions& opt) {
    const auto& recs = trace.records;
    const std::size_t n = recs.size();
    const std::size_t tail_len = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * opt.tail_fraction));
    RateFit fit;
    fit.tail_begin = n - tail_len;
    std::vector<double> t, J;
    for (std::size_t i = fit.tail_begin; i < n; ++i) {
        if (!(recs[i].time > 0.0) || !std::isfinite(recs[i].loss)) continue;
        t.push_back(recs[i].time);
        J.push_back(recs[i].loss);
    }
    fit.tail_count = t.size();
    if (t.size() < opt.min_tail)
        throw InsufficientTail("rate fit needs at least " + std::to_string(opt.min_tail) +
                               " tail records, got " + std::to_string(t.size()));

    const double jmin = *std::min_element(J.begin(), J.end());
    const double jmax = *std::max_element(J.begin(), J.end());
    auto undetermined = [&](double floor) {
        fit.regime = RateRegime::undetermined;
        fit.epsilon = std::numeric_limits<double>::quiet_NaN();
        fit.floor = floor;
        return fit;
    };

    double floor = 0.0;
    if (opt.floor) {
        floor = *opt.floor;
        if (!(jmax - floor > 0.0) || jmax - jmin <= kFlatRel * (jmax - floor))
            return undetermined(floor);
    } else {
        fit.floor_estimated = true;
        const double range = jmax - jmin;
        if (range <= kFlatRel * std::max(std::abs(jmax), std::abs(jmin))) return undetermined(jmin);
        // Profile the floor: the limit value that makes the tail most nearly a power law or
        // an exponential in its gap.
        std::vector<double> candidates;
        if (jmin > 0.0) candidates.push_back(0.0);
        for (int k = 0; k <= 48; ++k) candidates.push_back(jmin - range * std::pow(10.0, -k / 4.0));
        double best = -1.0;
        for (double c : candidates) {
            const ModelFits m = fit_models(t, J, c);
            if (m.used < opt.min_tail) continue;
            if (m.best() > best + kTieR2) {
                best = m.best();
                floor = c;
            }
        }
        if (best < 0.0) throw InsufficientTail("no usable floor for the rate fit");
    }
    fit.floor = floor;
    const ModelFits m = fit_models(t, J, floor);
    if (m.used < opt.min_tail)
        throw InsufficientTail("too few records above the loss floor for the rate fit");
    fit.r2_power = m.power.r2;
    fit.r2_exponential = m.expo.r2;
    if (m.power.r2 > m.expo.r2 + kTieR2) {
        fit.regime = RateRegime::power;
        fit.r2 = m.power.r2;
        fit.slope = m.power.slope;
        fit.C = std::exp(m.power.intercept);
        const double s = -m.power.slope;
        double eps = s > 0.0 ? 0.5 * (1.0 - 1.0 / s) : 0.0;
        fit.epsilon = std::clamp(eps, 1e-6, 0.5 - 1e-12);
    } else {
        fit.regime = RateRegime::exponential;
        fit.r2 = m.expo.r2;
        fit.slope = m.expo.slope;
        fit.C = std::exp(m.expo.intercept);
        fit.epsilon = 0.5;
    }

    // Distance rate ||theta - theta_final|| ~ t^{-q}, q = eps / (1 - 2 eps); the last 5% of
    // records are skipped since they sit on top of the final iterate.
    const std::size_t cut = n - static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n)));
    std::vector<double> lt, ld;
    for (std::size_t i = fit.tail_begin; i < cut; ++i) {
        if (!recs[i].dist || !(*recs[i].dist > 0.0) || !(recs[i].time > 0.0)) continue;
        lt.push_back(std::log(recs[i].time));
        ld.push_back(std::log(*recs[i].dist));
    }
    if (lt.size() >= 3) {
        const LineFit lf = fit_line(lt, ld);
        const double q = -lf.slope;
        if (q > 0.0) fit.epsilon_distance = q / (1.0 + 2.0 * q);
    }
    return fit;
}

}  // namespace ritzkit
