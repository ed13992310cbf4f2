#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ritzkit/loss.hpp"

namespace ritzkit {

/// J(theta) = 1/2 ||theta - center||^2 scaled by curvature; a toy objective for the
/// integrators and for checking closed forms.
class QuadraticObjective final : public Objective {
public:
    explicit QuadraticObjective(std::size_t n, double curvature = 1.0,
                                std::vector<double> center = {});
    std::size_t size() const override { return n_; }
    double value(std::span<const double> theta) const override;
    double value_and_gradient(std::span<const double> theta,
                              std::span<double> grad) const override;

private:
    std::size_t n_;
    double curvature_;
    std::vector<double> center_;
};

// ---------------------------------------------------------------- quasi-Newton

struct LbfgsOptions {
    std::size_t memory = 10;
    std::size_t max_iters = 10;
    double grad_tol = 1e-8;
    double armijo = 1e-4;
    double wolfe = 0.9;                // curvature condition constant
    std::size_t max_backtracks = 30;   // line-search evaluations beyond the first
    double initial_scale = 1.0;  // inverse-Hessian scale before any curvature pair
};

struct LbfgsResult {
    std::vector<double> x;
    double f = 0.0;
    std::vector<double> grad;
    std::size_t iters = 0;
    std::size_t evaluations = 0;
    bool converged = false;  // ||grad|| <= grad_tol at exit
    bool improved = false;   // f decreased below its starting value
};

using ValueGradFn = std::function<double(std::span<const double>, std::span<double>)>;

/// Curvature pairs (s, y) with rho = 1 / s.y, oldest first.
struct LbfgsMemory {
    std::deque<std::vector<double>> s;
    std::deque<std::vector<double>> y;
    std::deque<double> rho;
};

/// Limited-memory BFGS with a weak Wolfe line search; never returns a point worse than x0.
/// When memory is given, its pairs seed the inverse-Hessian model and the final pairs are
/// left in it.
LbfgsResult lbfgs_minimize(const ValueGradFn& fg, std::vector<double> x0,
                           const LbfgsOptions& opt, LbfgsMemory* memory = nullptr);

// ---------------------------------------------------------------- steps

struct InnerOptions {
    std::size_t max_iters = 10;
    double grad_tol = 1e-8;
    /// Keep the inner curvature pairs from one IGD step to the next. The proximal Hessian
    /// H + I / eta is the same function at every step, so old pairs remain valid models.
    bool warm_start = false;
};

struct IgdResult {
    std::vector<double> theta;
    double loss = 0.0;
    std::vector<double> grad;      // grad J at the returned theta
    bool converged = false;        // proximal gradient <= grad_tol
    bool failed = false;           // no improving step; theta is theta_k
    std::size_t inner_iters = 0;
    double fixed_point_residual = 0.0;  // ||theta - theta_k + eta grad J(theta)||
};

/// Implicit step theta = theta_k - eta grad J(theta), solved as the proximal problem
/// min J(theta) + ||theta - theta_k||^2 / (2 eta) by L-BFGS started at theta_k.
IgdResult igd_step(const Objective& J, std::span<const double> theta_k, double eta,
                   const InnerOptions& inner = {}, LbfgsMemory* memory = nullptr);

std::vector<double> gd_step(const Objective& J, std::span<const double> theta_k, double eta);

// ---------------------------------------------------------------- traces

struct TraceRecord {
    std::size_t step = 0;
    double time = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double a_norm = 0.0;
    std::optional<double> dist;  // ||theta - theta_final||, back-filled
};

struct TrainingTrace {
    std::string scheme;
    std::uint64_t seed = 0;
    double step_size = 0.0;
    std::vector<TraceRecord> records;
    std::vector<std::vector<double>> iterates;  // kept only on request

    /// Columns step,time,loss,grad_norm,a_norm (+ dist when back-filled).
    std::string to_csv() const;
    static TrainingTrace from_csv(const std::string& text);
    void backfill_distance(std::span<const double> theta_final);
};

struct RunOptions {
    std::size_t a_size = 0;        // leading entries of theta forming a; 0 means all
    std::size_t record_stride = 1;
    bool keep_iterates = false;
    /// Called after every accepted step with the step index and the new theta.
    std::function<void(std::size_t, std::span<const double>)> observer;
    /// Called for every record as it is appended (lets callers keep partial traces).
    std::function<void(const TraceRecord&)> on_record;
};

struct IgdRunStats {
    std::size_t steps = 0;
    std::size_t converged_steps = 0;
    std::size_t failed_steps = 0;
    std::size_t inner_iters_total = 0;
    double max_converged_residual = 0.0;  // over converged steps
    double max_residual = 0.0;
    std::vector<double> residuals;
    std::vector<bool> converged;
};

struct IgdRun {
    std::vector<double> theta;
    TrainingTrace trace;
    IgdRunStats stats;
};

IgdRun run_igd(const Objective& J, std::vector<double> theta0, double eta, std::size_t steps,
               const InnerOptions& inner, const RunOptions& opt = {});

/// Explicit steps theta <- theta - eta grad J(theta); theta is updated in place.
TrainingTrace run_gd(const Objective& J, std::vector<double>& theta, double eta,
                     std::size_t steps, const RunOptions& opt = {});

struct FlowOptions {
    std::optional<double> stop_loss;  // stop once J <= stop_loss
    RunOptions run;
};

struct FlowRun {
    std::vector<double> theta;
    TrainingTrace trace;
    double final_dt = 0.0;
    std::size_t halvings = 0;
};

/// RK4 for theta' = -grad J(theta) up to time T. A step that increases J is retried with
/// half the step, and the halved step is kept from then on.
FlowRun gradient_flow(const Objective& J, std::vector<double> theta0, double T, double dt,
                      const FlowOptions& opt = {});

// ---------------------------------------------------------------- rate fitting

enum class RateRegime { power, exponential, undetermined };
const char* to_string(RateRegime r);

struct RateFitOptions {
    /// Limit value J*; estimated from the trace when absent.
    std::optional<double> floor;
    double tail_fraction = 0.5;
    std::size_t min_tail = 50;
};

struct RateFit {
    RateRegime regime = RateRegime::undetermined;
    double epsilon = 0.0;  // NaN when undetermined
    double C = 0.0;
    double r2 = 0.0;
    double r2_power = 0.0;
    double r2_exponential = 0.0;
    double slope = 0.0;  // d log(J - J*) / d log t (power) or d/dt (exponential)
    double floor = 0.0;
    bool floor_estimated = false;
    std::size_t tail_begin = 0;
    std::size_t tail_count = 0;
    std::optional<double> epsilon_distance;  // from ||theta - theta_final|| when available

    std::string to_json() const;
};

/// Fits log(J - J*) against log t and t on the trailing window and keeps the model with
/// the higher R^2 (ties go to exponential). A power law t^{-s} gives eps = (1 - 1/s) / 2.
RateFit fit_rate(const TrainingTrace& trace, const RateFitOptions& opt = {});

}  // namespace ritzkit
