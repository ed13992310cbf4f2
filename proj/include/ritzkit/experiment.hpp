#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ritzkit/config.hpp"

namespace ritzkit {

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

struct ExperimentOutcome {
    std::filesystem::path dir;
    nlohmann::ordered_json summary;
};

/// Runs a training config and writes trace.csv, gram_drift.csv (when drift tracking is on),
/// rate_fit.json (when enabled), summary.json, params_final.json and metadata.json into
/// out_dir. Everything except metadata.json is a pure function of the config.
/// On NumericError the outputs reached so far are written and the error is rethrown.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                 std::ostream* log = nullptr);

struct AuditCase {
    std::size_t trial = 0;
    RobinSpec robin;
    double lambda_min = 0.0;
    double C = 0.0;
    double bootstrap_se = 0.0;
    bool positive = false;
    double worst_ratio = 0.0;  // max over random a of ||a|| / (C (a^T G a)^{1/2})
};

struct AuditReport {
    std::size_t d = 0;
    std::size_t width = 0;
    std::size_t quadrature_points = 0;
    std::vector<AuditCase> cases;
    bool duplicate_checked = false;
    double duplicate_lambda_min = 0.0;

    double min_lambda() const;
    double worst_ratio() const;
    nlohmann::ordered_json to_json() const;
};

/// Boundary coercivity audit over the domain's flat segment: Gaussian inner layers per trial,
/// one certificate per Robin pair, random outer vectors checked against the bound, and the
/// duplicated-neuron control.
AuditReport run_coercivity_audit(const ExperimentConfig& cfg);

struct SliceError {
    double t = 0.0;
    double l2 = 0.0;    // trapezoidal L2 norm over x
    double linf = 0.0;
};

/// Errors of u(t, x) against ref(t, x) on the slices t = ts[i], x uniform with nx nodes.
std::vector<SliceError> compare_slices(const std::function<double(double, double)>& u,
                                       const std::function<double(double, double)>& ref,
                                       std::span<const double> ts, double x_lo, double x_hi,
                                       std::size_t nx = 201);
std::string slice_errors_csv(std::span<const SliceError> rows);

}  // namespace ritzkit
