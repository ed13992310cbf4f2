#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ritzkit/diagnostics.hpp"
#include "ritzkit/dynamics.hpp"
#include "ritzkit/geometry.hpp"
#include "ritzkit/loss.hpp"
#include "ritzkit/operators.hpp"

namespace ritzkit {

/// Problem section of an experiment: the loss ingredients apart from the collocation set.
struct ProblemConfig {
    LossKind kind = LossKind::pinn_linear;
    std::optional<LinearOperatorSpec> linear;
    std::optional<NonlinearOperatorSpec> nonlinear;
    std::optional<EnergySpec> energy;
    ScalarField f = 0.0;
    ScalarField g = 0.0;
    RobinSpec robin;
    double lambda = 1.0;
    std::optional<CutoffSpec> cutoff;
    std::optional<std::string> manufactured;  // id of the exact solution, if any
};

enum class Scheme { igd, gd, gradient_flow };
const char* to_string(Scheme s);

struct DynamicsConfig {
    Scheme scheme = Scheme::igd;
    double eta = 0.1;
    std::size_t steps = 100;
    InnerOptions inner;
    double dt = 1e-3;                          // gradient flow
    double horizon = 1.0;                      // gradient flow
    std::optional<double> stop_loss_factor;    // gradient flow: stop once J <= J0 / factor
    std::size_t record_stride = 1;
};

struct DiagnosticsConfig {
    std::size_t gram_stride = 0;  // 0 disables drift tracking
    std::vector<GramProvenance> grams;
    bool full_gram_init = false;
    bool rate_fit = true;
    RateFitOptions rate;
    bool dump_matrices = false;
};

struct AuditConfig {
    std::size_t trials = 20;
    std::size_t width = 20;
    std::vector<RobinSpec> robin;
    std::size_t random_vectors = 100;
    std::optional<std::size_t> quadrature_points;  // default max(50 m, 1000)
    bool duplicate_control = true;
};

struct ExperimentConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::optional<Domain> domain;
    std::optional<ProblemConfig> problem;
    std::size_t n_interior = 0;
    std::size_t n_boundary = 0;
    std::size_t width = 0;
    InitScheme init;
    std::optional<Trainable> trainable;
    DynamicsConfig dynamics;
    DiagnosticsConfig diagnostics;
    std::optional<AuditConfig> audit;
    std::string output_dir;
    /// The parsed document with the effective seed and output directory filled in.
    nlohmann::ordered_json resolved;

    bool has_training() const { return problem.has_value(); }
};

/// Parses and validates; every schema problem is a ConfigError. Keys starting with
/// "comment" are ignored at any level, every other unknown key is rejected.
ExperimentConfig parse_config(const nlohmann::ordered_json& doc,
                              std::optional<std::uint64_t> seed_override = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = {});

/// Collocation set, loss and initial network of a training config.
CollocationSet build_collocation(const ExperimentConfig& cfg);
LossSpec build_loss(const ExperimentConfig& cfg, CollocationSet pts);
NetworkParams build_network(const ExperimentConfig& cfg);

}  // namespace ritzkit
