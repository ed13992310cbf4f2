#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ritzkit/net_core.hpp"

namespace ritzkit {

/// Counter-based generator: output n of stream s under seed k is
/// splitmix64_mix(key(k, s) + n * golden_gamma), so independent streams never share
/// state and any draw can be reproduced from (seed, stream, counter).
class CounterRng {
public:
    static constexpr const char* kName = "splitmix64-counter/v1";

    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal by Box-Muller; the second variate of each pair is cached.
    double normal();
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> cached_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// Stream ids; keep stable, they are part of the reproducibility contract.
namespace streams {
inline constexpr std::uint64_t interior = 1;
inline constexpr std::uint64_t boundary = 2;
inline constexpr std::uint64_t init = 3;
inline constexpr std::uint64_t gamma_quadrature = 4;
inline constexpr std::uint64_t audit = 5;
}  // namespace streams

/// One flat face {x_axis = value} of a box, with its outward unit normal.
struct Facet {
    std::size_t axis = 0;
    bool upper = false;
    double value = 0.0;
    double measure = 0.0;
    std::vector<double> normal;
};

enum class DomainKind { hyperrectangle, time_slab };

/// Axis-aligned box. A time slab uses coordinate 0 as time and excludes the final-time
/// face from its boundary; its flat segment is the initial slice t = t0.
class Domain {
public:
    static Domain hyperrectangle(std::vector<double> lo, std::vector<double> hi,
                                 std::size_t gamma_axis, bool gamma_upper = false);
    static Domain time_slab(double t0, double t1, std::vector<double> space_lo,
                            std::vector<double> space_hi);

    DomainKind kind() const { return kind_; }
    std::size_t dim() const { return lo_.size(); }
    std::span<const double> lo() const { return lo_; }
    std::span<const double> hi() const { return hi_; }
    std::span<const Facet> facets() const { return facets_; }
    const Facet& gamma() const { return facets_[gamma_]; }
    std::size_t gamma_index() const { return gamma_; }
    double volume() const;
    double boundary_measure() const;
    bool contains_interior(std::span<const double> x) const;

private:
    Domain() = default;
    void build_facets(bool include_final_time);

    DomainKind kind_ = DomainKind::hyperrectangle;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<Facet> facets_;
    std::size_t gamma_ = 0;
};

/// Interior and boundary samples with uniform Monte Carlo weights (|region| / n).
/// Points are stored row-major; boundary rows carry the outward normal of their facet.
struct CollocationSet {
    std::size_t d = 0;
    std::vector<double> interior;
    std::vector<double> boundary;
    std::vector<double> normals;
    std::vector<std::size_t> boundary_facet;
    std::vector<std::size_t> gamma_subset;
    std::vector<double> interior_weights;
    std::vector<double> boundary_weights;

    std::size_t n_interior() const { return d ? interior.size() / d : 0; }
    std::size_t n_boundary() const { return d ? boundary.size() / d : 0; }
    std::span<const double> interior_point(std::size_t i) const {
        return {interior.data() + i * d, d};
    }
    std::span<const double> boundary_point(std::size_t j) const {
        return {boundary.data() + j * d, d};
    }
    std::span<const double> normal(std::size_t j) const { return {normals.data() + j * d, d}; }
};

/// Deterministic for a fixed seed. n_boundary may be 0 (cutoff-enforced boundary data).
CollocationSet sample(const Domain& domain, std::size_t n_interior, std::size_t n_boundary,
                      std::uint64_t seed);

/// n uniform points on one facet, each with weight measure / n.
struct FacetSample {
    std::size_t d = 0;
    std::vector<double> points;
    std::vector<double> weights;
    std::vector<double> normal;

    std::size_t size() const { return d ? points.size() / d : 0; }
    std::span<const double> point(std::size_t i) const { return {points.data() + i * d, d}; }
};

FacetSample sample_facet(const Domain& domain, const Facet& facet, std::size_t n,
                         std::uint64_t seed, std::uint64_t stream = streams::gamma_quadrature);

/// CSV with columns x0..x{d-1},region,weight; region is interior, boundary or gamma.
std::string collocation_to_csv(const CollocationSet& set);

enum class InitKind { ntk, random_feature, small_normal };

struct InitScheme {
    InitKind kind = InitKind::random_feature;
    std::uint64_t seed = 0;
    double delta = 1e-2;         // small_normal bound on |w_{i,normal}| and |b_i|
    std::optional<std::size_t> normal_axis;  // small_normal: defaults to d - 1

    void validate() const;
};

const char* to_string(InitKind k);

/// ntk: a ~ Unif{-1,1}, w ~ N(0, I), b ~ N(0, 1), ntk scaling, all trainable.
/// random_feature: same inner law, a = 0, plain scaling, outer weights trainable.
/// small_normal: tangential w ~ N(0, I), normal component and b ~ Unif(-delta, delta),
/// a = 0, plain scaling, outer weights trainable.
NetworkParams initialize(const InitScheme& scheme, std::size_t m, std::size_t d);

struct AdmissibilityViolation {
    std::size_t i = 0;  // 0-based neuron indices
    std::size_t j = 0;
    char kind = '+';    // '+' : w~_i = w~_j, '-' : w~_i = -w~_j, 'n' : zero normal component
};

struct AdmissibilityReport {
    bool ok = true;
    std::vector<AdmissibilityViolation> violations;
};

/// Exact comparisons: tangential parts pairwise distinct up to sign, nonzero normal parts.
/// The normal coordinate defaults to the last one.
AdmissibilityReport check_admissible(const NetworkParams& params,
                                     std::optional<std::size_t> normal_axis = {});

}  // namespace ritzkit
