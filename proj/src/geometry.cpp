#include "ritzkit/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "ritzkit/error.hpp"

namespace ritzkit {

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64_mix(seed ^ splitmix64_mix((stream + 1) * kGoldenGamma))) {}

std::uint64_t CounterRng::next_u64() {
    return splitmix64_mix(key_ + (++counter_) * kGoldenGamma);
}

double CounterRng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    if (cached_) {
        const double v = *cached_;
        cached_.reset();
        return v;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(phi);
    return r * std::cos(phi);
}

// ---------------------------------------------------------------- domain

Domain Domain::hyperrectangle(std::vector<double> lo, std::vector<double> hi,
                              std::size_t gamma_axis, bool gamma_upper) {
    Domain dom;
    dom.kind_ = DomainKind::hyperrectangle;
    dom.lo_ = std::move(lo);
    dom.hi_ = std::move(hi);
    dom.build_facets(true);
    if (gamma_axis >= dom.dim()) throw DataError("flat-segment axis out of range");
    for (std::size_t f = 0; f < dom.facets_.size(); ++f)
        if (dom.facets_[f].axis == gamma_axis && dom.facets_[f].upper == gamma_upper)
            dom.gamma_ = f;
    return dom;
}

Domain Domain::time_slab(double t0, double t1, std::vector<double> space_lo,
                         std::vector<double> space_hi) {
    Domain dom;
    dom.kind_ = DomainKind::time_slab;
    dom.lo_.push_back(t0);
    dom.hi_.push_back(t1);
    dom.lo_.insert(dom.lo_.end(), space_lo.begin(), space_lo.end());
    dom.hi_.insert(dom.hi_.end(), space_hi.begin(), space_hi.end());
    dom.build_facets(false);
    dom.gamma_ = 0;  // t = t0 comes first
    return dom;
}

void Domain::build_facets(bool include_final_time) {
    const std::size_t d = dim();
    if (d == 0 || hi_.size() != d) throw DimensionError("domain bounds differ in dimension");
    for (std::size_t i = 0; i < d; ++i)
        if (!(lo_[i] < hi_[i])) throw DataError("degenerate domain: lo >= hi on axis " +
                                                std::to_string(i));
    for (std::size_t axis = 0; axis < d; ++axis) {
        double measure = 1.0;
        for (std::size_t i = 0; i < d; ++i)
            if (i != axis) measure *= hi_[i] - lo_[i];
        for (bool upper : {false, true}) {
            if (upper && axis == 0 && !include_final_time) continue;
            Facet f;
            f.axis = axis;
            f.upper = upper;
            f.value = upper ? hi_[axis] : lo_[axis];
            f.measure = measure;
            f.normal.assign(d, 0.0);
            f.normal[axis] = upper ? 1.0 : -1.0;
            facets_.push_back(std::move(f));
        }
    }
}

double Domain::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= hi_[i] - lo_[i];
    return v;
}

double Domain::boundary_measure() const {
    double s = 0.0;
    for (const auto& f : facets_) s += f.measure;
    return s;
}

bool Domain::contains_interior(std::span<const double> x) const {
    for (std::size_t i = 0; i < dim(); ++i)
        if (!(x[i] > lo_[i] && x[i] < hi_[i])) return false;
    return true;
}

namespace {

void draw_on_facet(const Domain& dom, const Facet& f, CounterRng& rng, std::vector<double>& out) {
    for (std::size_t i = 0; i < dom.dim(); ++i) {
        if (i == f.axis) out.push_back(f.value);
        else out.push_back(rng.uniform(dom.lo()[i], dom.hi()[i]));
    }
}

}  // namespace

CollocationSet sample(const Domain& domain, std::size_t n_interior, std::size_t n_boundary,
                      std::uint64_t seed) {
    if (n_interior < 1) throw DataError("at least one interior collocation point is required");
    const std::size_t d = domain.dim();
    CollocationSet set;
    set.d = d;

    CounterRng irng(seed, streams::interior);
    set.interior.reserve(n_interior * d);
    for (std::size_t p = 0; p < n_interior; ++p)
        for (std::size_t i = 0; i < d; ++i)
            set.interior.push_back(irng.uniform(domain.lo()[i], domain.hi()[i]));
    set.interior_weights.assign(n_interior, domain.volume() / static_cast<double>(n_interior));

    CounterRng brng(seed, streams::boundary);
    const auto facets = domain.facets();
    const double total = domain.boundary_measure();
    for (std::size_t q = 0; q < n_boundary; ++q) {
        const double pick = brng.uniform() * total;
        double acc = 0.0;
        std::size_t f = facets.size() - 1;
        for (std::size_t k = 0; k < facets.size(); ++k) {
            acc += facets[k].measure;
            if (pick < acc) {
                f = k;
                break;
            }
        }
        draw_on_facet(domain, facets[f], brng, set.boundary);
        set.normals.insert(set.normals.end(), facets[f].normal.begin(), facets[f].normal.end());
        set.boundary_facet.push_back(f);
        if (f == domain.gamma_index()) set.gamma_subset.push_back(q);
    }
    if (n_boundary > 0)
        set.boundary_weights.assign(n_boundary, total / static_cast<double>(n_boundary));
    return set;
}

FacetSample sample_facet(const Domain& domain, const Facet& facet, std::size_t n,
                         std::uint64_t seed, std::uint64_t stream) {
    if (n < 1) throw DataError("facet sample needs at least one point");
    FacetSample s;
    s.d = domain.dim();
    s.normal = facet.normal;
    CounterRng rng(seed, stream);
    s.points.reserve(n * s.d);
    for (std::size_t q = 0; q < n; ++q) draw_on_facet(domain, facet, rng, s.points);
    s.weights.assign(n, facet.measure / static_cast<double>(n));
    return s;
}

std::string collocation_to_csv(const CollocationSet& set) {
    std::ostringstream os;
    for (std::size_t i = 0; i < set.d; ++i) os << "x" << i << ",";
    os << "region,weight\n";
    char buf[40];
    auto row = [&](std::span<const double> x, const char* region, double w) {
        for (double v : x) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << buf << ",";
        }
        std::snprintf(buf, sizeof buf, "%.17g", w);
        os << region << "," << buf << "\n";
    };
    for (std::size_t p = 0; p < set.n_interior(); ++p)
        row(set.interior_point(p), "interior", set.interior_weights[p]);
    std::vector<bool> on_gamma(set.n_boundary(), false);
    for (auto q : set.gamma_subset) on_gamma[q] = true;
    for (std::size_t q = 0; q < set.n_boundary(); ++q)
        row(set.boundary_point(q), on_gamma[q] ? "gamma" : "boundary", set.boundary_weights[q]);
    return os.str();
}

// ---------------------------------------------------------------- initialization

void InitScheme::validate() const {
    if (kind == InitKind::small_normal && !(delta > 0.0))
        throw DataError("small_normal initialization needs delta > 0");
}

const char* to_string(InitKind k) {
    switch (k) {
        case InitKind::ntk: return "ntk";
        case InitKind::random_feature: return "random_feature";
        case InitKind::small_normal: return "small_normal";
    }
    return "?";
}

NetworkParams initialize(const InitScheme& scheme, std::size_t m, std::size_t d) {
    scheme.validate();
    if (m < 1 || d < 1) throw DataError("initialization needs m >= 1 and d >= 1");
    CounterRng rng(scheme.seed, streams::init);
    NetworkParams p(m, d);
    switch (scheme.kind) {
        case InitKind::ntk:
            p.scaling = Scaling::ntk;
            p.trainable = Trainable::full;
            for (std::size_t k = 0; k < m; ++k) {
                p.a[k] = (rng.next_u64() >> 63) ? 1.0 : -1.0;
                for (std::size_t i = 0; i < d; ++i) p.weight(k, i) = rng.normal();
                p.b[k] = rng.normal();
            }
            break;
        case InitKind::random_feature:
            for (std::size_t k = 0; k < m; ++k) {
                for (std::size_t i = 0; i < d; ++i) p.weight(k, i) = rng.normal();
                p.b[k] = rng.normal();
            }
            break;
        case InitKind::small_normal: {
            const std::size_t axis = scheme.normal_axis.value_or(d - 1);
            if (axis >= d) throw DataError("normal axis out of range");
            for (std::size_t k = 0; k < m; ++k) {
                for (std::size_t i = 0; i < d; ++i)
                    p.weight(k, i) = (i == axis) ? rng.uniform(-scheme.delta, scheme.delta)
                                                 : rng.normal();
                p.b[k] = rng.uniform(-scheme.delta, scheme.delta);
            }
            break;
        }
    }
    return p;
}

AdmissibilityReport check_admissible(const NetworkParams& params,
                                     std::optional<std::size_t> normal_axis) {
    params.validate();
    const std::size_t d = params.d;
    if (d < 2) throw DimensionError("admissibility needs d >= 2");
    const std::size_t axis = normal_axis.value_or(d - 1);
    if (axis >= d) throw DataError("normal axis out of range");
    AdmissibilityReport rep;
    for (std::size_t i = 0; i < params.m; ++i) {
        for (std::size_t j = i + 1; j < params.m; ++j) {
            bool same = true, opposite = true;
            for (std::size_t c = 0; c < d; ++c) {
                if (c == axis) continue;
                const double wi = params.weight(i, c), wj = params.weight(j, c);
                same = same && wi == wj;
                opposite = opposite && wi == -wj;
            }
            if (same) rep.violations.push_back({i, j, '+'});
            else if (opposite) rep.violations.push_back({i, j, '-'});
        }
        if (params.weight(i, axis) == 0.0) rep.violations.push_back({i, i, 'n'});
    }
    rep.ok = rep.violations.empty();
    return rep;
}

}  // namespace ritzkit
