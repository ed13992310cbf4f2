#include "ritzkit/net_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include <json.hpp>

#include "ritzkit/error.hpp"

namespace ritzkit {

namespace {

constexpr int kTableOrders = kMaxDerivativeOrder + 1;
constexpr int kTableDegree = kMaxDerivativeOrder + 2;

struct PolynomialTable {
    std::array<std::array<std::int64_t, kTableDegree>, kTableOrders> coeffs{};
    std::array<int, kTableOrders> degree{};
    std::array<double, kTableOrders> bound{};

    PolynomialTable() {
        coeffs[0][1] = 1;
        degree[0] = 1;
        for (int n = 0; n + 1 < kTableOrders; ++n) {
            const auto& c = coeffs[n];
            auto& next = coeffs[n + 1];
            // (P' (1 - s^2))_j = (j+1) c_{j+1} - (j-1) c_{j-1}
            for (int j = 0; j < kTableDegree; ++j) {
                std::int64_t v = 0;
                if (j + 1 < kTableDegree) v += (j + 1) * c[j + 1];
                if (j >= 1) v -= (j - 1) * c[j - 1];
                next[j] = v;
            }
            degree[n + 1] = degree[n] + 1;
        }
        for (int n = 0; n < kTableOrders; ++n) {
            double s = 0.0;
            for (auto v : coeffs[n]) s += std::abs(static_cast<double>(v));
            bound[n] = s;
        }
    }

    double horner(int n, double s) const {
        const auto& c = coeffs[n];
        double acc = 0.0;
        for (int j = degree[n]; j >= 0; --j) acc = acc * s + static_cast<double>(c[j]);
        return acc;
    }
};

const PolynomialTable& table() {
    static const PolynomialTable t;
    return t;
}

void check_order(int k) {
    if (k < 0 || k > kMaxDerivativeOrder)
        throw OrderExceeded("derivative order " + std::to_string(k) + " exceeds maximum " +
                            std::to_string(kMaxDerivativeOrder));
}

void check_point(const NetworkParams& params, std::span<const double> x) {
    if (x.size() != params.d)
        throw DimensionError("point has dimension " + std::to_string(x.size()) +
                             ", network expects " + std::to_string(params.d));
}

double pre_activation(const NetworkParams& params, std::size_t k, std::span<const double> x) {
    auto wk = params.row(k);
    double z = params.b[k];
    for (std::size_t i = 0; i < params.d; ++i) z += wk[i] * x[i];
    return z;
}

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_number(const nlohmann::json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') throw DataError("bad numeric string: " + s);
        return v;
    }
    if (j.is_number()) return j.get<double>();
    throw DataError("expected number or hex-float string");
}

}  // namespace

double tanh_kth_derivative(int k, double t) {
    check_order(k);
    return table().horner(k, std::tanh(t));
}

void tanh_derivatives(double t, int n, std::span<double> out) {
    check_order(n);
    const double s = std::tanh(t);
    const auto& tab = table();
    out[0] = s;
    for (int k = 1; k <= n; ++k) out[k] = tab.horner(k, s);
}

std::span<const std::int64_t> tanh_derivative_polynomial(int k) {
    check_order(k);
    const auto& tab = table();
    return {tab.coeffs[k].data(), static_cast<std::size_t>(tab.degree[k] + 1)};
}

double tanh_derivative_bound(int k) {
    check_order(k);
    return table().bound[k];
}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
    for (int e : entries_) {
        if (e < 0) throw DataError("multi-index entries must be non-negative");
        order_ += e;
    }
}

MultiIndex::MultiIndex(std::initializer_list<int> entries)
    : MultiIndex(std::vector<int>(entries)) {}

MultiIndex MultiIndex::zero(std::size_t d) { return MultiIndex(std::vector<int>(d, 0)); }

MultiIndex MultiIndex::unit(std::size_t d, std::size_t i, int power) {
    std::vector<int> e(d, 0);
    e.at(i) = power;
    return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::lowered(std::size_t i) const {
    auto e = entries_;
    if (e.at(i) == 0) throw DataError("cannot lower a zero multi-index entry");
    --e[i];
    return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::raised(std::size_t i) const {
    auto e = entries_;
    ++e.at(i);
    return MultiIndex(std::move(e));
}

std::string MultiIndex::to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(entries_[i]);
    }
    return s + ")";
}

std::vector<MultiIndex> multi_indices_up_to(std::size_t d, int max_order) {
    std::vector<MultiIndex> out;
    for (int order = 0; order <= max_order; ++order) {
        // enumerate compositions of `order` into d parts, lexicographically descending
        std::vector<int> e(d, 0);
        auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
            if (pos + 1 == d) {
                e[pos] = remaining;
                out.emplace_back(e);
                return;
            }
            for (int v = remaining; v >= 0; --v) {
                e[pos] = v;
                self(self, pos + 1, remaining - v);
            }
        };
        if (d == 0) break;
        rec(rec, 0, order);
    }
    return out;
}

double multi_index_power(std::span<const double> x, const MultiIndex& xi) {
    double p = 1.0;
    for (std::size_t i = 0; i < xi.size(); ++i)
        for (int r = 0; r < xi[i]; ++r) p *= x[i];
    return p;
}

const char* to_string(Scaling s) { return s == Scaling::plain ? "plain" : "ntk"; }
const char* to_string(Trainable t) { return t == Trainable::full ? "full" : "outer_only"; }

NetworkParams::NetworkParams(std::size_t width, std::size_t dim, Scaling s, Trainable t)
    : m(width), d(dim), scaling(s), trainable(t), a(width, 0.0), w(width * dim, 0.0),
      b(width, 0.0) {}

double NetworkParams::output_scale() const {
    return scaling == Scaling::ntk ? 1.0 / std::sqrt(static_cast<double>(m)) : 1.0;
}

std::size_t NetworkParams::trainable_size() const {
    return trainable == Trainable::full ? full_size() : m;
}

void NetworkParams::validate() const {
    if (m < 1 || d < 1) throw DataError("network requires m >= 1 and d >= 1");
    if (a.size() != m || b.size() != m || w.size() != m * d)
        throw DataError("network parameter arrays do not match (m, d)");
}

std::vector<double> NetworkParams::trainable_vector() const {
    std::vector<double> theta(a);
    if (trainable == Trainable::full) {
        theta.insert(theta.end(), w.begin(), w.end());
        theta.insert(theta.end(), b.begin(), b.end());
    }
    return theta;
}

void NetworkParams::set_trainable(std::span<const double> theta) {
    if (theta.size() != trainable_size())
        throw DimensionError("trainable vector has wrong length");
    std::copy_n(theta.begin(), m, a.begin());
    if (trainable == Trainable::full) {
        std::copy_n(theta.begin() + m, m * d, w.begin());
        std::copy_n(theta.begin() + m + m * d, m, b.begin());
    }
}

double NetworkParams::outer_norm() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double eval(const NetworkParams& params, std::span<const double> x) {
    check_point(params, x);
    double u = 0.0;
    for (std::size_t k = 0; k < params.m; ++k)
        u += params.a[k] * std::tanh(pre_activation(params, k, x));
    return params.output_scale() * u;
}

double partial_derivative(const NetworkParams& params, std::span<const double> x,
                          const MultiIndex& xi) {
    check_point(params, x);
    if (xi.size() != params.d) throw DimensionError("multi-index dimension mismatch");
    check_order(xi.order());
    const auto& tab = table();
    double u = 0.0;
    for (std::size_t k = 0; k < params.m; ++k) {
        if (params.a[k] == 0.0) continue;
        const double s = std::tanh(pre_activation(params, k, x));
        u += params.a[k] * tab.horner(xi.order(), s) * multi_index_power(params.row(k), xi);
    }
    return params.output_scale() * u;
}

std::vector<double> feature_derivative_vector(const NetworkParams& params,
                                              std::span<const double> x,
                                              const MultiIndex& xi) {
    check_point(params, x);
    if (xi.size() != params.d) throw DimensionError("multi-index dimension mismatch");
    check_order(xi.order());
    const auto& tab = table();
    const double c = params.output_scale();
    std::vector<double> out(params.m);
    for (std::size_t k = 0; k < params.m; ++k) {
        const double s = std::tanh(pre_activation(params, k, x));
        out[k] = c * tab.horner(xi.order(), s) * multi_index_power(params.row(k), xi);
    }
    return out;
}

std::vector<double> inner_param_gradient(const NetworkParams& params,
                                         std::span<const double> x, const MultiIndex& xi) {
    check_point(params, x);
    if (xi.size() != params.d) throw DimensionError("multi-index dimension mismatch");
    check_order(xi.order() + 1);
    NetworkParams full = params;
    full.trainable = Trainable::full;
    std::vector<double> grad(full.full_size(), 0.0);
    const double one = 1.0;
    accumulate_jet_gradient(full, x, std::span<const MultiIndex>(&xi, 1),
                            std::span<const double>(&one, 1), 1.0, grad);
    return {grad.begin() + static_cast<std::ptrdiff_t>(params.m), grad.end()};
}

void jet_values(const NetworkParams& params, std::span<const double> x,
                std::span<const MultiIndex> jets, std::span<double> out) {
    check_point(params, x);
    int max_order = 0;
    for (const auto& xi : jets) {
        if (xi.size() != params.d) throw DimensionError("multi-index dimension mismatch");
        max_order = std::max(max_order, xi.order());
    }
    check_order(max_order);
    std::fill(out.begin(), out.end(), 0.0);
    std::array<double, kMaxDerivativeOrder + 1> sig{};
    for (std::size_t k = 0; k < params.m; ++k) {
        const double ak = params.a[k];
        if (ak == 0.0) continue;
        tanh_derivatives(pre_activation(params, k, x), max_order, sig);
        auto wk = params.row(k);
        for (std::size_t j = 0; j < jets.size(); ++j)
            out[j] += ak * sig[jets[j].order()] * multi_index_power(wk, jets[j]);
    }
    const double c = params.output_scale();
    for (auto& v : out) v *= c;
}

void accumulate_jet_gradient(const NetworkParams& params, std::span<const double> x,
                             std::span<const MultiIndex> jets,
                             std::span<const double> coeffs, double scale,
                             std::span<double> grad) {
    check_point(params, x);
    const bool full = params.trainable == Trainable::full;
    if (grad.size() != params.trainable_size())
        throw DimensionError("gradient buffer has wrong length");
    int max_order = 0;
    for (const auto& xi : jets) max_order = std::max(max_order, xi.order());
    const int need = max_order + (full ? 1 : 0);
    check_order(need);

    const std::size_t m = params.m;
    const std::size_t d = params.d;
    const double c = scale * params.output_scale();

    // lowered[j*d + i] = xi_j - e_i when xi_j[i] > 0
    std::vector<MultiIndex> lowered;
    if (full) {
        lowered.resize(jets.size() * d);
        for (std::size_t j = 0; j < jets.size(); ++j)
            for (std::size_t i = 0; i < d; ++i)
                if (jets[j][i] > 0) lowered[j * d + i] = jets[j].lowered(i);
    }

    std::array<double, kMaxDerivativeOrder + 1> sig{};
    std::vector<double> pw(jets.size());
    for (std::size_t k = 0; k < m; ++k) {
        tanh_derivatives(pre_activation(params, k, x), need, sig);
        auto wk = params.row(k);
        double ga = 0.0;
        for (std::size_t j = 0; j < jets.size(); ++j) {
            if (coeffs[j] == 0.0) {
                pw[j] = 0.0;
                continue;
            }
            pw[j] = multi_index_power(wk, jets[j]);
            ga += coeffs[j] * sig[jets[j].order()] * pw[j];
        }
        grad[k] += c * ga;
        if (!full) continue;
        const double ak = params.a[k];
        if (ak == 0.0) continue;
        double gb = 0.0;
        for (std::size_t j = 0; j < jets.size(); ++j)
            gb += coeffs[j] * sig[jets[j].order() + 1] * pw[j];
        grad[m + m * d + k] += c * ak * gb;
        for (std::size_t i = 0; i < d; ++i) {
            double gw = x[i] * gb;
            for (std::size_t j = 0; j < jets.size(); ++j) {
                const int e = jets[j][i];
                if (e == 0 || coeffs[j] == 0.0) continue;
                gw += coeffs[j] * sig[jets[j].order()] * e *
                      multi_index_power(wk, lowered[j * d + i]);
            }
            grad[m + k * d + i] += c * ak * gw;
        }
    }
}

std::string params_to_json(const NetworkParams& params) {
    params.validate();
    nlohmann::ordered_json j;
    j["m"] = params.m;
    j["d"] = params.d;
    j["scaling"] = to_string(params.scaling);
    j["trainable"] = to_string(params.trainable);
    auto arr = [](std::span<const double> v) {
        auto out = nlohmann::ordered_json::array();
        for (double x : v) out.push_back(hex(x));
        return out;
    };
    j["a"] = arr(params.a);
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < params.m; ++k) rows.push_back(arr(params.row(k)));
    j["w"] = rows;
    j["b"] = arr(params.b);
    return j.dump(1);
}

NetworkParams params_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("params JSON: ") + e.what());
    }
    try {
        NetworkParams p(j.at("m").get<std::size_t>(), j.at("d").get<std::size_t>());
        const auto sc = j.value("scaling", std::string("plain"));
        if (sc != "plain" && sc != "ntk") throw DataError("unknown scaling: " + sc);
        p.scaling = sc == "ntk" ? Scaling::ntk : Scaling::plain;
        const auto tr = j.value("trainable", std::string("outer_only"));
        if (tr != "full" && tr != "outer_only") throw DataError("unknown trainable set: " + tr);
        p.trainable = tr == "full" ? Trainable::full : Trainable::outer_only;
        const auto& a = j.at("a");
        const auto& w = j.at("w");
        const auto& b = j.at("b");
        if (a.size() != p.m || b.size() != p.m || w.size() != p.m)
            throw DataError("params JSON arrays do not match m");
        for (std::size_t k = 0; k < p.m; ++k) {
            p.a[k] = parse_number(a[k]);
            p.b[k] = parse_number(b[k]);
            if (w[k].size() != p.d) throw DataError("params JSON row width does not match d");
            for (std::size_t i = 0; i < p.d; ++i) p.weight(k, i) = parse_number(w[k][i]);
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("params JSON: ") + e.what());
    }
}

}  // namespace ritzkit
