#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ritzkit {

/// Highest derivative order of tanh that is tabulated.
inline constexpr int kMaxDerivativeOrder = 8;

/// d^k/dt^k tanh(t), evaluated as P_k(tanh t) with P_0(s) = s and
/// P_{k+1}(s) = P_k'(s) (1 - s^2). Throws OrderExceeded for k > kMaxDerivativeOrder.
double tanh_kth_derivative(int k, double t);

/// Fills out[0..n] with tanh^{(0)}(t) .. tanh^{(n)}(t) from a single tanh call.
void tanh_derivatives(double t, int n, std::span<double> out);

/// Integer coefficients of P_k in ascending powers of s.
std::span<const std::int64_t> tanh_derivative_polynomial(int k);

/// Sum of |coefficients| of P_k; bounds |tanh^{(k)}| on the real line since |s| < 1.
double tanh_derivative_bound(int k);

/// Multi-index xi over d coordinates; order() = |xi|.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries);
    MultiIndex(std::initializer_list<int> entries);

    static MultiIndex zero(std::size_t d);
    static MultiIndex unit(std::size_t d, std::size_t i, int power = 1);

    std::size_t size() const { return entries_.size(); }
    int operator[](std::size_t i) const { return entries_[i]; }
    int order() const { return order_; }
    std::span<const int> entries() const { return entries_; }

    /// xi - e_i; requires entries[i] > 0.
    MultiIndex lowered(std::size_t i) const;
    MultiIndex raised(std::size_t i) const;

    bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }

    std::string to_string() const;

private:
    std::vector<int> entries_;
    int order_ = 0;
};

/// All multi-indices over d coordinates with |xi| <= max_order, graded by order.
std::vector<MultiIndex> multi_indices_up_to(std::size_t d, int max_order);

/// x^xi with 0^0 = 1.
double multi_index_power(std::span<const double> x, const MultiIndex& xi);

enum class Scaling { plain, ntk };
enum class Trainable { outer_only, full };

const char* to_string(Scaling s);
const char* to_string(Trainable t);

/// Two-layer tanh network u(x) = c * sum_k a_k tanh(w_k . x + b_k), with
/// c = 1 (plain) or 1/sqrt(m) (ntk). Inner weights are stored row-major (m x d).
///
/// Trainable parameter vectors are laid out as [a (m) | w (m*d, row-major) | b (m)]
/// for Trainable::full and [a (m)] for Trainable::outer_only.
struct NetworkParams {
    std::size_t m = 0;
    std::size_t d = 0;
    Scaling scaling = Scaling::plain;
    Trainable trainable = Trainable::outer_only;
    std::vector<double> a;
    std::vector<double> w;
    std::vector<double> b;

    NetworkParams() = default;
    NetworkParams(std::size_t width, std::size_t dim, Scaling s = Scaling::plain,
                  Trainable t = Trainable::outer_only);

    std::span<const double> row(std::size_t k) const { return {w.data() + k * d, d}; }
    std::span<double> row(std::size_t k) { return {w.data() + k * d, d}; }
    double& weight(std::size_t k, std::size_t i) { return w[k * d + i]; }
    double weight(std::size_t k, std::size_t i) const { return w[k * d + i]; }

    double output_scale() const;
    std::size_t trainable_size() const;
    std::size_t full_size() const { return m * (d + 2); }

    /// Throws DataError if sizes are inconsistent.
    void validate() const;

    std::vector<double> trainable_vector() const;
    void set_trainable(std::span<const double> theta);
    double outer_norm() const;
};

double eval(const NetworkParams& params, std::span<const double> x);

/// Exact d^xi u(x) = c sum_k a_k tanh^{(|xi|)}(w_k . x + b_k) w_k^xi.
double partial_derivative(const NetworkParams& params, std::span<const double> x,
                          const MultiIndex& xi);

/// Component k is d(d^xi u(x))/d a_k; independent of a.
std::vector<double> feature_derivative_vector(const NetworkParams& params,
                                              std::span<const double> x,
                                              const MultiIndex& xi);

/// Gradient of d^xi u(x) over the inner parameters, laid out [w (m*d) | b (m)].
/// Requires |xi| + 1 <= kMaxDerivativeOrder.
std::vector<double> inner_param_gradient(const NetworkParams& params,
                                         std::span<const double> x, const MultiIndex& xi);

/// Values of d^{xi_j} u(x) for every jet index, from one pass over the neurons.
void jet_values(const NetworkParams& params, std::span<const double> x,
                std::span<const MultiIndex> jets, std::span<double> out);

/// grad += scale * d/dtheta sum_j coeffs[j] d^{xi_j} u(x), over the trainable layout.
void accumulate_jet_gradient(const NetworkParams& params, std::span<const double> x,
                             std::span<const MultiIndex> jets,
                             std::span<const double> coeffs, double scale,
                             std::span<double> grad);

/// Hex-float JSON round trip: {"m","d","scaling","trainable","a","w","b"}.
std::string params_to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);

}  // namespace ritzkit
