#pragma once

// Brute-force reference computations for small pairwise models. Everything here is written
// directly from the model definition (sum over all 2^n worlds of exp of the summed tables)
// and deliberately shares no code with the library's sampler or enumerator.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

struct Factor {
    std::size_t a;
    std::size_t b;
    double table[4];  // log value at (x_a, x_b), index 2*x_a + x_b
};

struct Model {
    std::size_t n = 0;
    std::vector<Factor> factors;
};

inline std::vector<int> bits(std::uint64_t s, std::size_t n) {
    std::vector<int> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<int>((s >> i) & 1u);
    return x;
}

inline long double log_weight(const Model& m, const std::vector<int>& x) {
    long double s = 0.0L;
    for (const auto& f : m.factors) s += f.table[2 * x[f.a] + x[f.b]];
    return s;
}

/// Normalized probabilities of every world, indexed by the bit pattern.
inline std::vector<long double> joint(const Model& m) {
    const std::uint64_t count = std::uint64_t{1} << m.n;
    std::vector<long double> p(count);
    long double z = 0.0L;
    for (std::uint64_t s = 0; s < count; ++s) {
        p[s] = std::exp(log_weight(m, bits(s, m.n)));
        z += p[s];
    }
    for (auto& v : p) v /= z;
    return p;
}

inline double log_partition(const Model& m) {
    const std::uint64_t count = std::uint64_t{1} << m.n;
    long double z = 0.0L;
    for (std::uint64_t s = 0; s < count; ++s) z += std::exp(log_weight(m, bits(s, m.n)));
    return static_cast<double>(std::log(z));
}

inline double expect(const Model& m, const std::function<double(const std::vector<int>&)>& fn) {
    const auto p = joint(m);
    long double e = 0.0L;
    for (std::uint64_t s = 0; s < p.size(); ++s) e += p[s] * fn(bits(s, m.n));
    return static_cast<double>(e);
}

inline double marginal(const Model& m, std::size_t v) {
    return expect(m, [v](const std::vector<int>& x) { return static_cast<double>(x[v]); });
}

inline double xor_marginal(const Model& m, std::size_t a, std::size_t b) {
    return expect(m, [a, b](const std::vector<int>& x) { return x[a] != x[b] ? 1.0 : 0.0; });
}

/// Same model with log(psi_v) added whenever x_v = 1.
inline Model with_unary(Model m, const std::vector<double>& log_psi) {
    for (std::size_t v = 0; v < log_psi.size(); ++v) {
        if (log_psi[v] == 0.0) continue;
        // A self-pair factor lands on row 3 exactly when x_v = 1.
        m.factors.push_back({v, v, {0.0, 0.0, 0.0, log_psi[v]}});
    }
    return m;
}

/// Hand formula of the pairwise feature values: I on XOR, C on AND.
inline double sig(double t) { return 1.0 / (1.0 + std::exp(-t)); }
inline void hybrid_table(double w, double g1, double g2, double eps, double a, double out[4]) {
    const double i = -(g1 - g2) * (g1 - g2);
    const double c = std::min(std::log(sig(a * (eps - g1))), std::log(sig(a * (eps - g2))));
    out[0] = 0.0;
    out[1] = w * i;
    out[2] = w * i;
    out[3] = w * c;
}

}  // namespace oracle
