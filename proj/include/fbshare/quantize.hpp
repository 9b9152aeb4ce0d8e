/**
 * @file quantize.hpp
 * @brief Channel-direction quantization: RVQ and spherical-cap error models
 *
 * Two routes produce a QuantizationOutcome for a channel h:
 *  - quantize_explicit draws a random codebook of 2^b isotropic codewords and
 *    picks the best one. Exact but O(2^b); kept as a reference.
 *  - quantize_direct samples the error magnitude Z from its closed-form law and
 *    places the codeword at that angle from h in an isotropic direction. O(M)
 *    for any b, and equal in law to the explicit search for RVQ because Z is
 *    independent of the error direction.
 *
 * Closed-form moments E[Z] and E[log2 Z] back the asymptotic strategy proofs.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fbshare/channel.hpp"
#include "fbshare/linalg.hpp"
#include "fbshare/rng.hpp"

namespace fbshare {

enum class Codebook { rvq, spherical_cap };

inline const char* to_string(Codebook c) { return c == Codebook::rvq ? "rvq" : "cap"; }

inline Codebook parse_codebook(const std::string& s) {
    if (s == "rvq") return Codebook::rvq;
    if (s == "cap" || s == "spherical_cap") return Codebook::spherical_cap;
    throw std::invalid_argument("unknown codebook '" + s + "' (expected rvq or cap)");
}

struct CodebookModel {
    Codebook kind = Codebook::rvq;
    int bits = 0;
    std::size_t m = 2;
};

struct QuantizationOutcome {
    CVec h_hat;     ///< unit codeword, phase-aligned so that h_hat^H h_tilde >= 0
    double z = 0.0; ///< 1 - |h_tilde^H h_hat|^2
    CVec e;         ///< unit error direction, orthogonal to h_hat
    double q = 0.0; ///< channel gain ||h||^2
};

/// Largest codebook the explicit search will build (65536 codewords).
inline constexpr int kExplicitBitsCap = 16;

namespace detail {

inline void check_quantizer_dims(std::size_t m) {
    if (m < 2 || m > kMaxDim) throw std::invalid_argument("quantization needs 2 <= M <= kMaxDim");
}

}  // namespace detail

/**
 * Inverse-transform map from a uniform u in (0,1) to an error magnitude.
 * RVQ inverts the CCDF (1 - z^{M-1})^{2^b}; the spherical cap inverts the CDF
 * 2^b z^{M-1} on its support [0, 2^{-b/(M-1)}].
 */
inline double error_from_uniform(const CodebookModel& model, double u) {
    detail::check_quantizer_dims(model.m);
    if (model.bits < 0) throw std::invalid_argument("bits must be non-negative");
    const double inv_dim = 1.0 / static_cast<double>(model.m - 1);
    const double log_u = std::log(u);
    if (model.kind == Codebook::rvq) {
        // 1 - u^{2^-b} without cancellation when 2^-b is tiny
        const double tail = -std::expm1(std::ldexp(log_u, -model.bits));
        return std::exp(std::log(tail) * inv_dim);
    }
    return std::exp((log_u - model.bits * std::numbers::ln2) * inv_dim);
}

/**
 * Draws Z from the model's error law with one uniform. The cap sampler is fed
 * 1 - u so both models are monotone decreasing in u: with shared draws the
 * cap error never exceeds the RVQ error (common random numbers).
 */
inline double error_for_draw(const CodebookModel& model, double u) {
    return error_from_uniform(model, model.kind == Codebook::rvq ? u : 1.0 - u);
}

inline double sample_error_direct(const CodebookModel& model, RngStream& rng) {
    return error_for_draw(model, rng.uniform());
}

/// Builds the outcome for a unit channel direction given Z and a unit
/// `orth` orthogonal to it.
inline QuantizationOutcome assemble_direct(const CVec& h_tilde, double q, double z, const CVec& orth) {
    const double c = std::sqrt(1.0 - z);
    const double s = std::sqrt(z);
    QuantizationOutcome out;
    out.h_hat = combine(c, h_tilde, -s, orth);
    out.e = combine(s, h_tilde, c, orth);
    out.z = z;
    out.q = q;
    return out;
}

inline QuantizationOutcome quantize_direct(const CVec& h, const CodebookModel& model, RngStream& rng) {
    detail::check_quantizer_dims(h.size());
    if (model.m != h.size()) throw std::invalid_argument("model dimension does not match channel");
    const double q = norm_sq(h);
    if (!(q > 0.0)) throw std::invalid_argument("channel must be nonzero");
    const CVec h_tilde = scaled(h, 1.0 / std::sqrt(q));
    const double z = sample_error_direct(model, rng);
    const CVec orth = sample_unit_in_nullspace(h_tilde, rng);
    return assemble_direct(h_tilde, q, z, orth);
}

/// Explicit random codebook search with 2^bits isotropic codewords.
inline QuantizationOutcome quantize_explicit(const CVec& h, int bits, RngStream& rng,
                                             int bits_cap = kExplicitBitsCap) {
    const std::size_t m = h.size();
    detail::check_quantizer_dims(m);
    if (bits < 0) throw std::invalid_argument("bits must be non-negative");
    if (bits > bits_cap)
        throw std::invalid_argument("explicit codebook of " + std::to_string(bits) +
                                    " bits exceeds the cap; use quantize_direct");
    const double q = norm_sq(h);
    if (!(q > 0.0)) throw std::invalid_argument("channel must be nonzero");
    const CVec h_tilde = scaled(h, 1.0 / std::sqrt(q));

    const std::uint64_t codewords = std::uint64_t{1} << bits;
    CVec best;
    double best_alignment = -1.0;
    for (std::uint64_t i = 0; i < codewords; ++i) {
        const CVec g = sample_gaussian_vector(m, rng);
        const double alignment = std::norm(inner(h_tilde, g)) / norm_sq(g);
        if (alignment > best_alignment) {
            best_alignment = alignment;
            best = g;
        }
    }

    QuantizationOutcome out;
    out.q = q;
    CVec h_hat = normalized(best);
    const cplx overlap = inner(h_hat, h_tilde);
    const double magnitude = std::abs(overlap);
    if (magnitude > 0.0) h_hat = scaled(h_hat, overlap / magnitude);
    out.h_hat = h_hat;
    const CVec residual = combine(1.0, h_tilde, -inner(h_hat, h_tilde), h_hat);
    out.z = std::min(1.0, norm_sq(residual));
    out.e = out.z > 1e-28 ? scaled(residual, 1.0 / std::sqrt(out.z)) : sample_unit_in_nullspace(h_hat, rng);
    return out;
}

namespace detail {

// ln Gamma(x + d) - ln Gamma(x) for x >= 1, 0 < d <= 1, accurate to a few ulps
// of the result even for x ~ 1e9 where plain lgamma differences cancel.
inline double lgamma_shift(double x, double d) {
    if (x < 16.0) return std::lgamma(x + d) - std::lgamma(x);
    auto stirling_tail = [](double y) {
        const double y2 = y * y;
        return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * y2)) / y2) / y2) / y;
    };
    const double y = x + d;
    return (x - 0.5) * std::log1p(d / x) + d * std::log(y) - d + stirling_tail(y) - stirling_tail(x);
}

}  // namespace detail

/// E[Z] for b-bit RVQ in C^M: 2^b * B(2^b, M/(M-1)).
inline double mean_error(int bits, std::size_t m) {
    if (m < 2) throw std::invalid_argument("mean_error needs M >= 2");
    if (bits < 0) throw std::invalid_argument("bits must be non-negative");
    const double d = 1.0 / static_cast<double>(m - 1);
    const double n = std::ldexp(1.0, bits);
    // Gamma(n+1) Gamma(1+d) / Gamma(n+1+d)
    return std::exp(std::lgamma(1.0 + d) - detail::lgamma_shift(n + 1.0, d));
}

inline constexpr std::uint64_t kHarmonicDirectLimit = std::uint64_t{1} << 20;

inline double harmonic_direct(std::uint64_t n) {
    double acc = 0.0;
    for (std::uint64_t i = n; i >= 1; --i) acc += 1.0 / static_cast<double>(i);
    return acc;
}

inline double harmonic_asymptotic(double n) {
    const double inv = 1.0 / n;
    const double inv2 = inv * inv;
    return std::log(n) + std::numbers::egamma + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0;
}

inline double harmonic_number(std::uint64_t n) {
    return n <= kHarmonicDirectLimit ? harmonic_direct(n) : harmonic_asymptotic(static_cast<double>(n));
}

/// E[log2 Z] for b-bit RVQ in C^M: -log2(e)/(M-1) * H(2^b).
inline double mean_log2_error(int bits, std::size_t m) {
    if (m < 2) throw std::invalid_argument("mean_log2_error needs M >= 2");
    if (bits < 0 || bits > 62) throw std::invalid_argument("bits out of range");
    return -std::numbers::log2e / static_cast<double>(m - 1) * harmonic_number(std::uint64_t{1} << bits);
}

}  // namespace fbshare
