/**
 * @file channel.hpp
 * @brief Rayleigh channel realizations and isotropic direction sampling
 */

#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "fbshare/linalg.hpp"
#include "fbshare/rng.hpp"

namespace fbshare {

/// One realization of K channel vectors in C^M with their path losses.
struct ChannelSet {
    std::size_t m = 0;
    std::size_t k = 0;
    std::array<CVec, kMaxDim> channels{};
    std::array<double, kMaxDim> path_loss{};

    std::span<const CVec> users() const { return {channels.data(), k}; }
    std::span<const double> gains() const { return {path_loss.data(), k}; }
};

inline void check_dimensions(std::size_t m, std::size_t k) {
    if (m == 0 || k == 0) throw std::invalid_argument("antenna and user counts must be positive");
    if (k > m) throw std::invalid_argument("zero-forcing needs K <= M");
    if (m > kMaxDim) throw std::invalid_argument("antenna count exceeds kMaxDim");
}

/// i.i.d. CN(0, 1) entries; consumes exactly m draws of complex_normal().
inline CVec sample_gaussian_vector(std::size_t m, RngStream& rng) {
    CVec g(m);
    for (std::size_t i = 0; i < m; ++i) g[i] = rng.complex_normal();
    return g;
}

/// Draws K unit-variance Rayleigh channels. Empty path_loss means gamma_k = 1.
inline ChannelSet sample_channel_set(std::size_t m, std::size_t k, std::span<const double> path_loss,
                                     RngStream& rng) {
    check_dimensions(m, k);
    if (!path_loss.empty() && path_loss.size() != k)
        throw std::invalid_argument("path_loss length must equal the user count");
    ChannelSet set;
    set.m = m;
    set.k = k;
    for (std::size_t u = 0; u < k; ++u) {
        const double gamma = path_loss.empty() ? 1.0 : path_loss[u];
        if (!(gamma > 0.0)) throw std::invalid_argument("path losses must be positive");
        set.path_loss[u] = gamma;
        set.channels[u] = sample_gaussian_vector(m, rng);
    }
    return set;
}

/// Uniform direction on the complex unit sphere in C^m.
inline CVec sample_isotropic_unit(std::size_t m, RngStream& rng) {
    if (m == 0 || m > kMaxDim) throw std::invalid_argument("invalid dimension");
    for (;;) {
        const CVec g = sample_gaussian_vector(m, rng);
        const double n = norm(g);
        if (n > 1e-150) return scaled(g, 1.0 / n);
    }
}

/// Isotropic unit vector in the orthogonal complement of a unit `anchor`.
inline CVec sample_unit_in_nullspace(const CVec& anchor, RngStream& rng) {
    const std::size_t m = anchor.size();
    if (m < 2 || m > kMaxDim) throw std::invalid_argument("orthogonal complement needs dimension >= 2");
    for (;;) {
        const CVec g = sample_gaussian_vector(m, rng);
        const CVec residual = combine(1.0, g, -inner(anchor, g), anchor);
        const double n = norm(residual);
        // nearly parallel draw: the projection would lose precision
        if (n <= 1e-6 * norm(g)) continue;
        CVec e = scaled(residual, 1.0 / n);
        // one re-orthogonalization pass pushes |anchor^H e| to rounding level
        e = normalized(combine(1.0, e, -inner(anchor, e), anchor));
        return e;
    }
}

}  // namespace fbshare
