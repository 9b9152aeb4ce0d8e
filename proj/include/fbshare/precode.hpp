/**
 * @file precode.hpp
 * @brief Zero-forcing and regularized zero-forcing beamformers from quantized CSI
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "fbshare/linalg.hpp"

namespace fbshare {

enum class Precoding { zf, rzf };

inline const char* to_string(Precoding p) { return p == Precoding::zf ? "zf" : "rzf"; }

inline Precoding parse_precoding(const std::string& s) {
    if (s == "zf") return Precoding::zf;
    if (s == "rzf") return Precoding::rzf;
    throw std::invalid_argument("unknown precoder '" + s + "' (expected zf or rzf)");
}

/// Unit-norm beamformers V (M x S) and the column norms of the unnormalized inverse.
struct Precoder {
    std::size_t m = 0;
    std::size_t streams = 0;
    CMat v;
    std::array<double, kMaxDim> lambda{};
    std::array<std::size_t, kMaxDim> served{};  ///< user index of each column

    CVec beam(std::size_t k) const { return v.column(k); }
};

/// Condition threshold on the column-norm spread of the inverse.
inline constexpr double kConditionLimit = 1e12;

/**
 * Gauss-Jordan inversion with partial pivoting.
 * Throws DegenerateInput on a pivot that vanishes relative to the matrix scale.
 */
inline CMat invert_complex(const CMat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("invert_complex: matrix must be square");
    const std::size_t n = a.rows();
    CMat work = a;
    CMat inv = CMat::identity(n);

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (!(scale > 0.0)) throw DegenerateInput("invert_complex: zero matrix");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(work(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double mag = std::abs(work(r, col));
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (best <= scale * 1e-14) throw DegenerateInput("invert_complex: singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(work(col, j), work(pivot, j));
                std::swap(inv(col, j), inv(pivot, j));
            }
        }
        const cplx inv_pivot = 1.0 / work(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            work(col, j) *= inv_pivot;
            inv(col, j) *= inv_pivot;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx factor = work(r, col);
            if (factor == cplx{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < n; ++j) {
                work(r, j) -= factor * work(col, j);
                inv(r, j) -= factor * inv(col, j);
            }
        }
    }
    return inv;
}

namespace detail {

inline void check_precoder_input(std::span<const CVec> h_hats, std::size_t m) {
    if (h_hats.empty() || h_hats.size() > m) throw std::invalid_argument("need 1 <= S <= M quantized directions");
    if (m > kMaxDim) throw std::invalid_argument("antenna count exceeds kMaxDim");
    for (const auto& h : h_hats)
        if (h.size() != m) throw std::invalid_argument("direction dimension does not match M");
}

// Normalizes the columns of an M x S matrix into a Precoder.
inline Precoder normalize_columns(const CMat& t, std::size_t m, bool check_condition) {
    Precoder out;
    out.m = m;
    out.streams = t.cols();
    out.v = CMat(m, t.cols());
    for (std::size_t k = 0; k < t.cols(); ++k) out.served[k] = k;
    double lo = HUGE_VAL;
    double hi = 0.0;
    for (std::size_t k = 0; k < t.cols(); ++k) {
        const CVec col = t.column(k);
        const double n = norm(col);
        if (!(n > 0.0) || !std::isfinite(n)) throw DegenerateInput("precoder column has zero or non-finite norm");
        out.lambda[k] = n;
        out.v.set_column(k, scaled(col, 1.0 / n));
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    if (check_condition && hi > kConditionLimit * lo) throw DegenerateInput("quantized channel matrix is ill-conditioned");
    return out;
}

}  // namespace detail

/**
 * ZF beamformers for the served directions h_hats (rows of H^ are h_hat^H).
 * S == M uses the columns of H^{-1}; S < M the right pseudo-inverse
 * H^H (H H^H)^{-1}. Columns are normalized; lambda holds their norms.
 */
inline Precoder zf_precoder(std::span<const CVec> h_hats, std::size_t m) {
    detail::check_precoder_input(h_hats, m);
    const CMat h = stack_adjoint_rows(h_hats);
    if (h_hats.size() == m) return detail::normalize_columns(invert_complex(h), m, true);
    const CMat h_adj = adjoint(h);
    const CMat gram_inv = invert_complex(multiply(h, h_adj));
    return detail::normalize_columns(multiply(h_adj, gram_inv), m, true);
}

/**
 * ZF by random choice: column k is the normalized projection of `draws[k]`
 * onto the orthogonal complement of the other served directions, so it is
 * isotropic in that complement and independent of h_hats[k]. Equals the S = M
 * ZF beam up to a phase; lambda holds the projection norms.
 */
inline Precoder zf_random_nullspace(std::span<const CVec> h_hats, std::size_t m, std::span<const CVec> draws) {
    detail::check_precoder_input(h_hats, m);
    const std::size_t s = h_hats.size();
    if (draws.size() < s) throw std::invalid_argument("need one draw per served user");
    Precoder out;
    out.m = m;
    out.streams = s;
    out.v = CMat(m, s);
    for (std::size_t k = 0; k < s; ++k) {
        out.served[k] = k;
        // orthonormal basis of the other directions by modified Gram-Schmidt
        std::array<CVec, kMaxDim> basis{};
        std::size_t rank = 0;
        for (std::size_t i = 0; i < s; ++i) {
            if (i == k) continue;
            CVec r = h_hats[i];
            for (std::size_t j = 0; j < rank; ++j) r = combine(1.0, r, -inner(basis[j], r), basis[j]);
            const double n = norm(r);
            if (n <= 1e-6 * norm(h_hats[i])) throw DegenerateInput("quantized directions are nearly dependent");
            basis[rank++] = scaled(r, 1.0 / n);
        }
        CVec col = draws[k];
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < rank; ++j) col = combine(1.0, col, -inner(basis[j], col), basis[j]);
        const double n = norm(col);
        if (!(n > 1e-6 * norm(draws[k]))) throw DegenerateInput("beam draw lies in the served subspace");
        out.lambda[k] = n;
        out.v.set_column(k, scaled(col, 1.0 / n));
    }
    return out;
}

/// Regularized ZF: normalized columns of H^H (H H^H + (S/P) I)^{-1}; S = M gives the M/P loading.
inline Precoder rzf_precoder(std::span<const CVec> h_hats, std::size_t m, double p) {
    detail::check_precoder_input(h_hats, m);
    if (!(p > 0.0)) throw std::invalid_argument("rzf_precoder needs positive power");
    const CMat h = stack_adjoint_rows(h_hats);
    const CMat h_adj = adjoint(h);
    CMat loaded = multiply(h, h_adj);
    const double loading = static_cast<double>(h_hats.size()) / p;
    for (std::size_t i = 0; i < loaded.rows(); ++i) loaded(i, i) += loading;
    return detail::normalize_columns(multiply(h_adj, invert_complex(loaded)), m, false);
}

}  // namespace fbshare
