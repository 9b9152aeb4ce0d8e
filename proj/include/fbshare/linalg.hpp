#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace fbshare {

using cplx = std::complex<double>;

/// Largest antenna / user count handled by the fixed-capacity containers.
inline constexpr std::size_t kMaxDim = 8;

/// Raised when a matrix is singular or too ill-conditioned to invert.
class DegenerateInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Complex column vector of dimension <= kMaxDim, stored inline.
class CVec {
  public:
    CVec() = default;
    explicit CVec(std::size_t n) : size_(n) {
        if (n > kMaxDim) throw std::invalid_argument("CVec: dimension exceeds kMaxDim");
    }
    CVec(std::initializer_list<cplx> values) : CVec(values.size()) {
        std::size_t i = 0;
        for (const auto& v : values) data_[i++] = v;
    }

    std::size_t size() const { return size_; }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    std::span<cplx> span() { return {data_.data(), size_}; }
    std::span<const cplx> span() const { return {data_.data(), size_}; }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.begin() + static_cast<std::ptrdiff_t>(size_); }

  private:
    std::array<cplx, kMaxDim> data_{};
    std::size_t size_ = 0;
};

/// a^H b
inline cplx inner(const CVec& a, const CVec& b) {
    assert(a.size() == b.size());
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

inline double norm_sq(const CVec& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i]);
    return acc;
}

inline double norm(const CVec& a) { return std::sqrt(norm_sq(a)); }

inline CVec scaled(const CVec& a, cplx s) {
    CVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
}

inline CVec normalized(const CVec& a) { return scaled(a, 1.0 / norm(a)); }

/// alpha * a + beta * b
inline CVec combine(cplx alpha, const CVec& a, cplx beta, const CVec& b) {
    assert(a.size() == b.size());
    CVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + beta * b[i];
    return out;
}

/// Dense complex matrix of shape <= kMaxDim x kMaxDim, row-major, stored inline.
class CMat {
  public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
        if (rows > kMaxDim || cols > kMaxDim) throw std::invalid_argument("CMat: shape exceeds kMaxDim");
    }

    static CMat identity(std::size_t n) {
        CMat out(n, n);
        for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
        return out;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * kMaxDim + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * kMaxDim + c]; }

    CVec column(std::size_t c) const {
        CVec out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }
    void set_column(std::size_t c, const CVec& v) {
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
    }

  private:
    std::array<cplx, kMaxDim * kMaxDim> data_{};
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

inline CMat multiply(const CMat& a, const CMat& b) {
    assert(a.cols() == b.rows());
    CMat out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

inline CMat adjoint(const CMat& a) {
    CMat out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

/// Stacks h_k^H as rows: the S x M matrix [h_1, ..., h_S]^H.
inline CMat stack_adjoint_rows(std::span<const CVec> vectors) {
    const std::size_t m = vectors.empty() ? 0 : vectors.front().size();
    CMat out(vectors.size(), m);
    for (std::size_t r = 0; r < vectors.size(); ++r)
        for (std::size_t c = 0; c < m; ++c) out(r, c) = std::conj(vectors[r][c]);
    return out;
}

}  // namespace fbshare
