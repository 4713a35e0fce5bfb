#pragma once

// DCT-II / DCT-III pair with the normalization
//
//   forward  c_k = sum_n x_n cos(pi/L (n + 1/2) k)
//   inverse  x_n = (2/L) [ c_0 / 2 + sum_{k>=1} c_k cos(pi/L k (n + 1/2)) ]
//
// so that idct(dct(x)) == x. Both directions are dense L x L matrix products
// against a cosine basis; lengths in this library stay well under 1000.

#include "ftmixer/diffarray.hpp"
#include "ftmixer/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numbers>
#include <type_traits>
#include <vector>

namespace ftmixer {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixRX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// DCT coefficients of one length-L sequence.
template <typename Scalar = double>
struct SpectralVector {
  VectorX<Scalar> coefficients;

  Eigen::Index length() const { return coefficients.size(); }
};

namespace detail {

/// cos(pi * m / (2L)) with m reduced mod 4L first, keeping the argument small.
template <typename Scalar>
Scalar half_sample_cos(long long m, long long length) {
  const long long period = 4 * length;
  m %= period;
  if (m < 0) m += period;
  return std::cos(std::numbers::pi_v<Scalar> * static_cast<Scalar>(m) /
                  static_cast<Scalar>(2 * length));
}

}  // namespace detail

/// Forward basis: row k, column n holds cos(pi/L (n + 1/2) k).
template <typename Scalar>
MatrixRX<Scalar> dct_basis(Eigen::Index length) {
  MatrixRX<Scalar> b(length, length);
  for (Eigen::Index k = 0; k < length; ++k) {
    for (Eigen::Index n = 0; n < length; ++n) {
      b(k, n) = detail::half_sample_cos<Scalar>((2 * n + 1) * k, length);
    }
  }
  return b;
}

/// Inverse basis: row n, column k holds (2/L) w_k cos(pi/L k (n + 1/2)), w_0 = 1/2.
template <typename Scalar>
MatrixRX<Scalar> idct_basis(Eigen::Index length) {
  MatrixRX<Scalar> b = dct_basis<Scalar>(length).transpose();
  const Scalar s = Scalar(2) / static_cast<Scalar>(length);
  b *= s;
  b.col(0) *= Scalar(0.5);
  return b;
}

/// Process-wide double-precision bases, built once per length.
std::shared_ptr<const RowMatrix> cached_dct_basis(std::size_t length);
std::shared_ptr<const RowMatrix> cached_idct_basis(std::size_t length);

namespace detail {

template <typename Derived>
void check_spectral_input(const Eigen::MatrixBase<Derived>& x, const char* op) {
  if (x.size() == 0) throw ContractError(std::string(op) + ": empty input");
  if (!x.allFinite()) throw NumericError(std::string(op) + ": input contains NaN or infinity");
}

}  // namespace detail

template <typename Derived>
SpectralVector<typename Derived::Scalar> dct(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  detail::check_spectral_input(x, "dct");
  const auto length = x.size();
  const auto column = x.derived().reshaped();
  if constexpr (std::is_same_v<Scalar, double>) {
    return {*cached_dct_basis(static_cast<std::size_t>(length)) * column};
  } else {
    return {dct_basis<Scalar>(length) * column};
  }
}

template <typename Scalar>
VectorX<Scalar> idct(const SpectralVector<Scalar>& c) {
  detail::check_spectral_input(c.coefficients, "idct");
  const auto length = c.length();
  if constexpr (std::is_same_v<Scalar, double>) {
    return *cached_idct_basis(static_cast<std::size_t>(length)) * c.coefficients;
  } else {
    return idct_basis<Scalar>(length) * c.coefficients;
  }
}

/// Splits x into non-overlapping windows of the given size and transforms
/// each one. The window must divide the length.
template <typename Derived>
std::vector<SpectralVector<typename Derived::Scalar>> windowed_dct(const Eigen::MatrixBase<Derived>& x,
                                                                   Eigen::Index window) {
  detail::check_spectral_input(x, "windowed_dct");
  const auto length = x.size();
  if (window < 1 || window > length) {
    throw ConfigError("windowed_dct: window " + std::to_string(window) + " not in [1, " +
                      std::to_string(length) + "]");
  }
  if (length % window != 0) {
    throw ConfigError("windowed_dct: window " + std::to_string(window) + " does not divide length " +
                      std::to_string(length));
  }
  const auto flat = x.derived().reshaped();
  std::vector<SpectralVector<typename Derived::Scalar>> out;
  out.reserve(static_cast<std::size_t>(length / window));
  for (Eigen::Index start = 0; start < length; start += window) {
    out.push_back(dct(flat.segment(start, window)));
  }
  return out;
}

/// Differentiable DCT along the last axis; the backward pass applies the
/// transposed basis.
DiffArray dct_last(const DiffArray& x);
/// Differentiable inverse DCT along the last axis.
DiffArray idct_last(const DiffArray& c);

}  // namespace ftmixer
