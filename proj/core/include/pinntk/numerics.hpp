#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pinntk {

/// Row-major dense storage used for kernels and Jacobians.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Eigenvalues sorted descending together with the trace of the source matrix.
struct Spectrum {
  std::vector<double> eigenvalues;
  double trace = 0.0;
  std::string source_label;

  std::size_t size() const { return eigenvalues.size(); }
  double largest() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
  double smallest() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }
};

/// Spectrum plus orthonormal eigenvectors; column i pairs with eigenvalues[i].
struct EigenSystem {
  Spectrum spectrum;
  DenseMatrix vectors;

  Vector values() const;
  DenseMatrix reconstruct() const;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized as (m + m^T)/2 first. Relative asymmetry above
/// 1e-6 is reported through warn(); above 1e-3 it throws DataError.
/// Throws DimensionError for non-square input and DataError for non-finite
/// entries.
EigenSystem sym_eig(const DenseMatrix& m, std::string label = {});

/// Max |m - m^T| over max(|m|), zero for an all-zero matrix.
double relative_asymmetry(const DenseMatrix& m);

/// Gauss–Hermite rule for the weight e^{-z^2}; weights sum to sqrt(pi).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const { return nodes.size(); }
};

inline constexpr std::size_t kDefaultQuadratureOrder = 60;

/// Nodes seeded from the eigenvalues of the Hermite Jacobi matrix, then
/// polished with Newton steps on the orthonormal Hermite recurrence.
/// Throws ParameterError for order 0.
QuadratureRule gauss_hermite(std::size_t order);

/// Cached rule for repeated expectation evaluations.
const QuadratureRule& cached_gauss_hermite(std::size_t order);

struct MatrixNorms {
  double frobenius = 0.0;
  double spectral = 0.0;  // largest |eigenvalue| of the symmetrized matrix
};

MatrixNorms matrix_norms(const DenseMatrix& m);

void require_finite(const DenseMatrix& m, const char* what);

/// Independent 64-bit seed for stream `stream` of a base seed (splitmix64).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// E[f(Z)], Z ~ N(0, 1).
template <typename F>
double expect_normal(const QuadratureRule& rule, F&& f) {
  const double scale = std::numbers::sqrt2;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    sum += rule.weights[i] * f(scale * rule.nodes[i]);
  }
  return sum / std::sqrt(std::numbers::pi);
}

/// E[f(W, B)] for independent W, B ~ N(0, 1) on the tensor grid.
template <typename F>
double expect_independent_normals(const QuadratureRule& rule, F&& f) {
  const double scale = std::numbers::sqrt2;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    const double w = scale * rule.nodes[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < rule.order(); ++j) {
      inner += rule.weights[j] * f(w, scale * rule.nodes[j]);
    }
    sum += rule.weights[i] * inner;
  }
  return sum / std::numbers::pi;
}

}  // namespace pinntk
