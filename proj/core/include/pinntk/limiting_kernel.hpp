#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pinntk/network.hpp"
#include "pinntk/numerics.hpp"
#include "pinntk/problems.hpp"

namespace pinntk {

// Infinite-width quantities for tanh networks under the NTK parameterization.
// Scalar overloads describe the one-hidden-layer model u = W1 tanh(W0 x + b0)
// / sqrt(N) + b1 with every parameter N(0, 1).

/// x^T x' + 1
double sigma0(const Vector& x, const Vector& xp);
double sigma0(double x, double xp);

/// E[f(u, v)] for (u, v) ~ N(0, [[s11, s12], [s12, s22]]).
///
/// Tensorized Gauss–Hermite through a Cholesky factor; a rank-deficient
/// covariance falls back to a single 1D rule. Throws DataError when the
/// covariance is not positive semidefinite.
double gaussian_pair_expectation(double s11, double s12, double s22,
                                 const std::function<double(double, double)>& f,
                                 std::size_t order = kDefaultQuadratureOrder);

/// E[tanh(u) tanh(v)] + 1 with (u, v) ~ N(0, Lambda) built from sigma0.
double sigma1(double x, double xp, std::size_t order = kDefaultQuadratureOrder);
/// E[tanh'(u) tanh'(v)] with the same Lambda.
double sigma1_dot(double x, double xp, std::size_t order = kDefaultQuadratureOrder);
/// E[w^4 tanh''(w x + b) tanh''(w x' + b)] over independent w, b ~ N(0, 1):
/// the covariance of u_xx in the limit.
double sigma1_xx(double x, double xp, std::size_t order = kDefaultQuadratureOrder);

/// sigma1_dot * x x' + sigma1 + sigma1_dot, the extra 1 from the output bias
/// sitting inside sigma1. Expectations taken over independent (w, b).
double theta_uu(double x, double xp, std::size_t order = kDefaultQuadratureOrder);

/// Limiting NTK of a depth-L tanh MLP from the sum-product formula
///   Theta = sum_{h=1}^{L+1} Sigma^(h-1) prod_{h'=h}^{L+1} SigmaDot^(h'),
/// with SigmaDot^(L+1) = 1 and each layer's expectation taken under the
/// covariance of the previous layer.
double theta_uu_recursive(const Vector& x, const Vector& xp, std::size_t depth,
                          std::size_t order = kDefaultQuadratureOrder);

/// <du(x)/d theta, du_xx(x')/d theta> in the limit: A_ur + B_ur + C_ur.
double theta_ur(double x, double xp, std::size_t order = kDefaultQuadratureOrder);
/// <du_xx(x)/d theta, du_xx(x')/d theta> in the limit: A_rr + B_rr + C_rr.
double theta_rr(double x, double xp, std::size_t order = kDefaultQuadratureOrder);

/// Named terms of theta_rr and theta_ur, useful for term-by-term checks.
struct ThetaRrTerms {
  double j1 = 0.0, j2 = 0.0, j3 = 0.0, j4 = 0.0;
  double b = 0.0, c = 0.0;
  double a() const { return j1 + j2 + j3 + j4; }
  double total() const { return a() + b + c; }
};
struct ThetaUrTerms {
  double a = 0.0, b = 0.0, c = 0.0;
  double total() const { return a + b + c; }
};
ThetaRrTerms theta_rr_terms(double x, double xp, std::size_t order = kDefaultQuadratureOrder);
ThetaUrTerms theta_ur_terms(double x, double xp, std::size_t order = kDefaultQuadratureOrder);

/// Bundles the limiting functions at a fixed quadrature order.
struct LimitingKernel {
  std::size_t order = kDefaultQuadratureOrder;

  double theta_uu(double x, double xp) const { return pinntk::theta_uu(x, xp, order); }
  double theta_ur(double x, double xp) const { return pinntk::theta_ur(x, xp, order); }
  double theta_rr(double x, double xp) const { return pinntk::theta_rr(x, xp, order); }
  double sigma1(double x, double xp) const { return pinntk::sigma1(x, xp, order); }
  double sigma1_dot(double x, double xp) const { return pinntk::sigma1_dot(x, xp, order); }
  double sigma1_xx(double x, double xp) const { return pinntk::sigma1_xx(x, xp, order); }

  /// [[Theta_uu, Theta_ur], [Theta_ru, Theta_rr]] on boundary-style points
  /// xu and residual points xr, laid out like assemble() for a batch whose
  /// groups are (identity on xu, d2/dx2 on xr).
  DenseMatrix block_matrix(const std::vector<double>& xu, const std::vector<double>& xr) const;
};

/// Entrywise sample mean and standard error of K(0) over independent inits.
struct McKernelEstimate {
  std::vector<std::string> groups;
  std::vector<std::size_t> sizes;
  DenseMatrix mean;
  DenseMatrix standard_error;
  std::size_t num_inits = 0;
};

/// Init i uses seed derive_seed(seed, i). Throws ParameterError for
/// num_inits < 2 or a non-ntk spec.
McKernelEstimate mc_kernel_oracle(const ArchSpec& spec, const Batch& batch, std::size_t num_inits,
                                  std::uint64_t seed);

/// Sample mean and covariance of (op u)(x_p) over independent inits, with
/// standard errors for both.
struct McFieldEstimate {
  Vector mean;
  Vector mean_stderr;
  DenseMatrix covariance;
  DenseMatrix covariance_stderr;
  std::size_t num_inits = 0;
};

McFieldEstimate mc_operator_field(const ArchSpec& spec, const Points& points, const LinearOperator& op,
                                  std::size_t num_inits, std::uint64_t seed);

/// Columns: width,entry,empirical_mean,stderr,limit,deviation
struct LimitComparisonRow {
  std::size_t width = 0;
  std::string entry;
  double empirical_mean = 0.0;
  double standard_error = 0.0;
  double limit = 0.0;
};
void write_limit_comparison_csv(std::ostream& out, const std::vector<LimitComparisonRow>& rows);

}  // namespace pinntk
