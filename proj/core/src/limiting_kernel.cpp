#include "pinntk/limiting_kernel.hpp"

#include <cmath>
#include <utility>
#include <numbers>
#include <ostream>

#include "pinntk/csv.hpp"
#include "pinntk/error.hpp"
#include "pinntk/ntk.hpp"

namespace pinntk {

namespace {

struct Tanh3 {
  double t, s1, s2, s3;
};

Tanh3 tanh_derivs(double z) {
  const double t = std::tanh(z);
  const double t2 = t * t;
  const double s1 = 1.0 - t2;
  return {t, s1, -2.0 * t * s1, -2.0 + 8.0 * t2 - 6.0 * t2 * t2};
}

double dtanh(double z) {
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

}  // namespace

double sigma0(const Vector& x, const Vector& xp) {
  if (x.size() != xp.size()) {
    throw DimensionError("sigma0: inputs differ in dimension");
  }
  return x.dot(xp) + 1.0;
}

double sigma0(double x, double xp) { return x * xp + 1.0; }

double gaussian_pair_expectation(double s11, double s12, double s22,
                                 const std::function<double(double, double)>& f, std::size_t order) {
  if (!(s11 > 0.0) || !(s22 >= 0.0) || !std::isfinite(s12)) {
    throw DataError("gaussian_pair_expectation: covariance is not positive semidefinite");
  }
  const double l11 = std::sqrt(s11);
  const double l21 = s12 / l11;
  const double schur = s22 - l21 * l21;
  if (schur < -1e-10 * std::max(1.0, s22)) {
    throw DataError("gaussian_pair_expectation: covariance is not positive semidefinite");
  }
  const QuadratureRule& rule = cached_gauss_hermite(order);
  if (schur <= 1e-14 * std::max(1.0, s22)) {
    return expect_normal(rule, [&](double z) { return f(l11 * z, l21 * z); });
  }
  const double l22 = std::sqrt(schur);
  return expect_independent_normals(
      rule, [&](double z1, double z2) { return f(l11 * z1, l21 * z1 + l22 * z2); });
}

double sigma1(double x, double xp, std::size_t order) {
  if (xp < x) {
    std::swap(x, xp);  // same Cholesky factor for both argument orders
  }
  return gaussian_pair_expectation(
             sigma0(x, x), sigma0(x, xp), sigma0(xp, xp),
             [](double u, double v) { return std::tanh(u) * std::tanh(v); }, order) +
         1.0;
}

double sigma1_dot(double x, double xp, std::size_t order) {
  if (xp < x) {
    std::swap(x, xp);
  }
  return gaussian_pair_expectation(
      sigma0(x, x), sigma0(x, xp), sigma0(xp, xp),
      [](double u, double v) { return dtanh(u) * dtanh(v); }, order);
}

double sigma1_xx(double x, double xp, std::size_t order) {
  return expect_independent_normals(cached_gauss_hermite(order), [&](double w, double b) {
    const double w2 = w * w;
    return w2 * w2 * tanh_derivs(w * x + b).s2 * tanh_derivs(w * xp + b).s2;
  });
}

double theta_uu(double x, double xp, std::size_t order) {
  const QuadratureRule& rule = cached_gauss_hermite(order);
  const double e_dot = expect_independent_normals(
      rule, [&](double w, double b) { return dtanh(w * x + b) * dtanh(w * xp + b); });
  const double e_act = expect_independent_normals(
      rule, [&](double w, double b) { return std::tanh(w * x + b) * std::tanh(w * xp + b); });
  return e_dot * (x * xp) + e_act + e_dot + 1.0;
}

double theta_uu_recursive(const Vector& x, const Vector& xp, std::size_t depth, std::size_t order) {
  if (depth == 0) {
    throw ParameterError("theta_uu_recursive: depth must be >= 1");
  }
  // sig[h] = Sigma^(h)(x, x'), sig_xx[h] = Sigma^(h)(x, x), dots[h] = SigmaDot^(h)
  std::vector<double> sig{sigma0(x, xp)};
  std::vector<double> sig_xx{sigma0(x, x)};
  std::vector<double> sig_pp{sigma0(xp, xp)};
  std::vector<double> dots{1.0};
  for (std::size_t h = 1; h <= depth; ++h) {
    const double a = sig_xx[h - 1];
    const double c = sig[h - 1];
    const double d = sig_pp[h - 1];
    auto act = [](double u, double v) { return std::tanh(u) * std::tanh(v); };
    sig.push_back(gaussian_pair_expectation(a, c, d, act, order) + 1.0);
    sig_xx.push_back(gaussian_pair_expectation(a, a, a, act, order) + 1.0);
    sig_pp.push_back(gaussian_pair_expectation(d, d, d, act, order) + 1.0);
    dots.push_back(gaussian_pair_expectation(
        a, c, d, [](double u, double v) { return dtanh(u) * dtanh(v); }, order));
  }
  dots.push_back(1.0);  // SigmaDot^(L+1)

  double theta = 0.0;
  for (std::size_t h = 1; h <= depth + 1; ++h) {
    double prod = 1.0;
    for (std::size_t hp = h; hp <= depth + 1; ++hp) {
      prod *= dots[hp];
    }
    theta += sig[h - 1] * prod;
  }
  return theta;
}

ThetaRrTerms theta_rr_terms(double x, double xp, std::size_t order) {
  const QuadratureRule& rule = cached_gauss_hermite(order);
  // Six expectations on one tensor grid.
  const double scale = std::numbers::sqrt2;
  double e1 = 0, e2 = 0, e3 = 0, e4 = 0, eb = 0;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    const double w = scale * rule.nodes[i];
    const double w2 = w * w;
    const double w3 = w2 * w;
    const double w4 = w2 * w2;
    double a1 = 0, a2 = 0, a3 = 0, a4 = 0, ab = 0;
    for (std::size_t j = 0; j < rule.order(); ++j) {
      const double b = scale * rule.nodes[j];
      const Tanh3 p = tanh_derivs(w * x + b);
      const Tanh3 q = tanh_derivs(w * xp + b);
      const double wj = rule.weights[j];
      a1 += wj * w4 * p.s3 * q.s3;
      a2 += wj * w3 * p.s3 * q.s2;
      a3 += wj * w3 * q.s3 * p.s2;
      a4 += wj * w2 * p.s2 * q.s2;
      ab += wj * w4 * p.s2 * q.s2;
    }
    const double wi = rule.weights[i];
    e1 += wi * a1;
    e2 += wi * a2;
    e3 += wi * a3;
    e4 += wi * a4;
    eb += wi * ab;
  }
  const double norm = 1.0 / std::numbers::pi;
  ThetaRrTerms t;
  t.j1 = norm * e1 * x * xp;
  t.j2 = 2.0 * norm * e2 * x;
  t.j3 = 2.0 * norm * e3 * xp;
  t.j4 = 4.0 * norm * e4;
  t.b = norm * eb;
  t.c = norm * e1;
  return t;
}

ThetaUrTerms theta_ur_terms(double x, double xp, std::size_t order) {
  const QuadratureRule& rule = cached_gauss_hermite(order);
  const double scale = std::numbers::sqrt2;
  double e_a1 = 0, e_a2 = 0, e_b = 0;
  for (std::size_t i = 0; i < rule.order(); ++i) {
    const double w = scale * rule.nodes[i];
    const double w2 = w * w;
    double a1 = 0, a2 = 0, ab = 0;
    for (std::size_t j = 0; j < rule.order(); ++j) {
      const double b = scale * rule.nodes[j];
      const Tanh3 p = tanh_derivs(w * x + b);
      const Tanh3 q = tanh_derivs(w * xp + b);
      const double wj = rule.weights[j];
      a1 += wj * w2 * p.s1 * q.s3;
      a2 += wj * w * p.s1 * q.s2;
      ab += wj * w2 * p.t * q.s2;
    }
    const double wi = rule.weights[i];
    e_a1 += wi * a1;
    e_a2 += wi * a2;
    e_b += wi * ab;
  }
  const double norm = 1.0 / std::numbers::pi;
  ThetaUrTerms t;
  t.a = norm * e_a1 * x * xp + 2.0 * norm * e_a2 * x;
  t.b = norm * e_b;
  t.c = norm * e_a1;
  return t;
}

double theta_ur(double x, double xp, std::size_t order) { return theta_ur_terms(x, xp, order).total(); }

double theta_rr(double x, double xp, std::size_t order) { return theta_rr_terms(x, xp, order).total(); }

DenseMatrix LimitingKernel::block_matrix(const std::vector<double>& xu, const std::vector<double>& xr) const {
  const auto nu = static_cast<Eigen::Index>(xu.size());
  const auto nr = static_cast<Eigen::Index>(xr.size());
  DenseMatrix k(nu + nr, nu + nr);
  for (Eigen::Index i = 0; i < nu; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = theta_uu(xu[i], xu[j]);
    }
    for (Eigen::Index j = 0; j < nr; ++j) {
      k(i, nu + j) = k(nu + j, i) = theta_ur(xu[i], xr[j]);
    }
  }
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(nu + i, nu + j) = k(nu + j, nu + i) = theta_rr(xr[i], xr[j]);
    }
  }
  return k;
}

namespace {

void check_mc_args(const ArchSpec& spec, std::size_t num_inits) {
  spec.validate();
  if (num_inits < 2) {
    throw ParameterError("Monte-Carlo estimates need at least 2 initializations");
  }
  if (spec.parameterization != Parameterization::ntk) {
    throw ParameterError("Monte-Carlo kernel estimates require the ntk parameterization");
  }
}

}  // namespace

McKernelEstimate mc_kernel_oracle(const ArchSpec& spec, const Batch& batch, std::size_t num_inits,
                                  std::uint64_t seed) {
  check_mc_args(spec, num_inits);
  const auto n = static_cast<Eigen::Index>(batch.total_points());
  if (n == 0) {
    throw DataError("mc_kernel_oracle: empty batch");
  }
  // Welford accumulation in init order.
  DenseMatrix mean = DenseMatrix::Zero(n, n);
  DenseMatrix m2 = DenseMatrix::Zero(n, n);
  DenseMatrix stacked(n, static_cast<Eigen::Index>(spec.parameter_count()));
  for (std::size_t i = 0; i < num_inits; ++i) {
    const MlpParams params = init(spec, derive_seed(seed, i));
    Eigen::Index row = 0;
    for (const auto& b : jacobian_blocks(params, batch)) {
      stacked.middleRows(row, b.rows.rows()) = b.rows;
      row += b.rows.rows();
    }
    const DenseMatrix k = gram(stacked);
    const DenseMatrix delta = k - mean;
    mean += delta / static_cast<double>(i + 1);
    m2.array() += delta.array() * (k - mean).array();
  }
  McKernelEstimate out;
  for (const auto& g : batch.groups) {
    out.groups.push_back(g.name);
    out.sizes.push_back(g.size());
  }
  const double count = static_cast<double>(num_inits);
  out.mean = std::move(mean);
  out.standard_error = (m2.array() / (count - 1.0) / count).sqrt().matrix();
  out.num_inits = num_inits;
  return out;
}

McFieldEstimate mc_operator_field(const ArchSpec& spec, const Points& points, const LinearOperator& op,
                                  std::size_t num_inits, std::uint64_t seed) {
  check_mc_args(spec, num_inits);
  const Eigen::Index p = points.cols();
  const auto m = static_cast<Eigen::Index>(num_inits);
  Eigen::MatrixXd samples(m, p);
  for (std::size_t i = 0; i < num_inits; ++i) {
    const MlpParams params = init(spec, derive_seed(seed, i));
    const OperatorTape tape(params, points, op);
    samples.row(static_cast<Eigen::Index>(i)) = tape.outputs().transpose();
  }
  const double count = static_cast<double>(num_inits);
  McFieldEstimate out;
  out.num_inits = num_inits;
  out.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - out.mean.transpose();
  out.mean_stderr = (centered.colwise().squaredNorm().transpose() / (count - 1.0) / count).cwiseSqrt();
  out.covariance = (centered.transpose() * centered) / (count - 1.0);
  out.covariance_stderr.resize(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b) {
      const Eigen::ArrayXd prod = centered.col(a).array() * centered.col(b).array();
      const double var = (prod - prod.mean()).square().sum() / (count - 1.0);
      out.covariance_stderr(a, b) = std::sqrt(var / count);
    }
  }
  return out;
}

void write_limit_comparison_csv(std::ostream& out, const std::vector<LimitComparisonRow>& rows) {
  CsvWriter csv(out, {"width", "entry", "empirical_mean", "stderr", "limit", "deviation"});
  for (const auto& r : rows) {
    csv.row({r.width, r.entry, r.empirical_mean, r.standard_error, r.limit,
             std::abs(r.empirical_mean - r.limit)});
  }
}

}  // namespace pinntk
