#include "pinntk/numerics.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>

#include "pinntk/error.hpp"

namespace pinntk {

namespace {

constexpr int kMaxJacobiSweeps = 80;
constexpr double kAsymmetryWarn = 1e-6;
constexpr double kAsymmetryError = 1e-3;

// One two-sided Jacobi rotation zeroing a(p, q); v accumulates the rotations.
void rotate(DenseMatrix& a, DenseMatrix& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  const Eigen::Index n = a.rows();

  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

double off_diagonal_norm2(const DenseMatrix& a) {
  double off = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      off += a(i, j) * a(i, j);
    }
  }
  return 2.0 * off;
}

}  // namespace

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw DataError(std::string(what) + ": non-finite entries");
  }
}

double relative_asymmetry(const DenseMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("relative_asymmetry: matrix is not square");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  if (m.size() == 0 || scale == 0.0) {
    return 0.0;
  }
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

Vector EigenSystem::values() const {
  return Eigen::Map<const Vector>(spectrum.eigenvalues.data(),
                                  static_cast<Eigen::Index>(spectrum.eigenvalues.size()));
}

DenseMatrix EigenSystem::reconstruct() const {
  return vectors * values().asDiagonal() * vectors.transpose();
}

EigenSystem sym_eig(const DenseMatrix& m, std::string label) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "sym_eig: expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
  require_finite(m, "sym_eig");

  const double asym = relative_asymmetry(m);
  if (asym > kAsymmetryError) {
    std::ostringstream os;
    os << "sym_eig(" << label << "): relative asymmetry " << asym << " exceeds " << kAsymmetryError;
    throw DataError(os.str());
  }
  if (asym > kAsymmetryWarn) {
    std::ostringstream os;
    os << "sym_eig(" << label << "): relative asymmetry " << asym;
    warn(os.str());
  }

  const Eigen::Index n = m.rows();
  DenseMatrix a = 0.5 * (m + m.transpose());
  DenseMatrix v = DenseMatrix::Identity(n, n);
  const double trace = a.trace();
  const double fro = a.norm();
  const double tol2 = (1e-15 * fro) * (1e-15 * fro);

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off_diagonal_norm2(a) <= tol2) {
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) {
          continue;
        }
        // Skip entries already negligible next to both diagonal entries.
        const double app = std::abs(a(p, p));
        const double aqq = std::abs(a(q, q));
        if (sweep > 3 && std::abs(apq) <= 1e-18 * std::min(app, aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  EigenSystem out;
  out.spectrum.source_label = std::move(label);
  out.spectrum.trace = trace;
  out.spectrum.eigenvalues.reserve(static_cast<std::size_t>(n));
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.spectrum.eigenvalues.push_back(a(src, src));
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

QuadratureRule gauss_hermite(std::size_t order) {
  if (order == 0) {
    throw ParameterError("gauss_hermite: order must be >= 1");
  }
  const auto n = static_cast<Eigen::Index>(order);

  // Golub–Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
  // matrix of the Hermite recurrence.
  DenseMatrix jacobi = DenseMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double beta = std::sqrt(static_cast<double>(k + 1) / 2.0);
    jacobi(k, k + 1) = beta;
    jacobi(k + 1, k) = beta;
  }
  std::vector<double> guesses = sym_eig(jacobi, "hermite-jacobi").spectrum.eigenvalues;
  std::sort(guesses.begin(), guesses.end());

  const double pi_m4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);

  for (std::size_t i = 0; i < order; ++i) {
    double z = guesses[i];
    double derivative = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Orthonormal Hermite recurrence: p_j(z) with p_0 = pi^{-1/4}.
      double p1 = pi_m4;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = z * std::sqrt(2.0 / jd) * p2 - std::sqrt((jd - 1.0) / jd) * p3;
      }
      derivative = std::sqrt(2.0 * static_cast<double>(order)) * p2;
      const double step = p1 / derivative;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) {
        break;
      }
    }
    // Weight from the derivative at the polished node.
    double p1 = pi_m4;
    double p2 = 0.0;
    for (std::size_t j = 1; j <= order; ++j) {
      const double p3 = p2;
      p2 = p1;
      const double jd = static_cast<double>(j);
      p1 = z * std::sqrt(2.0 / jd) * p2 - std::sqrt((jd - 1.0) / jd) * p3;
    }
    derivative = std::sqrt(2.0 * static_cast<double>(order)) * p2;
    rule.nodes[i] = z;
    rule.weights[i] = 2.0 / (derivative * derivative);
  }

  // Enforce the exact symmetry of the rule.
  for (std::size_t i = 0; i < order / 2; ++i) {
    const std::size_t j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (order % 2 == 1) {
    rule.nodes[order / 2] = 0.0;
  }
  return rule;
}

const QuadratureRule& cached_gauss_hermite(std::size_t order) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) {
    slot = std::make_unique<QuadratureRule>(gauss_hermite(order));
  }
  return *slot;
}

MatrixNorms matrix_norms(const DenseMatrix& m) {
  require_finite(m, "matrix_norms");
  MatrixNorms out;
  out.frobenius = m.norm();
  if (m.size() == 0 || out.frobenius == 0.0) {
    return out;
  }
  if (m.rows() != m.cols()) {
    throw DimensionError("matrix_norms: spectral norm needs a square matrix");
  }
  const DenseMatrix sym = 0.5 * (m + m.transpose());
  const auto eig = sym_eig(sym, "norm");
  out.spectral = std::max(std::abs(eig.spectrum.largest()), std::abs(eig.spectrum.smallest()));
  return out;
}

}  // namespace pinntk
