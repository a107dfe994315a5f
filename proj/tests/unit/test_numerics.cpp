#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pinntk/error.hpp"
#include "pinntk/numerics.hpp"

using namespace pinntk;

namespace {

DenseMatrix random_symmetric(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      m(i, j) = m(j, i) = normal(rng);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("sym_eig identity and diagonal") {
  const auto id = sym_eig(DenseMatrix::Identity(3, 3));
  for (double v : id.spectrum.eigenvalues) {
    CHECK(v == doctest::Approx(1.0));
  }

  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const auto e = sym_eig(d);
  CHECK(e.spectrum.eigenvalues[0] == doctest::Approx(3.0));
  CHECK(e.spectrum.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig agrees with characteristic-polynomial bisection") {
  const DenseMatrix m = random_symmetric(5, 7);
  const auto e = sym_eig(m);
  const auto ref = oracle::eigenvalues_by_bisection(m);
  REQUIRE(ref.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(std::abs(e.spectrum.eigenvalues[i] - ref[i]) < 1e-8);
  }
}

TEST_CASE("sym_eig reconstruction, orthonormality and trace") {
  for (unsigned seed = 1; seed <= 10; ++seed) {
    const Eigen::Index n = 3 + seed * 4;
    DenseMatrix m = random_symmetric(n, seed);
    if (seed % 2 == 0) {
      m = m * m.transpose();  // PSD with a spread spectrum
    }
    const auto e = sym_eig(m);
    const double fro = m.norm();
    CHECK((e.reconstruct() - m).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + fro));
    CHECK((e.vectors.transpose() * e.vectors - DenseMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    double sum = 0.0;
    for (double v : e.spectrum.eigenvalues) {
      sum += v;
    }
    CHECK(std::abs(sum - m.trace()) <= 1e-10 * std::max(1.0, std::abs(m.trace())) + 1e-12 * fro);
    CHECK(std::is_sorted(e.spectrum.eigenvalues.rbegin(), e.spectrum.eigenvalues.rend()));
  }
}

TEST_CASE("sym_eig errors") {
  CHECK_THROWS_AS(sym_eig(DenseMatrix::Zero(2, 3)), DimensionError);
  DenseMatrix bad = DenseMatrix::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(sym_eig(bad), DataError);
  DenseMatrix asym = DenseMatrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(sym_eig(asym), DataError);

  std::string seen;
  auto previous = set_warning_sink([&](const std::string& m) { seen = m; });
  DenseMatrix slight = DenseMatrix::Identity(2, 2);
  slight(0, 1) = 1e-5;
  CHECK_NOTHROW(sym_eig(slight));
  CHECK(seen.find("asymmetry") != std::string::npos);
  set_warning_sink(previous);
}

TEST_CASE("gauss_hermite exactness") {
  const auto r10 = gauss_hermite(10);
  double w = 0.0, z2 = 0.0;
  for (std::size_t i = 0; i < r10.order(); ++i) {
    w += r10.weights[i];
    z2 += r10.weights[i] * r10.nodes[i] * r10.nodes[i];
  }
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  CHECK(std::abs(w - sqrt_pi) < 1e-12);
  CHECK(std::abs(z2 - sqrt_pi / 2.0) < 1e-12);

  // k-th moment of e^{-z^2}: Gamma((k+1)/2) for even k, 0 for odd k.
  const auto r12 = gauss_hermite(12);
  for (int k = 0; k <= 20; ++k) {
    double s = 0.0, abs_moment = 0.0;
    for (std::size_t i = 0; i < r12.order(); ++i) {
      s += r12.weights[i] * std::pow(r12.nodes[i], k);
      abs_moment += r12.weights[i] * std::pow(std::abs(r12.nodes[i]), k);
    }
    const double exact = k % 2 == 1 ? 0.0 : std::tgamma((k + 1) / 2.0);
    CHECK(std::abs(s - exact) <= 1e-12 * std::max(1.0, abs_moment));
  }
  CHECK_THROWS_AS(gauss_hermite(0), ParameterError);
}

// tanh has poles at +-i*pi/2; orders 40 and 80 differ by about 4e-7.
TEST_CASE("gauss_hermite self-convergence on E[tanh(Z)^2], orders 40 and 80" * doctest::may_fail()) {
  auto sq = [](double z) { return std::tanh(z) * std::tanh(z); };
  const double a = expect_normal(gauss_hermite(40), sq);
  const double b = expect_normal(gauss_hermite(80), sq);
  CHECK(std::abs(a - b) < 1e-10);
}

TEST_CASE("gauss_hermite on E[tanh(Z)^2] against an adaptive-quadrature reference") {
  auto sq = [](double z) { return std::tanh(z) * std::tanh(z); };
  const double reference = 0.3942944903978;  // adaptive quadrature, |err| < 1e-12
  CHECK(std::abs(expect_normal(gauss_hermite(40), sq) - reference) < 1e-6);
  CHECK(std::abs(expect_normal(gauss_hermite(120), sq) - reference) < 1e-11);
  CHECK(std::abs(expect_normal(gauss_hermite(120), sq) - expect_normal(gauss_hermite(240), sq)) < 1e-10);
}

TEST_CASE("matrix_norms") {
  const auto z = matrix_norms(DenseMatrix::Zero(3, 3));
  CHECK(z.frobenius == 0.0);
  CHECK(z.spectral == 0.0);

  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -4.0;
  const auto n = matrix_norms(d);
  CHECK(n.frobenius == doctest::Approx(5.0));
  CHECK(n.spectral == doctest::Approx(4.0));

  const DenseMatrix m = random_symmetric(6, 3);
  const auto e = sym_eig(m);
  const double max_abs = std::max(std::abs(e.spectrum.largest()), std::abs(e.spectrum.smallest()));
  const auto mn = matrix_norms(m);
  CHECK(std::abs(mn.spectral - max_abs) < 1e-10);
  CHECK(mn.spectral <= mn.frobenius);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}
