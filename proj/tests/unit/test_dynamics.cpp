#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pinntk/dynamics.hpp"
#include "pinntk/error.hpp"

using namespace pinntk;

namespace {

DenseMatrix random_psd(Eigen::Index n, Eigen::Index rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix a(n, rank);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < rank; ++j) {
      a(i, j) = normal(rng);
    }
  }
  DenseMatrix k = a * a.transpose();
  return 0.5 * (k + k.transpose());
}

Vector random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = normal(rng);
  }
  return v;
}

NtkMatrix poisson_kernel() {
  const PdeProblem prob = poisson1d(4.0);
  ArchSpec spec;
  spec.hidden = {100};
  return assemble(init(spec, 0), prob, sample_batch(prob, {100, 100}, SamplingStrategy::fixed_uniform_grid, 0));
}

}  // namespace

TEST_CASE("evolve on a decoupled 2x2 system") {
  DenseMatrix k = DenseMatrix::Zero(2, 2);
  k(0, 0) = 2.0;
  k(1, 1) = 1.0;
  const LinearizedState s(k, Vector::Ones(2), Vector::Zero(2));
  const Vector y = evolve(s, 1.0);
  CHECK(std::abs(y[0] - (1 - std::exp(-2.0))) < 1e-14);
  CHECK(std::abs(y[1] - (1 - std::exp(-1.0))) < 1e-14);
  CHECK(evolve(s, 0.0) == Vector::Zero(2));
  CHECK_THROWS_AS(evolve(s, -1.0), ParameterError);
}

TEST_CASE("evolve at t = 0 returns the initial outputs exactly") {
  const LinearizedState s(random_psd(6, 6, 1), random_vector(6, 2), random_vector(6, 3));
  CHECK(evolve(s, 0.0) == s.initial_outputs());
}

TEST_CASE("evolve decays to the targets at the slowest rate") {
  const DenseMatrix k = random_psd(5, 5, 4) + DenseMatrix::Identity(5, 5);
  const Vector targets = random_vector(5, 5), init = random_vector(5, 6);
  const LinearizedState s(k, targets, init);
  const double lmin = s.eigensystem().spectrum.smallest();
  for (double t : {1.0, 5.0, 20.0}) {
    CHECK((evolve(s, t) - targets).norm() <= std::exp(-lmin * t) * (init - targets).norm() * (1 + 1e-12));
  }
}

TEST_CASE("semigroup property and monotone residual") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DenseMatrix k = random_psd(8, 4 + static_cast<Eigen::Index>(seed), seed);
    const Vector scales = random_vector(8, seed + 10).cwiseAbs().array() + 0.1;
    const LinearizedState s(k, random_vector(8, seed + 20), random_vector(8, seed + 30),
                            seed % 2 == 0 ? Vector() : scales);
    const double t1 = 0.3, t2 = 0.45;
    const LinearizedState mid(k, s.targets(), evolve(s, t1), seed % 2 == 0 ? Vector() : scales);
    const Vector direct = evolve(s, t1 + t2), stepped = evolve(mid, t2);
    CHECK((direct - stepped).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, direct.cwiseAbs().maxCoeff()));

    if (seed % 2 == 0) {
      double prev = (s.initial_outputs() - s.targets()).norm();
      for (int i = 1; i <= 40; ++i) {
        const double r = (evolve(s, 0.05 * i) - s.targets()).norm();
        CHECK(r <= prev * (1 + 1e-12));
        prev = r;
      }
    }
  }
}

TEST_CASE("weighted state solves dy/dt = -K D (y - targets)") {
  const DenseMatrix k = random_psd(4, 4, 9);
  Vector d(4);
  d << 2.0, 0.5, 1.0, 3.0;
  const Vector targets = random_vector(4, 1), init = random_vector(4, 2);
  const LinearizedState s(k, targets, init, d);
  // Forward Euler with a tiny step as an independent integrator.
  Vector y = init;
  const double h = 1e-5;
  for (int i = 0; i < 20000; ++i) {
    y -= h * k * d.asDiagonal() * (y - targets);
  }
  CHECK((evolve(s, 0.2) - y).norm() <= 1e-4 * (init - targets).norm());
  const DenseMatrix kd = k * d.asDiagonal();
  const auto sym_spec = s.eigensystem().spectrum.eigenvalues;
  Eigen::EigenSolver<DenseMatrix> general(kd);
  std::vector<double> ev;
  for (Eigen::Index i = 0; i < 4; ++i) {
    ev.push_back(general.eigenvalues()[i].real());
  }
  std::sort(ev.rbegin(), ev.rend());
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(ev[i] - sym_spec[i]) <= 1e-10 * sym_spec[0]);
  }
}

TEST_CASE("mode_decay examples") {
  const LinearizedState id(DenseMatrix::Identity(3, 3), Vector::Ones(3), Vector::Zero(3));
  for (const auto& m : mode_decay(id)) {
    CHECK(m.unit_time_decay == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  }

  Vector v(3);
  v << 1.0, 2.0, 2.0;
  const LinearizedState r1(v * v.transpose(), Vector::Ones(3), Vector::Zero(3));
  const auto modes = mode_decay(r1);
  CHECK(modes[0].eigenvalue == doctest::Approx(9.0));
  CHECK(modes[0].unit_time_decay == doctest::Approx(std::exp(-9.0)));
  CHECK(modes[0].projected_target == doctest::Approx(5.0 / 3.0));
  for (std::size_t i = 1; i < 3; ++i) {
    CHECK(std::abs(modes[i].unit_time_decay - 1.0) < 1e-12);
  }

  const NtkMatrix k = poisson_kernel();
  const LinearizedState s(k.assembled(), Vector::Zero(static_cast<Eigen::Index>(k.dim())),
                          Vector::Zero(static_cast<Eigen::Index>(k.dim())));
  const auto pm = mode_decay(s);
  CHECK(pm.front().eigenvalue >= 10.0 * pm[pm.size() / 2].eigenvalue);
}

TEST_CASE("average_rate examples") {
  CHECK(average_rate(sym_eig(DenseMatrix::Identity(4, 4)).spectrum) == doctest::Approx(1.0));
  DenseMatrix d = DenseMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  CHECK(average_rate(sym_eig(d).spectrum) == doctest::Approx(2.0));
  CHECK_THROWS_AS(average_rate(Spectrum{}), DimensionError);
}

// c(K_rr)/c(K_uu) at init for a = 4, width 100; see the trace-ratio entry in the notes.
TEST_CASE("residual block dominates the boundary block in average rate" * doctest::may_fail()) {
  const NtkMatrix k = poisson_kernel();
  const BlockSpectra s = block_spectra(k);
  CHECK(average_rate(s.blocks[1]) > 10.0 * average_rate(s.blocks[0]));
}

TEST_CASE("kernel regression examples") {
  const DenseMatrix k = random_psd(5, 5, 3) + 0.5 * DenseMatrix::Identity(5, 5);
  const Vector t = random_vector(5, 4);
  CHECK((kernel_regression_predict(k, k, t) - t).norm() <= 1e-10 * t.norm());

  const DenseMatrix test = random_psd(5, 5, 8).topRows(3);
  CHECK((kernel_regression_predict(DenseMatrix::Identity(5, 5), test, t) - test * t).norm() <= 1e-12 * (test * t).norm());

  CHECK_THROWS_AS(kernel_regression_predict(DenseMatrix::Zero(3, 3), DenseMatrix::Zero(1, 3), Vector::Ones(3)),
                  DegenerateKernelError);
  CHECK_THROWS_AS(kernel_regression_predict(k, test, Vector::Ones(4)), DimensionError);
  CHECK_THROWS_AS(kernel_regression_predict(k, test, t, -1.0), ParameterError);
}

TEST_CASE("rank-deficient regression matches a least-squares solve") {
  // K = A A^T with A of rank 3: minimum-norm coefficients c solve A^T c = z
  // where A z = t_projected; the normal equations of the least-squares
  // problem min |K c - t| restricted to range(A) give the oracle.
  const Eigen::Index n = 7, r = 3;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  DenseMatrix a(n, r);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      a(i, j) = normal(rng);
    }
  }
  const DenseMatrix k = a * a.transpose();
  const Vector t = random_vector(n, 13);
  DenseMatrix b(4, r);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      b(i, j) = normal(rng);
    }
  }
  const DenseMatrix test = b * a.transpose();
  // c = A (A^T A)^{-2} A^T t is the pseudo-inverse solution of K c = t.
  const DenseMatrix ata = a.transpose() * a;
  const DenseMatrix ata_inv = ata.inverse();
  const Vector coeffs = a * (ata_inv * ata_inv * (a.transpose() * t));
  const Vector oracle = test * coeffs;
  const Vector got = kernel_regression_predict(k, test, t);
  CHECK((got - oracle).norm() <= 1e-8 * std::max(1.0, oracle.norm()));
}

TEST_CASE("trajectory csv") {
  std::ostringstream out;
  Vector p(2), a(2);
  p << 0.5, 1.0;
  a << 0.25, 1.0;
  write_trajectory_csv(out, {{3, p, a}});
  CHECK(out.str() == "iteration,point,predicted,actual\n3,0,0.5,0.25\n3,1,1,1\n");
}
