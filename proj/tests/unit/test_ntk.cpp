#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pinntk/error.hpp"
#include "pinntk/ntk.hpp"

using namespace pinntk;

namespace {

MlpParams net(std::vector<std::size_t> hidden, std::uint64_t seed, std::size_t input_dim = 1) {
  ArchSpec spec;
  spec.input_dim = input_dim;
  spec.hidden = std::move(hidden);
  return init(spec, seed);
}

// J stacked row by row from single-point gradients.
DenseMatrix stacked_jacobian(const MlpParams& p, const Batch& b) {
  DenseMatrix j(static_cast<Eigen::Index>(b.total_points()), static_cast<Eigen::Index>(p.size()));
  Eigen::Index row = 0;
  for (const auto& g : b.groups) {
    for (Eigen::Index i = 0; i < g.points.cols(); ++i) {
      j.row(row++) = param_gradient_of_operator(p, g.points.col(i), g.op).transpose();
    }
  }
  return j;
}

double min_eig(const DenseMatrix& m) { return sym_eig(m).spectrum.smallest(); }

}  // namespace

TEST_CASE("single boundary point gives the scalar Gram") {
  const PdeProblem prob = poisson1d(1.0);
  const MlpParams p = net({10}, 1);
  Batch b = sample_batch(prob, {1, 1}, SamplingStrategy::fixed_uniform_grid, 0);
  b.groups[1].points.resize(1, 0);
  b.groups[1].targets.resize(0);
  const NtkMatrix k = assemble(p, prob, b);
  REQUIRE(k.dim() == 1);
  const double g2 = param_gradient(p, b.groups[0].points.col(0)).squaredNorm();
  CHECK(k.assembled()(0, 0) == doctest::Approx(g2).epsilon(1e-14));
  CHECK(k.assembled()(0, 0) >= 0.0);
}

TEST_CASE("assembled kernel equals the explicit Gram") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const bool wave = s % 2 == 1;
    const PdeProblem prob = wave ? wave1d() : poisson1d(1.0 + static_cast<double>(s));
    const MlpParams p = net({8 + s, 6}, 40 + s, prob.dim());
    const std::vector<std::size_t> sizes = wave ? std::vector<std::size_t>{7, 5, 9} : std::vector<std::size_t>{2, 11};
    const Batch b = sample_batch(prob, sizes, SamplingStrategy::uniform_random, s);
    const NtkMatrix k = assemble(p, prob, b, true);
    const DenseMatrix j = stacked_jacobian(p, b);
    const DenseMatrix ref = oracle::naive_gram(j);
    CHECK((k.assembled() - ref).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
    CHECK(k.assembled() == k.assembled().transpose());
    for (std::size_t gi = 0; gi < k.num_groups(); ++gi) {
      CHECK(k.jacobians()[gi].group_label == k.groups()[gi]);
      for (std::size_t gj = 0; gj < k.num_groups(); ++gj) {
        CHECK((k.block(gi, gj) - k.block(gj, gi).transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      }
      CHECK(min_eig(k.block(gi, gi)) >= -1e-8 * k.block(gi, gi).trace());
    }
  }
}

TEST_CASE("poisson width-100 kernel is symmetric PSD and satisfies the trace identity") {
  const PdeProblem prob = poisson1d(4.0);
  const MlpParams p = net({100}, 0);
  const Batch b = sample_batch(prob, {100, 100}, SamplingStrategy::fixed_uniform_grid, 0);
  const NtkMatrix k = assemble(p, prob, b);
  CHECK(relative_asymmetry(k.assembled()) == 0.0);
  const BlockSpectra s = block_spectra(k);
  CHECK(s.full.smallest() >= -1e-8 * k.trace());
  const double blocks = k.block_trace(0) + k.block_trace(1);
  CHECK(std::abs(s.full.trace - blocks) <= 1e-10 * blocks);
  const double sum = std::accumulate(s.full.eigenvalues.begin(), s.full.eigenvalues.end(), 0.0);
  CHECK(std::abs(sum - blocks) <= 1e-10 * blocks);
  REQUIRE(s.blocks.size() == 2);
  CHECK(s.full.source_label == "K");
  CHECK(s.blocks[0].source_label == "K_boundary");
  CHECK(std::is_sorted(s.blocks[1].eigenvalues.rbegin(), s.blocks[1].eigenvalues.rend()));

  const auto traces = block_traces(p, b);
  CHECK(std::abs(traces[0] - k.block_trace(0)) <= 1e-12 * k.block_trace(0));
  CHECK(std::abs(traces[1] - k.block_trace(1)) <= 1e-12 * k.block_trace(1));
}

TEST_CASE("wave three-block trace identity") {
  const PdeProblem prob = wave1d();
  const MlpParams p = net({20, 20}, 3, 2);
  const Batch b = sample_batch(prob, {30, 20, 40}, SamplingStrategy::uniform_random, 4);
  const NtkMatrix k = assemble(p, prob, b);
  const BlockSpectra s = block_spectra(k);
  const double blocks = k.block_trace(0) + k.block_trace(1) + k.block_trace(2);
  const double sum = std::accumulate(s.full.eigenvalues.begin(), s.full.eigenvalues.end(), 0.0);
  CHECK(std::abs(sum - blocks) <= 1e-10 * blocks);
  CHECK(k.index_of("initial_velocity") == 1);
  CHECK_THROWS_AS(k.index_of("nope"), ParameterError);
}

TEST_CASE("permuting batch points permutes the kernel") {
  const PdeProblem prob = poisson1d(2.0);
  const MlpParams p = net({15}, 8);
  const Batch b = sample_batch(prob, {2, 20}, SamplingStrategy::uniform_random, 5);
  Batch perm = b;
  std::vector<Eigen::Index> order(20);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(9));
  for (Eigen::Index i = 0; i < 20; ++i) {
    perm.groups[1].points.col(i) = b.groups[1].points.col(order[static_cast<std::size_t>(i)]);
    perm.groups[1].targets[i] = b.groups[1].targets[order[static_cast<std::size_t>(i)]];
  }
  const NtkMatrix k = assemble(p, prob, b);
  const NtkMatrix kp = assemble(p, prob, perm);
  const DenseMatrix rr = k.block(1, 1), rrp = kp.block(1, 1);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (Eigen::Index j = 0; j < 20; ++j) {
      worst = std::max(worst, std::abs(rrp(i, j) - rr(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)])));
    }
  }
  CHECK(worst <= 1e-12 * rr.cwiseAbs().maxCoeff());
  const auto e1 = block_spectra(k).full.eigenvalues, e2 = block_spectra(kp).full.eigenvalues;
  for (std::size_t i = 0; i < e1.size(); ++i) {
    CHECK(std::abs(e1[i] - e2[i]) <= 1e-10 * e1.front());
  }
}

TEST_CASE("relative_change and param_relative_change cases") {
  const PdeProblem prob = poisson1d(1.0);
  const MlpParams p = net({12}, 2);
  const NtkMatrix k = assemble(p, prob, sample_batch(prob, {2, 10}, SamplingStrategy::fixed_uniform_grid, 0));
  CHECK(relative_change(k, k) == 0.0);
  const NtkMatrix k2(k.groups(), k.sizes(), 2.0 * k.assembled());
  CHECK(relative_change(k2, k) == doctest::Approx(1.0).epsilon(1e-12));
  const NtkMatrix other = assemble(p, prob, sample_batch(prob, {2, 9}, SamplingStrategy::fixed_uniform_grid, 0));
  CHECK_THROWS_AS(relative_change(other, k), DimensionError);

  CHECK(param_relative_change(p, p) == 0.0);
  MlpParams q = p;
  q.flat()[3] += 1.0;
  CHECK(param_relative_change(q, p) == doctest::Approx(1.0 / p.flat().norm()).epsilon(1e-14));
  CHECK_THROWS_AS(param_relative_change(net({13}, 2), p), DimensionError);
  CHECK_THROWS_AS(assemble(p, prob, Batch{}), DataError);
}

TEST_CASE("weighted spectrum and column scales") {
  const PdeProblem prob = poisson1d(1.0);
  const MlpParams p = net({12}, 2);
  const NtkMatrix k = assemble(p, prob, sample_batch(prob, {2, 10}, SamplingStrategy::fixed_uniform_grid, 0));
  CHECK(kernel_column_scales(k, {4.0, 1.0}, true) == std::vector<double>{2.0, 0.1});
  CHECK(kernel_column_scales(k, {4.0, 1.0}, false) == std::vector<double>{4.0, 1.0});
  const WeightedSpectrum unit = weighted_spectrum(k, {1.0, 1.0});
  const BlockSpectra s = block_spectra(k);
  for (std::size_t i = 0; i < unit.spectrum.size(); ++i) {
    CHECK(std::abs(unit.spectrum.eigenvalues[i] - s.full.eigenvalues[i]) <= 1e-10 * s.full.eigenvalues[0]);
  }
  CHECK_FALSE(unit.has_negative);
}

TEST_CASE("spectra and drift csv") {
  const PdeProblem prob = poisson1d(1.0);
  const MlpParams p = net({4}, 2);
  const NtkMatrix k = assemble(p, prob, sample_batch(prob, {2, 3}, SamplingStrategy::fixed_uniform_grid, 0));
  std::ostringstream out;
  write_spectra_csv_header(out);
  append_spectra_csv(out, 7, block_spectra(k));
  const std::string text = out.str();
  CHECK(text.rfind("iteration,block,rank,eigenvalue\n7,K,0,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 5 + 2 + 3);

  std::ostringstream drift;
  write_drift_csv(drift, {{0, 0.0, 0.0}, {10, 0.5, 0.25}});
  CHECK(drift.str() == "iteration,param_drift,kernel_drift\n0,0,0\n10,0.5,0.25\n");
}
