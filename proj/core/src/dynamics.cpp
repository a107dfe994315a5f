#include "pinntk/dynamics.hpp"

#include <cmath>
#include <ostream>

#include "pinntk/csv.hpp"
#include "pinntk/error.hpp"

namespace pinntk {

LinearizedState::LinearizedState(DenseMatrix kernel, Vector targets, Vector initial_outputs,
                                 Vector column_scales)
    : kernel_(std::move(kernel)), targets_(std::move(targets)), initial_(std::move(initial_outputs)),
      scales_(std::move(column_scales)) {
  const Eigen::Index n = kernel_.rows();
  if (kernel_.cols() != n || targets_.size() != n || initial_.size() != n) {
    throw DimensionError("LinearizedState: kernel, targets and initial outputs disagree in size");
  }
  if (scales_.size() == 0) {
    scales_ = Vector::Ones(n);
  }
  if (scales_.size() != n) {
    throw DimensionError("LinearizedState: column scales disagree with the kernel size");
  }
  if ((scales_.array() <= 0.0).any() || !scales_.allFinite()) {
    throw ParameterError("LinearizedState: column scales must be positive and finite");
  }
  require_finite(kernel_, "LinearizedState kernel");
  sqrt_scales_ = scales_.cwiseSqrt();
  DenseMatrix sym = sqrt_scales_.asDiagonal() * kernel_ * sqrt_scales_.asDiagonal();
  eig_ = sym_eig(sym, "linearized kernel");
}

namespace {

Vector expand_scales(const NtkMatrix& k, const std::vector<double>& group_scales) {
  if (group_scales.empty()) {
    return Vector::Ones(static_cast<Eigen::Index>(k.dim()));
  }
  if (group_scales.size() != k.num_groups()) {
    throw DimensionError("LinearizedState: one scale per kernel group is required");
  }
  Vector d(static_cast<Eigen::Index>(k.dim()));
  for (std::size_t g = 0; g < k.num_groups(); ++g) {
    d.segment(static_cast<Eigen::Index>(k.offset(g)), static_cast<Eigen::Index>(k.sizes()[g]))
        .setConstant(group_scales[g]);
  }
  return d;
}

}  // namespace

LinearizedState::LinearizedState(const NtkMatrix& kernel, Vector targets, Vector initial_outputs,
                                 const std::vector<double>& group_scales)
    : LinearizedState(kernel.assembled(), std::move(targets), std::move(initial_outputs),
                      expand_scales(kernel, group_scales)) {}

Vector LinearizedState::project_error(const Vector& outputs) const {
  if (outputs.size() != targets_.size()) {
    throw DimensionError("project_error: output length does not match the state");
  }
  return eig_.vectors.transpose() * sqrt_scales_.cwiseProduct(outputs - targets_);
}

Vector evolve(const LinearizedState& state, double t) {
  if (!(t >= 0.0)) {
    throw ParameterError("evolve: time must be non-negative");
  }
  if (t == 0.0) {
    return state.initial_outputs();
  }
  const Vector coeffs = state.project_error(state.initial_outputs());
  const Vector decay = (-t * state.eigensystem().values().array()).exp().matrix();
  const Vector error = state.eigensystem().vectors * decay.cwiseProduct(coeffs);
  return state.targets() + error.cwiseQuotient(state.column_scales().cwiseSqrt());
}

std::vector<ModeDecay> mode_decay(const LinearizedState& state) {
  const Vector proj =
      state.eigensystem().vectors.transpose() * state.column_scales().cwiseSqrt().cwiseProduct(state.targets());
  std::vector<ModeDecay> out;
  const auto& ev = state.eigensystem().spectrum.eigenvalues;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    out.push_back({ev[i], std::abs(proj[static_cast<Eigen::Index>(i)]), std::exp(-ev[i])});
  }
  return out;
}

double average_rate(const Spectrum& spectrum) {
  if (spectrum.size() == 0) {
    throw DimensionError("average_rate: empty spectrum");
  }
  return spectrum.trace / static_cast<double>(spectrum.size());
}

Vector kernel_regression_predict(const DenseMatrix& train_kernel, const DenseMatrix& test_kernel,
                                 const Vector& targets, double epsilon, double threshold) {
  if (train_kernel.rows() != train_kernel.cols() || test_kernel.cols() != train_kernel.rows() ||
      targets.size() != train_kernel.rows()) {
    throw DimensionError("kernel_regression_predict: inconsistent shapes");
  }
  if (!(epsilon >= 0.0)) {
    throw ParameterError("kernel_regression_predict: regularization must be non-negative");
  }
  const EigenSystem eig = sym_eig(train_kernel, "K*");
  const Vector shifted = eig.values().array() + epsilon;
  const double top = shifted.size() > 0 ? shifted.maxCoeff() : 0.0;
  const double cutoff = threshold * top;
  const Vector proj = eig.vectors.transpose() * targets;
  Vector coeffs = Vector::Zero(proj.size());
  std::size_t kept = 0;
  for (Eigen::Index i = 0; i < shifted.size(); ++i) {
    if (top > 0.0 && shifted[i] > cutoff) {
      coeffs[i] = proj[i] / shifted[i];
      ++kept;
    }
  }
  if (kept == 0) {
    throw DegenerateKernelError("kernel_regression_predict: every eigenvalue is below the threshold");
  }
  return test_kernel * (eig.vectors * coeffs);
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  CsvWriter csv(out, {"iteration", "point", "predicted", "actual"});
  for (const auto& r : records) {
    for (Eigen::Index p = 0; p < r.predicted.size(); ++p) {
      csv.row({r.iteration, static_cast<std::size_t>(p), r.predicted[p], r.actual[p]});
    }
  }
}

}  // namespace pinntk
