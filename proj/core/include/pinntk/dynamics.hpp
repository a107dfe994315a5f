#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "pinntk/ntk.hpp"
#include "pinntk/numerics.hpp"

namespace pinntk {

/// Outputs under gradient flow with a frozen kernel:
///   d/dt y = -K D (y - targets),
/// where D = diag(column_scales) carries the loss weights (all ones for the
/// unweighted, unnormalized loss). The eigensystem is that of the symmetric
/// matrix D^{1/2} K D^{1/2}, which shares its spectrum with K D.
class LinearizedState {
 public:
  LinearizedState(DenseMatrix kernel, Vector targets, Vector initial_outputs,
                  Vector column_scales = {});
  /// Expands per-group scales over the kernel's rows.
  LinearizedState(const NtkMatrix& kernel, Vector targets, Vector initial_outputs,
                  const std::vector<double>& group_scales);

  const DenseMatrix& kernel() const { return kernel_; }
  const Vector& targets() const { return targets_; }
  const Vector& initial_outputs() const { return initial_; }
  const Vector& column_scales() const { return scales_; }
  const EigenSystem& eigensystem() const { return eig_; }
  std::size_t dim() const { return static_cast<std::size_t>(targets_.size()); }

  /// Error y - targets in eigen-coordinates: Q^T D^{1/2} (y - targets).
  Vector project_error(const Vector& outputs) const;

 private:
  DenseMatrix kernel_;
  Vector targets_;
  Vector initial_;
  Vector scales_;
  Vector sqrt_scales_;
  EigenSystem eig_;
};

/// targets + D^{-1/2} Q e^{-Lambda t} Q^T D^{1/2} (initial - targets).
/// Throws ParameterError for t < 0.
Vector evolve(const LinearizedState& state, double t);

struct ModeDecay {
  double eigenvalue = 0.0;
  double projected_target = 0.0;  // |(Q^T D^{1/2} targets)_i|
  double unit_time_decay = 1.0;   // e^{-lambda_i}
};

std::vector<ModeDecay> mode_decay(const LinearizedState& state);

/// Trace over dimension. Throws DimensionError for an empty spectrum.
double average_rate(const Spectrum& spectrum);

inline constexpr double kPseudoInverseThreshold = 1e-10;

/// K_test (K + eps I)^{-1} targets through the eigendecomposition of K.
/// Eigenvalues (after adding eps) at or below threshold * lambda_max are
/// dropped; if none survive DegenerateKernelError is thrown.
Vector kernel_regression_predict(const DenseMatrix& train_kernel, const DenseMatrix& test_kernel,
                                 const Vector& targets, double epsilon = 0.0,
                                 double threshold = kPseudoInverseThreshold);

/// Columns: iteration,point,predicted,actual
struct TrajectoryRecord {
  std::size_t iteration = 0;
  Vector predicted;
  Vector actual;
};
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records);

}  // namespace pinntk
