#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pinntk/linear_operator.hpp"
#include "pinntk/network.hpp"

namespace pinntk {

/// Axis-aligned box; an axis with lo == hi is degenerate (a face or a point).
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  /// Product of the non-degenerate extents (1 for a single point).
  double measure() const;
  bool contains(const Vector& x, double tol = 0.0) const;
  bool operator==(const Box&) const = default;
};

/// Union of boxes a constraint group samples from.
struct Region {
  std::vector<Box> pieces;

  bool contains(const Vector& x, double tol = 0.0) const;
};

/// Closed-form solution with analytic per-coordinate jets.
struct ExactSolution {
  std::function<double(const Vector&)> value;
  std::function<Jet2(const Vector&, std::size_t coord)> jet;
};

using ScalarField = std::function<double(const Vector&)>;

/// One term of the loss that pins (op u) to target on a region.
struct ConstraintGroup {
  std::string name;
  LinearOperator op;
  ScalarField target;
  Region region;
  std::string weight_symbol;
};

/// Linear PDE: residual_op u = forcing on the domain, plus constraint groups.
///
/// Construction checks the exact solution (when given) against the residual
/// operator at 100 seeded interior points, throwing DataError above 1e-6.
class PdeProblem {
 public:
  PdeProblem(std::string name, Box domain, LinearOperator residual_op, ScalarField forcing,
             std::vector<ConstraintGroup> groups, std::optional<ExactSolution> exact);

  const std::string& name() const { return name_; }
  const Box& domain() const { return domain_; }
  std::size_t dim() const { return domain_.dim(); }
  const LinearOperator& residual_operator() const { return residual_op_; }
  const ScalarField& forcing() const { return forcing_; }
  const std::vector<ConstraintGroup>& groups() const { return groups_; }
  const std::optional<ExactSolution>& exact() const { return exact_; }

  /// Constraint group names followed by "residual"; the stacking order of
  /// batches, kernels and weights.
  std::vector<std::string> group_names() const;
  std::vector<std::string> weight_symbols() const;
  std::size_t num_groups() const { return groups_.size() + 1; }

 private:
  std::string name_;
  Box domain_;
  LinearOperator residual_op_;
  ScalarField forcing_;
  std::vector<ConstraintGroup> groups_;
  std::optional<ExactSolution> exact_;
};

/// u_xx = f on [0,1], u(0) = u(1) = 0, exact u = sin(a pi x).
PdeProblem poisson1d(double a);

/// u_tt - 4 u_xx = 0 on [0,1]^2 with coordinates (x, t).
/// Groups: "dirichlet" (x = 0, x = 1 and the t = 0 slice, target the exact
/// solution) and "initial_velocity" (u_t = 0 at t = 0).
PdeProblem wave1d();

/// Sum over terms of coefficient * matching jet component, minus forcing.
double apply_operator(const LinearOperator& op, const Vector& x,
                      const std::function<Jet2(const Vector&, std::size_t)>& jet);

/// r(x) = (L u)(x, theta) - f(x) for the network.
double residual(const MlpParams& params, const PdeProblem& problem, const Vector& x);
/// Same residual evaluated on the analytic exact-solution jets.
double exact_residual(const PdeProblem& problem, const Vector& x);

enum class SamplingStrategy { fixed_uniform_grid, uniform_random };
std::string to_string(SamplingStrategy s);
SamplingStrategy parse_sampling_strategy(const std::string& text);

/// Points and targets for one group; columns of points are samples.
struct GroupBatch {
  std::string name;
  LinearOperator op;
  Points points;
  Eigen::VectorXd targets;

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
};

/// Constraint groups first, the residual group last.
struct Batch {
  std::vector<GroupBatch> groups;

  std::size_t total_points() const;
  std::vector<std::size_t> sizes() const;
  /// Targets stacked in group order.
  Eigen::VectorXd stacked_targets() const;
};

/// Samples one batch. sizes holds one count per group (constraint groups,
/// then residual). Grid sampling splits each region's count across pieces
/// by measure and places equispaced points including piece endpoints.
Batch sample_batch(const PdeProblem& problem, const std::vector<std::size_t>& sizes,
                   SamplingStrategy strategy, std::uint64_t seed);

/// Evaluation grid: 1000 points in 1D, 100 x 100 in 2D (tensor grid for
/// higher dimensions with per-axis count `per_axis`).
Points evaluation_grid(const PdeProblem& problem, std::size_t per_axis = 0);

inline constexpr std::size_t kEvalGrid1D = 1000;
inline constexpr std::size_t kEvalGrid2D = 100;

/// ||u_pred - u_exact|| / ||u_exact|| on the evaluation grid.
double relative_l2_error(const MlpParams& params, const PdeProblem& problem,
                         std::size_t per_axis = 0);
double relative_l2_error(const std::function<double(const Vector&)>& predictor,
                         const PdeProblem& problem, std::size_t per_axis = 0);

/// CSV dump: group,x0[,x1...],target
void write_batch_csv(std::ostream& out, const Batch& batch);

}  // namespace pinntk
