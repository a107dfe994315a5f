#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pinntk/linear_operator.hpp"
#include "pinntk/numerics.hpp"

namespace pinntk {

enum class Activation { tanh };
enum class Parameterization { ntk, glorot };

std::string to_string(Parameterization p);
Parameterization parse_parameterization(const std::string& text);

/// Scalar-output MLP shape: d0 inputs, hidden widths d1..dL, one output.
struct ArchSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden;
  Activation activation = Activation::tanh;
  Parameterization parameterization = Parameterization::ntk;

  void validate() const;
  /// Number of affine maps (hidden layers + output layer).
  std::size_t num_layers() const { return hidden.size() + 1; }
  std::size_t layer_in(std::size_t h) const;
  std::size_t layer_out(std::size_t h) const;
  std::size_t parameter_count() const;

  bool operator==(const ArchSpec&) const = default;
};

using Points = Eigen::MatrixXd;  // one column per point
using GradVector = Eigen::VectorXd;
using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// All weights and biases in one flat vector.
///
/// Flat layout, for h = 0..L: W^(h) row-major (layer_out x layer_in), then
/// b^(h). In ntk mode the affine map of layer h >= 1 is scaled by
/// 1/sqrt(d_h); the first layer acts on the raw input.
class MlpParams {
 public:
  MlpParams(ArchSpec spec, Eigen::VectorXd flat);
  static MlpParams zeros(ArchSpec spec);

  const ArchSpec& spec() const { return spec_; }
  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::VectorXd& flat() { return flat_; }
  std::size_t size() const { return static_cast<std::size_t>(flat_.size()); }

  ConstRowMajorMap weight(std::size_t h) const;
  RowMajorMap weight(std::size_t h);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t h) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t h);

  std::size_t weight_offset(std::size_t h) const { return offsets_[h]; }
  std::size_t bias_offset(std::size_t h) const;
  /// Forward multiplier of layer h's weight product.
  double layer_scale(std::size_t h) const;

 private:
  ArchSpec spec_;
  Eigen::VectorXd flat_;
  std::vector<std::size_t> offsets_;
};

/// NTK mode: every entry i.i.d. N(0,1). Glorot mode: weights uniform in
/// +-sqrt(6/(fan_in+fan_out)), biases zero. Draws follow flat order.
MlpParams init(const ArchSpec& spec, std::uint64_t seed);

/// u, du/dx_i and d2u/dx_i^2 at one point.
struct Jet2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

double forward(const MlpParams& params, const Vector& x);
Jet2 forward_jet(const MlpParams& params, const Vector& x, std::size_t coord);
GradVector param_gradient(const MlpParams& params, const Vector& x);
GradVector param_gradient_of_operator(const MlpParams& params, const Vector& x,
                                      const LinearOperator& op);

/// Batched forward pass that records what reverse accumulation needs.
///
/// Propagates (value, d1, d2) along every coordinate the operator touches,
/// then exposes L u at each point, vector-Jacobian products, and per-point
/// Jacobian rows of L u with respect to the flat parameters.
class OperatorTape {
 public:
  OperatorTape(const MlpParams& params, const Points& points, const LinearOperator& op);

  std::size_t num_points() const { return num_points_; }
  /// (L u)(x_p) for every point.
  const Eigen::VectorXd& outputs() const { return outputs_; }
  const Eigen::VectorXd& values() const { return values_; }
  /// Propagated derivative of u of the given order along coord.
  Eigen::VectorXd component(std::size_t coord, int order) const;

  /// sum_p cotangent[p] * d(L u)(x_p)/d theta.
  GradVector vjp(const Eigen::VectorXd& cotangent) const;
  /// Rows d(L u)(x_p)/d theta, one per point.
  DenseMatrix jacobian() const;
  /// Squared Euclidean norm of every Jacobian row, without forming rows.
  Eigen::VectorXd jacobian_row_norms2() const;

 private:
  struct Layer {
    // Inputs to the affine map, columns stacked per component block.
    Eigen::MatrixXd input;
    // tanh(z) and pre-activation derivative blocks (hidden layers only).
    Eigen::MatrixXd t;
    Eigen::MatrixXd z_derivs;
  };

  int block_of(std::size_t coord, int order) const;
  // Cotangents of every output component for the given per-point cotangent.
  Eigen::MatrixXd output_cotangents(const Eigen::VectorXd& cotangent) const;
  // Walks the layers backwards; visit(h, g) receives the pre-activation
  // cotangent blocks of layer h.
  template <typename Visit>
  void backward(Eigen::MatrixXd g, Visit&& visit) const;

  const MlpParams* params_;
  LinearOperator op_;
  std::size_t num_points_ = 0;
  std::vector<std::size_t> coords_;  // coordinates with derivative blocks
  std::vector<bool> second_;         // per coords_ entry: d2 block present
  std::vector<int> d1_block_;        // block index of d1 for coords_[i]
  std::vector<int> d2_block_;        // block index of d2, or -1
  int num_blocks_ = 1;
  std::vector<Layer> layers_;
  Eigen::VectorXd values_;
  Eigen::VectorXd outputs_;
  Eigen::MatrixXd final_blocks_;  // 1 x (P * num_blocks)
};

/// Plain-text checkpoint: header line, ArchSpec line, then one parameter per
/// line in flat order with 17 significant digits.
void write_checkpoint(std::ostream& out, const MlpParams& params);
MlpParams read_checkpoint(std::istream& in);

}  // namespace pinntk
