#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pinntk/network.hpp"
#include "pinntk/numerics.hpp"
#include "pinntk/problems.hpp"

namespace pinntk {

/// Gradient rows d(op u)(x_p)/d theta for the points of one group.
struct JacobianBlock {
  std::string group_label;
  DenseMatrix rows;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
};

/// Jacobian of every batch group, in batch order.
std::vector<JacobianBlock> jacobian_blocks(const MlpParams& params, const Batch& batch);

/// Block NTK K = J J^T with named groups along both axes.
class NtkMatrix {
 public:
  NtkMatrix(std::vector<std::string> groups, std::vector<std::size_t> sizes, DenseMatrix assembled,
            std::vector<JacobianBlock> jacobians = {});

  const std::vector<std::string>& groups() const { return groups_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t num_groups() const { return groups_.size(); }
  std::size_t offset(std::size_t g) const { return offsets_[g]; }
  std::size_t index_of(const std::string& group) const;

  const DenseMatrix& assembled() const { return assembled_; }
  std::size_t dim() const { return static_cast<std::size_t>(assembled_.rows()); }
  DenseMatrix block(std::size_t i, std::size_t j) const;
  DenseMatrix block(const std::string& gi, const std::string& gj) const;

  double trace() const { return assembled_.trace(); }
  double block_trace(std::size_t g) const;
  std::vector<double> block_traces() const;

  /// Empty unless assembled with keep_jacobians.
  const std::vector<JacobianBlock>& jacobians() const { return jacobians_; }

 private:
  std::vector<std::string> groups_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  DenseMatrix assembled_;
  std::vector<JacobianBlock> jacobians_;
};

/// Gram of stacked rows, lower triangle computed and mirrored so the result
/// is exactly symmetric.
DenseMatrix gram(const DenseMatrix& rows);

/// Throws DataError for an empty batch.
NtkMatrix assemble(const MlpParams& params, const PdeProblem& problem, const Batch& batch,
                   bool keep_jacobians = false);

/// Diagonal-block traces from Jacobian row norms, without any Gram product.
std::vector<double> block_traces(const MlpParams& params, const Batch& batch);

struct BlockSpectra {
  Spectrum full;
  std::vector<Spectrum> blocks;  // one per diagonal block, group order
};

BlockSpectra block_spectra(const NtkMatrix& k);

/// ||K - K_ref||_2 / ||K_ref||_2 with spectral norms.
double relative_change(const NtkMatrix& current, const NtkMatrix& reference);

/// ||theta - theta_ref||_2 / ||theta_ref||_2 over the flat parameter vector.
double param_relative_change(const MlpParams& current, const MlpParams& reference);

/// Column scaling per group for the weighted kernel: lambda_g / N_g when
/// normalized, lambda_g otherwise.
std::vector<double> kernel_column_scales(const NtkMatrix& k, const std::vector<double>& weights,
                                         bool normalized);

struct WeightedSpectrum {
  Spectrum spectrum;
  bool has_negative = false;
  double most_negative = 0.0;
};

/// Eigenvalues of the symmetrized weighted kernel (K D + D K)/2, where D
/// repeats each group's column scale over its rows. Negative values are
/// flagged.
WeightedSpectrum weighted_spectrum(const NtkMatrix& k, const std::vector<double>& column_scales);

/// Columns: iteration,block,rank,eigenvalue
void write_spectra_csv_header(std::ostream& out);
void append_spectra_csv(std::ostream& out, std::size_t iteration, const BlockSpectra& spectra);

/// Columns: iteration,param_drift,kernel_drift
struct DriftRecord {
  std::size_t iteration = 0;
  double param_drift = 0.0;
  double kernel_drift = 0.0;
};
void write_drift_csv(std::ostream& out, const std::vector<DriftRecord>& records);

}  // namespace pinntk
