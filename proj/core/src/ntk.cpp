#include "pinntk/ntk.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pinntk/csv.hpp"
#include "pinntk/error.hpp"

namespace pinntk {

std::vector<JacobianBlock> jacobian_blocks(const MlpParams& params, const Batch& batch) {
  std::vector<JacobianBlock> out;
  out.reserve(batch.groups.size());
  for (const auto& g : batch.groups) {
    const OperatorTape tape(params, g.points, g.op);
    out.push_back({g.name, tape.jacobian()});
  }
  return out;
}

NtkMatrix::NtkMatrix(std::vector<std::string> groups, std::vector<std::size_t> sizes,
                     DenseMatrix assembled, std::vector<JacobianBlock> jacobians)
    : groups_(std::move(groups)),
      sizes_(std::move(sizes)),
      assembled_(std::move(assembled)),
      jacobians_(std::move(jacobians)) {
  if (groups_.size() != sizes_.size()) {
    throw DimensionError("NtkMatrix: group names and sizes differ in length");
  }
  std::size_t total = 0;
  for (std::size_t s : sizes_) {
    offsets_.push_back(total);
    total += s;
  }
  if (assembled_.rows() != assembled_.cols() || static_cast<std::size_t>(assembled_.rows()) != total) {
    throw DimensionError("NtkMatrix: assembled matrix does not match the group sizes");
  }
}

std::size_t NtkMatrix::index_of(const std::string& group) const {
  const auto it = std::find(groups_.begin(), groups_.end(), group);
  if (it == groups_.end()) {
    throw ParameterError("NtkMatrix: unknown group '" + group + "'");
  }
  return static_cast<std::size_t>(it - groups_.begin());
}

DenseMatrix NtkMatrix::block(std::size_t i, std::size_t j) const {
  if (i >= groups_.size() || j >= groups_.size()) {
    throw DimensionError("NtkMatrix: block index out of range");
  }
  return assembled_.block(static_cast<Eigen::Index>(offsets_[i]), static_cast<Eigen::Index>(offsets_[j]),
                          static_cast<Eigen::Index>(sizes_[i]), static_cast<Eigen::Index>(sizes_[j]));
}

DenseMatrix NtkMatrix::block(const std::string& gi, const std::string& gj) const {
  return block(index_of(gi), index_of(gj));
}

double NtkMatrix::block_trace(std::size_t g) const {
  const auto o = static_cast<Eigen::Index>(offsets_.at(g));
  const auto n = static_cast<Eigen::Index>(sizes_[g]);
  return assembled_.block(o, o, n, n).trace();
}

std::vector<double> NtkMatrix::block_traces() const {
  std::vector<double> out;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    out.push_back(block_trace(g));
  }
  return out;
}

DenseMatrix gram(const DenseMatrix& rows) {
  const Eigen::Index n = rows.rows();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  k.selfadjointView<Eigen::Lower>().rankUpdate(rows);
  DenseMatrix out = k.triangularView<Eigen::Lower>();
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

NtkMatrix assemble(const MlpParams& params, const PdeProblem& problem, const Batch& batch,
                   bool keep_jacobians) {
  if (batch.groups.empty() || batch.total_points() == 0) {
    throw DataError("assemble: empty batch");
  }
  if (batch.groups.size() != problem.num_groups()) {
    throw DimensionError("assemble: batch groups do not match problem '" + problem.name() + "'");
  }
  auto blocks = jacobian_blocks(params, batch);
  DenseMatrix stacked(static_cast<Eigen::Index>(batch.total_points()),
                      static_cast<Eigen::Index>(params.size()));
  Eigen::Index row = 0;
  std::vector<std::string> names;
  std::vector<std::size_t> sizes;
  for (const auto& b : blocks) {
    stacked.middleRows(row, b.rows.rows()) = b.rows;
    row += b.rows.rows();
    names.push_back(b.group_label);
    sizes.push_back(b.size());
  }
  DenseMatrix k = gram(stacked);
  if (!keep_jacobians) {
    blocks.clear();
  }
  return NtkMatrix(std::move(names), std::move(sizes), std::move(k), std::move(blocks));
}

std::vector<double> block_traces(const MlpParams& params, const Batch& batch) {
  std::vector<double> out;
  for (const auto& g : batch.groups) {
    const OperatorTape tape(params, g.points, g.op);
    out.push_back(tape.jacobian_row_norms2().sum());
  }
  return out;
}

BlockSpectra block_spectra(const NtkMatrix& k) {
  BlockSpectra out;
  out.full = sym_eig(k.assembled(), "K").spectrum;
  for (std::size_t g = 0; g < k.num_groups(); ++g) {
    out.blocks.push_back(sym_eig(k.block(g, g), "K_" + k.groups()[g]).spectrum);
  }
  return out;
}

double relative_change(const NtkMatrix& current, const NtkMatrix& reference) {
  if (current.groups() != reference.groups() || current.sizes() != reference.sizes()) {
    throw DimensionError("relative_change: kernels have different group layouts");
  }
  const double denom = matrix_norms(reference.assembled()).spectral;
  if (denom == 0.0) {
    throw DataError("relative_change: reference kernel is zero");
  }
  return matrix_norms(current.assembled() - reference.assembled()).spectral / denom;
}

double param_relative_change(const MlpParams& current, const MlpParams& reference) {
  if (!(current.spec() == reference.spec())) {
    throw DimensionError("param_relative_change: architectures differ");
  }
  const double denom = reference.flat().norm();
  if (denom == 0.0) {
    throw DataError("param_relative_change: reference parameters are all zero");
  }
  return (current.flat() - reference.flat()).norm() / denom;
}

std::vector<double> kernel_column_scales(const NtkMatrix& k, const std::vector<double>& weights,
                                         bool normalized) {
  if (weights.size() != k.num_groups()) {
    throw DimensionError("kernel_column_scales: one weight per group is required");
  }
  std::vector<double> scales;
  for (std::size_t g = 0; g < weights.size(); ++g) {
    scales.push_back(normalized ? weights[g] / static_cast<double>(k.sizes()[g]) : weights[g]);
  }
  return scales;
}

WeightedSpectrum weighted_spectrum(const NtkMatrix& k, const std::vector<double>& column_scales) {
  if (column_scales.size() != k.num_groups()) {
    throw DimensionError("weighted_spectrum: one scale per group is required");
  }
  Vector d(static_cast<Eigen::Index>(k.dim()));
  for (std::size_t g = 0; g < k.num_groups(); ++g) {
    d.segment(static_cast<Eigen::Index>(k.offset(g)), static_cast<Eigen::Index>(k.sizes()[g]))
        .setConstant(column_scales[g]);
  }
  const DenseMatrix kd = k.assembled() * d.asDiagonal();
  const DenseMatrix sym = 0.5 * (kd + kd.transpose());
  WeightedSpectrum out;
  out.spectrum = sym_eig(sym, "weighted K").spectrum;
  out.most_negative = std::min(0.0, out.spectrum.smallest());
  out.has_negative = out.most_negative < -1e-12 * std::abs(out.spectrum.largest());
  return out;
}

void write_spectra_csv_header(std::ostream& out) {
  CsvWriter(out, {"iteration", "block", "rank", "eigenvalue"});
}

void append_spectra_csv(std::ostream& out, std::size_t iteration, const BlockSpectra& spectra) {
  auto emit = [&](const Spectrum& s) {
    for (std::size_t r = 0; r < s.size(); ++r) {
      out << iteration << ',' << csv_escape(s.source_label) << ',' << r << ','
          << format_number(s.eigenvalues[r]) << '\n';
    }
  };
  emit(spectra.full);
  for (const auto& b : spectra.blocks) {
    emit(b);
  }
}

void write_drift_csv(std::ostream& out, const std::vector<DriftRecord>& records) {
  CsvWriter csv(out, {"iteration", "param_drift", "kernel_drift"});
  for (const auto& r : records) {
    csv.row({r.iteration, r.param_drift, r.kernel_drift});
  }
}

}  // namespace pinntk
