#include "pinntk/network.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "pinntk/error.hpp"

namespace pinntk {

std::string to_string(Parameterization p) {
  return p == Parameterization::ntk ? "ntk" : "glorot";
}

Parameterization parse_parameterization(const std::string& text) {
  if (text == "ntk") {
    return Parameterization::ntk;
  }
  if (text == "glorot") {
    return Parameterization::glorot;
  }
  throw ParameterError("unknown parameterization '" + text + "' (expected ntk or glorot)");
}

void ArchSpec::validate() const {
  if (input_dim == 0) {
    throw ParameterError("ArchSpec: input_dim must be >= 1");
  }
  if (hidden.empty()) {
    throw ParameterError("ArchSpec: at least one hidden layer is required");
  }
  for (std::size_t w : hidden) {
    if (w == 0) {
      throw ParameterError("ArchSpec: hidden widths must be >= 1");
    }
  }
}

std::size_t ArchSpec::layer_in(std::size_t h) const { return h == 0 ? input_dim : hidden[h - 1]; }

std::size_t ArchSpec::layer_out(std::size_t h) const { return h < hidden.size() ? hidden[h] : 1; }

std::size_t ArchSpec::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t h = 0; h < num_layers(); ++h) {
    count += layer_out(h) * layer_in(h) + layer_out(h);
  }
  return count;
}

MlpParams::MlpParams(ArchSpec spec, Eigen::VectorXd flat) : spec_(std::move(spec)), flat_(std::move(flat)) {
  spec_.validate();
  if (static_cast<std::size_t>(flat_.size()) != spec_.parameter_count()) {
    std::ostringstream os;
    os << "MlpParams: flat vector has " << flat_.size() << " entries, spec needs "
       << spec_.parameter_count();
    throw DimensionError(os.str());
  }
  std::size_t offset = 0;
  for (std::size_t h = 0; h < spec_.num_layers(); ++h) {
    offsets_.push_back(offset);
    offset += spec_.layer_out(h) * spec_.layer_in(h) + spec_.layer_out(h);
  }
}

MlpParams MlpParams::zeros(ArchSpec spec) {
  const std::size_t n = spec.parameter_count();
  return MlpParams(std::move(spec), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
}

ConstRowMajorMap MlpParams::weight(std::size_t h) const {
  return {flat_.data() + offsets_[h], static_cast<Eigen::Index>(spec_.layer_out(h)),
          static_cast<Eigen::Index>(spec_.layer_in(h))};
}

RowMajorMap MlpParams::weight(std::size_t h) {
  return {flat_.data() + offsets_[h], static_cast<Eigen::Index>(spec_.layer_out(h)),
          static_cast<Eigen::Index>(spec_.layer_in(h))};
}

std::size_t MlpParams::bias_offset(std::size_t h) const {
  return offsets_[h] + spec_.layer_out(h) * spec_.layer_in(h);
}

Eigen::Map<const Eigen::VectorXd> MlpParams::bias(std::size_t h) const {
  return {flat_.data() + bias_offset(h), static_cast<Eigen::Index>(spec_.layer_out(h))};
}

Eigen::Map<Eigen::VectorXd> MlpParams::bias(std::size_t h) {
  return {flat_.data() + bias_offset(h), static_cast<Eigen::Index>(spec_.layer_out(h))};
}

double MlpParams::layer_scale(std::size_t h) const {
  if (spec_.parameterization == Parameterization::ntk && h > 0) {
    return 1.0 / std::sqrt(static_cast<double>(spec_.layer_in(h)));
  }
  return 1.0;
}

MlpParams init(const ArchSpec& spec, std::uint64_t seed) {
  MlpParams params = MlpParams::zeros(spec);
  std::mt19937_64 rng(seed);
  if (spec.parameterization == Parameterization::ntk) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < params.flat().size(); ++i) {
      params.flat()[i] = normal(rng);
    }
    return params;
  }
  for (std::size_t h = 0; h < spec.num_layers(); ++h) {
    const double fan = static_cast<double>(spec.layer_in(h) + spec.layer_out(h));
    const double limit = std::sqrt(6.0 / fan);
    std::uniform_real_distribution<double> uniform(-limit, limit);
    auto w = params.weight(h);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = uniform(rng);
      }
    }
  }
  return params;
}

namespace {

void check_point(const MlpParams& params, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != params.spec().input_dim) {
    std::ostringstream os;
    os << "input point has dimension " << x.size() << ", network expects "
       << params.spec().input_dim;
    throw DimensionError(os.str());
  }
}

}  // namespace

OperatorTape::OperatorTape(const MlpParams& params, const Points& points, const LinearOperator& op)
    : params_(&params), op_(op), num_points_(static_cast<std::size_t>(points.cols())) {
  const ArchSpec& spec = params.spec();
  if (static_cast<std::size_t>(points.rows()) != spec.input_dim) {
    std::ostringstream os;
    os << "points have dimension " << points.rows() << ", network expects " << spec.input_dim;
    throw DimensionError(os.str());
  }
  if (op.max_coordinate() >= spec.input_dim) {
    throw DimensionError("operator differentiates along coordinate " +
                         std::to_string(op.max_coordinate()) + " of a " +
                         std::to_string(spec.input_dim) + "-dimensional input");
  }

  coords_ = op.derivative_coordinates();
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    d1_block_.push_back(num_blocks_++);
    const bool second = op.needs_second(coords_[i]);
    second_.push_back(second);
    d2_block_.push_back(second ? num_blocks_++ : -1);
  }

  const Eigen::Index p = points.cols();
  const Eigen::Index nb = num_blocks_;

  Eigen::MatrixXd input = Eigen::MatrixXd::Zero(points.rows(), p * nb);
  input.leftCols(p) = points;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    input.block(static_cast<Eigen::Index>(coords_[i]), d1_block_[i] * p, 1, p).setOnes();
  }

  const std::size_t num_layers = spec.num_layers();
  layers_.resize(num_layers);
  for (std::size_t h = 0; h < num_layers; ++h) {
    const auto w = params.weight(h);
    const auto b = params.bias(h);
    const double s = params.layer_scale(h);

    // The value block gets its own product so forward() and forward_jet()
    // agree bit for bit.
    Eigen::MatrixXd zv = w * input.leftCols(p);
    zv *= s;
    zv.colwise() += b;
    Eigen::MatrixXd zd;
    if (nb > 1) {
      zd = w * input.rightCols(p * (nb - 1));
      zd *= s;
    }

    if (h + 1 == num_layers) {
      final_blocks_.resize(1, p * nb);
      final_blocks_.leftCols(p) = zv;
      if (nb > 1) {
        final_blocks_.rightCols(p * (nb - 1)) = zd;
      }
      layers_[h].input = std::move(input);
      break;
    }

    Eigen::MatrixXd t = zv.array().tanh().matrix();
    const Eigen::ArrayXXd t_arr = t.array();
    const Eigen::ArrayXXd s1 = 1.0 - t_arr.square();
    const Eigen::ArrayXXd s2 = -2.0 * t_arr * s1;

    Eigen::MatrixXd next(zv.rows(), p * nb);
    next.leftCols(p) = t;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      const auto dz = zd.middleCols((d1_block_[i] - 1) * p, p).array();
      next.middleCols(d1_block_[i] * p, p) = (s1 * dz).matrix();
      if (second_[i]) {
        const auto d2z = zd.middleCols((d2_block_[i] - 1) * p, p).array();
        next.middleCols(d2_block_[i] * p, p) = (s2 * dz.square() + s1 * d2z).matrix();
      }
    }

    layers_[h].input = std::move(input);
    layers_[h].t = std::move(t);
    layers_[h].z_derivs = std::move(zd);
    input = std::move(next);
  }

  values_ = final_blocks_.leftCols(p).transpose();
  outputs_ = Eigen::VectorXd::Zero(p);
  for (const auto& term : op.terms()) {
    const int block = block_of(term.coordinate, term.order);
    outputs_ += term.coefficient * final_blocks_.middleCols(block * p, p).transpose();
  }
}

int OperatorTape::block_of(std::size_t coord, int order) const {
  if (order == 0) {
    return 0;
  }
  const auto it = std::find(coords_.begin(), coords_.end(), coord);
  if (it == coords_.end()) {
    throw ParameterError("derivative along coordinate " + std::to_string(coord) + " was not propagated");
  }
  const auto i = static_cast<std::size_t>(it - coords_.begin());
  const int block = order == 1 ? d1_block_[i] : d2_block_[i];
  if (block < 0) {
    throw ParameterError("second derivative along coordinate " + std::to_string(coord) +
                         " was not propagated");
  }
  return block;
}

Eigen::VectorXd OperatorTape::component(std::size_t coord, int order) const {
  const auto p = static_cast<Eigen::Index>(num_points_);
  return final_blocks_.middleCols(block_of(coord, order) * p, p).transpose();
}

Eigen::MatrixXd OperatorTape::output_cotangents(const Eigen::VectorXd& cotangent) const {
  const auto p = static_cast<Eigen::Index>(num_points_);
  if (cotangent.size() != p) {
    throw DimensionError("cotangent length does not match the number of points");
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(1, p * num_blocks_);
  for (const auto& term : op_.terms()) {
    const int block = block_of(term.coordinate, term.order);
    g.middleCols(block * p, p) += term.coefficient * cotangent.transpose();
  }
  return g;
}

template <typename Visit>
void OperatorTape::backward(Eigen::MatrixXd g, Visit&& visit) const {
  const auto p = static_cast<Eigen::Index>(num_points_);
  for (std::size_t h = layers_.size(); h-- > 0;) {
    visit(h, g);
    if (h == 0) {
      break;
    }
    const double s = params_->layer_scale(h);
    Eigen::MatrixXd ga = params_->weight(h).transpose() * g;
    ga *= s;

    // Through the activation that produced layer h's input.
    const Layer& prev = layers_[h - 1];
    const Eigen::ArrayXXd t = prev.t.array();
    const Eigen::ArrayXXd s1 = 1.0 - t.square();
    const Eigen::ArrayXXd s2 = -2.0 * t * s1;
    const Eigen::ArrayXXd s3 = -2.0 + 8.0 * t.square() - 6.0 * t.square().square();

    Eigen::MatrixXd gz(ga.rows(), ga.cols());
    Eigen::ArrayXXd g_value = ga.leftCols(p).array() * s1;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      const auto dz = prev.z_derivs.middleCols((d1_block_[i] - 1) * p, p).array();
      const auto ga1 = ga.middleCols(d1_block_[i] * p, p).array();
      g_value += ga1 * s2 * dz;
      Eigen::ArrayXXd g_d1 = ga1 * s1;
      if (second_[i]) {
        const auto d2z = prev.z_derivs.middleCols((d2_block_[i] - 1) * p, p).array();
        const auto ga2 = ga.middleCols(d2_block_[i] * p, p).array();
        g_value += ga2 * (s3 * dz.square() + s2 * d2z);
        g_d1 += ga2 * 2.0 * s2 * dz;
        gz.middleCols(d2_block_[i] * p, p) = (ga2 * s1).matrix();
      }
      gz.middleCols(d1_block_[i] * p, p) = g_d1.matrix();
    }
    gz.leftCols(p) = g_value.matrix();
    g = std::move(gz);
  }
}

GradVector OperatorTape::vjp(const Eigen::VectorXd& cotangent) const {
  const auto p = static_cast<Eigen::Index>(num_points_);
  GradVector grad = GradVector::Zero(static_cast<Eigen::Index>(params_->size()));
  backward(output_cotangents(cotangent), [&](std::size_t h, const Eigen::MatrixXd& g) {
    const double s = params_->layer_scale(h);
    const Eigen::Index rows = g.rows();
    const Eigen::Index cols = layers_[h].input.rows();
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw(
        grad.data() + params_->weight_offset(h), rows, cols);
    gw.noalias() = g * layers_[h].input.transpose();
    gw *= s;
    grad.segment(static_cast<Eigen::Index>(params_->bias_offset(h)), rows) =
        g.leftCols(p).rowwise().sum();
  });
  return grad;
}

DenseMatrix OperatorTape::jacobian() const {
  const auto p = static_cast<Eigen::Index>(num_points_);
  const Eigen::Index nb = num_blocks_;
  DenseMatrix jac = DenseMatrix::Zero(p, static_cast<Eigen::Index>(params_->size()));
  backward(output_cotangents(Eigen::VectorXd::Ones(p)), [&](std::size_t h, const Eigen::MatrixXd& g) {
    const double s = params_->layer_scale(h);
    const Eigen::MatrixXd& input = layers_[h].input;
    const Eigen::Index rows = g.rows();
    const Eigen::Index cols = input.rows();
    const auto w_off = static_cast<Eigen::Index>(params_->weight_offset(h));
    const auto b_off = static_cast<Eigen::Index>(params_->bias_offset(h));
    Eigen::MatrixXd gp(rows, nb);
    Eigen::MatrixXd ap(cols, nb);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> block(rows, cols);
    for (Eigen::Index q = 0; q < p; ++q) {
      for (Eigen::Index k = 0; k < nb; ++k) {
        gp.col(k) = g.col(k * p + q);
        ap.col(k) = input.col(k * p + q);
      }
      block.noalias() = gp * ap.transpose();
      block *= s;
      jac.row(q).segment(w_off, rows * cols) =
          Eigen::Map<const Eigen::RowVectorXd>(block.data(), rows * cols);
      jac.row(q).segment(b_off, rows) = g.col(q).transpose();
    }
  });
  return jac;
}

Eigen::VectorXd OperatorTape::jacobian_row_norms2() const {
  const auto p = static_cast<Eigen::Index>(num_points_);
  const Eigen::Index nb = num_blocks_;
  Eigen::VectorXd norms = Eigen::VectorXd::Zero(p);
  backward(output_cotangents(Eigen::VectorXd::Ones(p)), [&](std::size_t h, const Eigen::MatrixXd& g) {
    const double s = params_->layer_scale(h);
    const Eigen::MatrixXd& input = layers_[h].input;
    Eigen::MatrixXd gp(g.rows(), nb);
    Eigen::MatrixXd ap(input.rows(), nb);
    for (Eigen::Index q = 0; q < p; ++q) {
      for (Eigen::Index k = 0; k < nb; ++k) {
        gp.col(k) = g.col(k * p + q);
        ap.col(k) = input.col(k * p + q);
      }
      // ||G A^T||_F^2 = <G^T G, A^T A>
      const Eigen::MatrixXd gg = gp.transpose() * gp;
      const Eigen::MatrixXd aa = ap.transpose() * ap;
      norms[q] += s * s * gg.cwiseProduct(aa).sum() + g.col(q).squaredNorm();
    }
  });
  return norms;
}

double forward(const MlpParams& params, const Vector& x) {
  check_point(params, x);
  OperatorTape tape(params, x, LinearOperator::identity());
  return tape.values()[0];
}

Jet2 forward_jet(const MlpParams& params, const Vector& x, std::size_t coord) {
  check_point(params, x);
  const OperatorTape tape(params, x, LinearOperator::derivative(coord, 2));
  return {tape.values()[0], tape.component(coord, 1)[0], tape.component(coord, 2)[0]};
}

GradVector param_gradient(const MlpParams& params, const Vector& x) {
  return param_gradient_of_operator(params, x, LinearOperator::identity());
}

GradVector param_gradient_of_operator(const MlpParams& params, const Vector& x,
                                      const LinearOperator& op) {
  check_point(params, x);
  OperatorTape tape(params, x, op);
  return tape.vjp(Eigen::VectorXd::Ones(1));
}

void write_checkpoint(std::ostream& out, const MlpParams& params) {
  const ArchSpec& spec = params.spec();
  out << "pinntk-checkpoint 1\n";
  out << "input_dim " << spec.input_dim << "\n";
  out << "hidden";
  for (std::size_t w : spec.hidden) {
    out << ' ' << w;
  }
  out << "\n";
  out << "activation tanh\n";
  out << "parameterization " << to_string(spec.parameterization) << "\n";
  out << "count " << params.size() << "\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < params.flat().size(); ++i) {
    out << params.flat()[i] << "\n";
  }
}

MlpParams read_checkpoint(std::istream& in) {
  auto fail = [](const std::string& what) -> DataError {
    return DataError("read_checkpoint: " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "pinntk-checkpoint 1") {
    throw fail("missing header");
  }
  ArchSpec spec;
  std::size_t count = 0;
  for (int field = 0; field < 5; ++field) {
    if (!std::getline(in, line)) {
      throw fail("truncated header");
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "input_dim") {
      ls >> spec.input_dim;
    } else if (key == "hidden") {
      std::size_t w = 0;
      while (ls >> w) {
        spec.hidden.push_back(w);
      }
    } else if (key == "activation") {
      std::string act;
      ls >> act;
      if (act != "tanh") {
        throw fail("unsupported activation " + act);
      }
    } else if (key == "parameterization") {
      std::string p;
      ls >> p;
      spec.parameterization = parse_parameterization(p);
    } else if (key == "count") {
      ls >> count;
    } else {
      throw fail("unknown header key " + key);
    }
  }
  spec.validate();
  if (count != spec.parameter_count()) {
    throw fail("parameter count does not match the architecture");
  }
  Eigen::VectorXd flat(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> flat[static_cast<Eigen::Index>(i)])) {
      throw fail("truncated parameter list");
    }
  }
  return MlpParams(std::move(spec), std::move(flat));
}

}  // namespace pinntk
