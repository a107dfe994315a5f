#include "pinntk/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "pinntk/csv.hpp"
#include "pinntk/error.hpp"

namespace pinntk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kExactCheckPoints = 100;
constexpr double kExactCheckTol = 1e-6;

double term_component(const Jet2& jet, int order) {
  switch (order) {
    case 0:
      return jet.value;
    case 1:
      return jet.d1;
    case 2:
      return jet.d2;
    default:
      throw ParameterError("derivative order " + std::to_string(order) + " is not supported");
  }
}

Vector uniform_in_box(const Box& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector x(static_cast<Eigen::Index>(box.dim()));
  for (std::size_t i = 0; i < box.dim(); ++i) {
    const double lo = box.lo[i];
    const double hi = box.hi[i];
    x[static_cast<Eigen::Index>(i)] = lo == hi ? lo : std::min(hi, lo + (hi - lo) * unit(rng));
  }
  return x;
}

// Largest-remainder split of n across pieces proportional to measure.
std::vector<std::size_t> split_by_measure(const Region& region, std::size_t n) {
  const std::size_t k = region.pieces.size();
  double total = 0.0;
  for (const auto& piece : region.pieces) {
    total += piece.measure();
  }
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = static_cast<double>(n) * region.pieces[i].measure() / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) {
    ++counts[remainders[r % k].second];
  }
  return counts;
}

double grid_coordinate(double lo, double hi, std::size_t i, std::size_t m) {
  if (m <= 1 || lo == hi) {
    return m <= 1 ? 0.5 * (lo + hi) : lo;
  }
  if (i + 1 == m) {
    return hi;
  }
  return std::min(hi, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1));
}

// n equispaced points over a piece, endpoints included. Pieces with several
// free axes get the smallest tensor grid holding n points, from which n
// evenly strided nodes are kept.
void grid_in_box(const Box& box, std::size_t n, std::vector<Vector>& out) {
  if (n == 0) {
    return;
  }
  std::vector<std::size_t> free_axes;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (box.lo[i] != box.hi[i]) {
      free_axes.push_back(i);
    }
  }
  Vector base(static_cast<Eigen::Index>(box.dim()));
  for (std::size_t i = 0; i < box.dim(); ++i) {
    base[static_cast<Eigen::Index>(i)] = box.lo[i];
  }
  if (free_axes.empty()) {
    for (std::size_t j = 0; j < n; ++j) {
      out.push_back(base);
    }
    return;
  }
  const std::size_t k = free_axes.size();
  auto m = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(k)) - 1e-9));
  auto total_nodes = [&](std::size_t per_axis) {
    std::size_t t = 1;
    for (std::size_t a = 0; a < k; ++a) {
      t *= per_axis;
    }
    return t;
  };
  while (total_nodes(m) < n) {
    ++m;
  }
  const std::size_t total = total_nodes(m);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t flat = n == 1 ? 0 : (j * (total - 1)) / (n - 1);
    Vector x = base;
    for (std::size_t a = k; a-- > 0;) {
      const std::size_t idx = flat % m;
      flat /= m;
      const std::size_t axis = free_axes[a];
      x[static_cast<Eigen::Index>(axis)] = grid_coordinate(box.lo[axis], box.hi[axis], idx, m);
    }
    out.push_back(std::move(x));
  }
}

Points to_points(const std::vector<Vector>& xs, std::size_t dim) {
  Points pts(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    pts.col(static_cast<Eigen::Index>(j)) = xs[j];
  }
  return pts;
}

void check_box_shape(const Box& box, std::size_t dim, const std::string& what) {
  if (box.lo.size() != dim || box.hi.size() != dim) {
    throw DimensionError(what + ": box dimension does not match the domain");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(box.lo[i] <= box.hi[i])) {
      throw ParameterError(what + ": box has lo > hi along axis " + std::to_string(i));
    }
  }
}

}  // namespace

double Box::measure() const {
  double m = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (hi[i] > lo[i]) {
      m *= hi[i] - lo[i];
    }
  }
  return m;
}

bool Box::contains(const Vector& x, double tol) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    return false;
  }
  for (std::size_t i = 0; i < dim(); ++i) {
    const double v = x[static_cast<Eigen::Index>(i)];
    if (v < lo[i] - tol || v > hi[i] + tol) {
      return false;
    }
  }
  return true;
}

bool Region::contains(const Vector& x, double tol) const {
  return std::any_of(pieces.begin(), pieces.end(),
                     [&](const Box& b) { return b.contains(x, tol); });
}

PdeProblem::PdeProblem(std::string name, Box domain, LinearOperator residual_op, ScalarField forcing,
                       std::vector<ConstraintGroup> groups, std::optional<ExactSolution> exact)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      residual_op_(std::move(residual_op)),
      forcing_(std::move(forcing)),
      groups_(std::move(groups)),
      exact_(std::move(exact)) {
  const std::size_t d = domain_.dim();
  if (d == 0) {
    throw DimensionError("PdeProblem: domain must have at least one axis");
  }
  check_box_shape(domain_, d, "PdeProblem domain");
  if (residual_op_.terms().empty()) {
    throw ParameterError("PdeProblem: residual operator has no terms");
  }
  if (residual_op_.max_coordinate() >= d) {
    throw DimensionError("PdeProblem: residual operator exceeds the domain dimension");
  }
  if (!forcing_) {
    throw ParameterError("PdeProblem: forcing is required");
  }
  for (const auto& g : groups_) {
    if (g.region.pieces.empty()) {
      throw ParameterError("PdeProblem: group '" + g.name + "' has an empty region");
    }
    if (g.op.terms().empty() || g.op.max_coordinate() >= d) {
      throw ParameterError("PdeProblem: group '" + g.name + "' has an invalid operator");
    }
    if (!g.target) {
      throw ParameterError("PdeProblem: group '" + g.name + "' has no target");
    }
    for (const auto& piece : g.region.pieces) {
      check_box_shape(piece, d, "group '" + g.name + "'");
      for (std::size_t i = 0; i < d; ++i) {
        if (piece.lo[i] < domain_.lo[i] || piece.hi[i] > domain_.hi[i]) {
          throw ParameterError("PdeProblem: group '" + g.name + "' leaves the closed domain");
        }
      }
    }
  }

  if (exact_) {
    std::mt19937_64 rng(0x5eedULL);
    for (std::size_t i = 0; i < kExactCheckPoints; ++i) {
      const Vector x = uniform_in_box(domain_, rng);
      const double r = exact_residual(*this, x);
      if (!(std::abs(r) <= kExactCheckTol)) {
        std::ostringstream os;
        os << "PdeProblem '" << name_ << "': exact solution leaves residual " << r
           << " at a sampled interior point";
        throw DataError(os.str());
      }
    }
  }
}

std::vector<std::string> PdeProblem::group_names() const {
  std::vector<std::string> names;
  for (const auto& g : groups_) {
    names.push_back(g.name);
  }
  names.emplace_back("residual");
  return names;
}

std::vector<std::string> PdeProblem::weight_symbols() const {
  std::vector<std::string> symbols;
  for (const auto& g : groups_) {
    symbols.push_back(g.weight_symbol);
  }
  symbols.emplace_back("lambda_r");
  return symbols;
}

PdeProblem poisson1d(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw ParameterError("poisson1d: frequency multiplier must be positive");
  }
  const double k = a * kPi;
  ExactSolution exact;
  exact.value = [k](const Vector& x) { return std::sin(k * x[0]); };
  exact.jet = [k](const Vector& x, std::size_t) {
    const double s = std::sin(k * x[0]);
    return Jet2{s, k * std::cos(k * x[0]), -k * k * s};
  };

  ConstraintGroup boundary{"boundary",
                           LinearOperator::identity(),
                           [](const Vector&) { return 0.0; },
                           Region{{Box{{0.0}, {0.0}}, Box{{1.0}, {1.0}}}},
                           "lambda_b"};

  std::ostringstream name;
  name << "poisson1d(a=" << a << ")";
  return PdeProblem(name.str(), Box{{0.0}, {1.0}}, LinearOperator::derivative(0, 2),
                    [k](const Vector& x) { return -k * k * std::sin(k * x[0]); },
                    {std::move(boundary)}, std::move(exact));
}

PdeProblem wave1d() {
  // u = sin(pi x) cos(2 pi t) + 1/2 sin(4 pi x) cos(8 pi t), coordinates (x, t)
  ExactSolution exact;
  exact.value = [](const Vector& x) {
    return std::sin(kPi * x[0]) * std::cos(2 * kPi * x[1]) +
           0.5 * std::sin(4 * kPi * x[0]) * std::cos(8 * kPi * x[1]);
  };
  exact.jet = [v = exact.value](const Vector& x, std::size_t coord) {
    const double sx1 = std::sin(kPi * x[0]);
    const double cx1 = std::cos(kPi * x[0]);
    const double sx4 = std::sin(4 * kPi * x[0]);
    const double cx4 = std::cos(4 * kPi * x[0]);
    const double st2 = std::sin(2 * kPi * x[1]);
    const double ct2 = std::cos(2 * kPi * x[1]);
    const double st8 = std::sin(8 * kPi * x[1]);
    const double ct8 = std::cos(8 * kPi * x[1]);
    const double u = v(x);
    if (coord == 0) {
      return Jet2{u, kPi * cx1 * ct2 + 2 * kPi * cx4 * ct8,
                  -kPi * kPi * sx1 * ct2 - 8 * kPi * kPi * sx4 * ct8};
    }
    return Jet2{u, -2 * kPi * sx1 * st2 - 4 * kPi * sx4 * st8,
                -4 * kPi * kPi * sx1 * ct2 - 32 * kPi * kPi * sx4 * ct8};
  };

  ConstraintGroup dirichlet{"dirichlet",
                            LinearOperator::identity(),
                            exact.value,
                            Region{{Box{{0.0, 0.0}, {0.0, 1.0}}, Box{{1.0, 0.0}, {1.0, 1.0}},
                                    Box{{0.0, 0.0}, {1.0, 0.0}}}},
                            "lambda_u"};
  ConstraintGroup velocity{"initial_velocity",
                           LinearOperator::derivative(1, 1),
                           [](const Vector&) { return 0.0; },
                           Region{{Box{{0.0, 0.0}, {1.0, 0.0}}}},
                           "lambda_ut"};

  LinearOperator op{{1.0, 1, 2}, {-4.0, 0, 2}};
  return PdeProblem("wave1d", Box{{0.0, 0.0}, {1.0, 1.0}}, std::move(op),
                    [](const Vector&) { return 0.0; }, {std::move(dirichlet), std::move(velocity)},
                    std::move(exact));
}

double apply_operator(const LinearOperator& op, const Vector& x,
                      const std::function<Jet2(const Vector&, std::size_t)>& jet) {
  double sum = 0.0;
  for (const auto& term : op.terms()) {
    sum += term.coefficient * term_component(jet(x, term.coordinate), term.order);
  }
  return sum;
}

double residual(const MlpParams& params, const PdeProblem& problem, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != problem.dim()) {
    throw DimensionError("residual: point dimension does not match the problem");
  }
  const OperatorTape tape(params, x, problem.residual_operator());
  return tape.outputs()[0] - problem.forcing()(x);
}

double exact_residual(const PdeProblem& problem, const Vector& x) {
  if (!problem.exact()) {
    throw ParameterError("problem '" + problem.name() + "' has no exact solution");
  }
  return apply_operator(problem.residual_operator(), x, problem.exact()->jet) - problem.forcing()(x);
}

std::string to_string(SamplingStrategy s) {
  return s == SamplingStrategy::fixed_uniform_grid ? "fixed_uniform_grid" : "uniform_random";
}

SamplingStrategy parse_sampling_strategy(const std::string& text) {
  if (text == "fixed_uniform_grid" || text == "grid") {
    return SamplingStrategy::fixed_uniform_grid;
  }
  if (text == "uniform_random" || text == "random") {
    return SamplingStrategy::uniform_random;
  }
  throw ParameterError("unknown sampling strategy '" + text +
                       "' (expected fixed_uniform_grid or uniform_random)");
}

std::size_t Batch::total_points() const {
  std::size_t n = 0;
  for (const auto& g : groups) {
    n += g.size();
  }
  return n;
}

std::vector<std::size_t> Batch::sizes() const {
  std::vector<std::size_t> out;
  for (const auto& g : groups) {
    out.push_back(g.size());
  }
  return out;
}

Eigen::VectorXd Batch::stacked_targets() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(total_points()));
  Eigen::Index offset = 0;
  for (const auto& g : groups) {
    out.segment(offset, g.targets.size()) = g.targets;
    offset += g.targets.size();
  }
  return out;
}

Batch sample_batch(const PdeProblem& problem, const std::vector<std::size_t>& sizes,
                   SamplingStrategy strategy, std::uint64_t seed) {
  if (sizes.size() != problem.num_groups()) {
    throw DimensionError("sample_batch: expected " + std::to_string(problem.num_groups()) +
                         " group sizes, got " + std::to_string(sizes.size()));
  }
  for (std::size_t s : sizes) {
    if (s == 0) {
      throw ParameterError("sample_batch: every group needs at least one point");
    }
  }

  std::mt19937_64 rng(seed);
  auto sample_region = [&](const Region& region, std::size_t n) {
    std::vector<Vector> xs;
    xs.reserve(n);
    if (strategy == SamplingStrategy::fixed_uniform_grid) {
      const auto counts = split_by_measure(region, n);
      for (std::size_t i = 0; i < region.pieces.size(); ++i) {
        grid_in_box(region.pieces[i], counts[i], xs);
      }
    } else {
      std::vector<double> measures;
      for (const auto& piece : region.pieces) {
        measures.push_back(piece.measure());
      }
      std::discrete_distribution<std::size_t> pick(measures.begin(), measures.end());
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t piece = region.pieces.size() == 1 ? 0 : pick(rng);
        xs.push_back(uniform_in_box(region.pieces[piece], rng));
      }
    }
    return to_points(xs, problem.dim());
  };

  Batch batch;
  const auto& groups = problem.groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    GroupBatch gb{groups[g].name, groups[g].op, sample_region(groups[g].region, sizes[g]), {}};
    gb.targets.resize(gb.points.cols());
    for (Eigen::Index j = 0; j < gb.points.cols(); ++j) {
      gb.targets[j] = groups[g].target(gb.points.col(j));
    }
    batch.groups.push_back(std::move(gb));
  }
  GroupBatch res{"residual", problem.residual_operator(),
                 sample_region(Region{{problem.domain()}}, sizes.back()), {}};
  res.targets.resize(res.points.cols());
  for (Eigen::Index j = 0; j < res.points.cols(); ++j) {
    res.targets[j] = problem.forcing()(res.points.col(j));
  }
  batch.groups.push_back(std::move(res));
  return batch;
}

Points evaluation_grid(const PdeProblem& problem, std::size_t per_axis) {
  const std::size_t d = problem.dim();
  std::size_t m = per_axis;
  if (m == 0) {
    m = d == 1 ? kEvalGrid1D : kEvalGrid2D;
  }
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    total *= m;
  }
  const Box& box = problem.domain();
  Points pts(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(total));
  for (std::size_t j = 0; j < total; ++j) {
    std::size_t flat = j;
    for (std::size_t a = d; a-- > 0;) {
      const std::size_t idx = flat % m;
      flat /= m;
      pts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) =
          grid_coordinate(box.lo[a], box.hi[a], idx, m);
    }
  }
  return pts;
}

namespace {

double relative_l2(const Eigen::VectorXd& pred, const PdeProblem& problem, const Points& grid) {
  Eigen::VectorXd exact(grid.cols());
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    exact[j] = problem.exact()->value(grid.col(j));
  }
  const double denom = exact.norm();
  if (denom == 0.0) {
    throw DataError("relative_l2_error: exact solution vanishes on the evaluation grid");
  }
  return (pred - exact).norm() / denom;
}

}  // namespace

double relative_l2_error(const MlpParams& params, const PdeProblem& problem, std::size_t per_axis) {
  if (!problem.exact()) {
    throw ParameterError("relative_l2_error: problem '" + problem.name() + "' has no exact solution");
  }
  const Points grid = evaluation_grid(problem, per_axis);
  const OperatorTape tape(params, grid, LinearOperator::identity());
  return relative_l2(tape.values(), problem, grid);
}

double relative_l2_error(const std::function<double(const Vector&)>& predictor,
                         const PdeProblem& problem, std::size_t per_axis) {
  if (!problem.exact()) {
    throw ParameterError("relative_l2_error: problem '" + problem.name() + "' has no exact solution");
  }
  const Points grid = evaluation_grid(problem, per_axis);
  Eigen::VectorXd pred(grid.cols());
  for (Eigen::Index j = 0; j < grid.cols(); ++j) {
    pred[j] = predictor(grid.col(j));
  }
  return relative_l2(pred, problem, grid);
}

void write_batch_csv(std::ostream& out, const Batch& batch) {
  const Eigen::Index d = batch.groups.empty() ? 0 : batch.groups.front().points.rows();
  std::vector<std::string> header{"group"};
  for (Eigen::Index i = 0; i < d; ++i) {
    header.push_back("x" + std::to_string(i));
  }
  header.emplace_back("target");
  CsvWriter csv(out, header);
  for (const auto& g : batch.groups) {
    for (Eigen::Index j = 0; j < g.points.cols(); ++j) {
      std::vector<CsvCell> row{CsvCell(g.name)};
      for (Eigen::Index i = 0; i < d; ++i) {
        row.emplace_back(g.points(i, j));
      }
      row.emplace_back(g.targets[j]);
      csv.row(row);
    }
  }
}

}  // namespace pinntk
