#include "fluxbell/measurement.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include "fluxbell/error.hpp"

namespace fluxbell {

namespace {

Eigen::VectorXd sampled_weight(const SpectralBasis& basis, const FilterSpec& filter,
                               double result_phi) {
  const GridSpec& grid = basis.grid();
  Eigen::VectorXd w(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) w[i] = weight_value(filter, result_phi, grid.node(i));
  return w;
}

// h U^T diag(f) U, exactly symmetric regardless of summation order.
Eigen::MatrixXd grid_matrix(const SpectralBasis& basis, const Eigen::VectorXd& f) {
  const Eigen::MatrixXd& u = basis.eigenfunctions();
  Eigen::MatrixXd m = basis.quadrature_weight() * (u.transpose() * (f.asDiagonal() * u));
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd weight_entries(const SpectralBasis& basis, const FilterSpec& filter,
                               double result_phi) {
  return grid_matrix(basis, sampled_weight(basis, filter, result_phi));
}

// Non-owning handle for the standalone entry points.
std::shared_ptr<const SpectralBasis> borrow(const SpectralBasis& basis) {
  return std::shared_ptr<const SpectralBasis>(&basis, [](const SpectralBasis*) {});
}

// Real matrix times complex vector without promoting the matrix.
Eigen::VectorXcd real_times(const Eigen::MatrixXd& m, const Eigen::VectorXcd& c) {
  Eigen::VectorXcd out(m.rows());
  out.real() = m * c.real();
  out.imag() = m * c.imag();
  return out;
}

// c^H M c for real symmetric M.
double quadratic_form(const Eigen::MatrixXd& m, const Eigen::VectorXcd& c) {
  const Eigen::VectorXd re = c.real(), im = c.imag();
  return re.dot(m * re) + im.dot(m * im);
}

}  // namespace

const char* to_string(FilterKind kind) noexcept {
  return kind == FilterKind::gaussian ? "gaussian" : "box";
}

const char* to_string(Sign sign) noexcept { return sign == Sign::plus ? "plus" : "minus"; }

void FilterSpec::validate() const {
  if (!(delta_phi > 0.0) || !std::isfinite(delta_phi)) {
    throw ConfigError("filter.delta_phi", "must be a positive number");
  }
}

double FilterSpec::outcome_normalizer() const {
  validate();
  return kind == FilterKind::gaussian ? 1.0 / (std::sqrt(M_PI) * delta_phi)
                                      : 1.0 / (2.0 * delta_phi);
}

double weight_value(const FilterSpec& filter, double result_phi, double phi) {
  const double d = phi - result_phi;
  if (filter.kind == FilterKind::box) return std::abs(d) < filter.delta_phi ? 1.0 : 0.0;
  return std::exp(-d * d / (2.0 * filter.delta_phi * filter.delta_phi));
}

WeightMatrix weight_matrix(const SpectralBasis& basis, const FilterSpec& filter,
                           double result_phi) {
  filter.validate();
  const double span = basis.grid().half_width;
  if (!(std::abs(result_phi) <= span)) {
    throw ConfigError("result_phi", "outside the basis grid span");
  }
  return {result_phi, weight_entries(basis, filter, result_phi)};
}

MeasurementResult apply_measurement(const StateVector& state, const WeightMatrix& weight) {
  MeasurementResult out;
  out.state.coeffs = real_times(weight.entries, state.coeffs);
  out.state.norm_accumulator = state.norm_accumulator;
  out.success_norm2 = out.state.norm2();
  if (!(out.success_norm2 >= 1e-300)) {
    throw ImpossibleOutcomeError("outcome " + std::to_string(weight.result_phi) +
                                 " has zero probability for this state");
  }
  out.state.normalize();
  return out;
}

void OutcomeGrid::validate() const {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ConfigError("outcome.half_width", "must be a positive number");
  }
  if (points < 3) throw ConfigError("outcome.points", "must be at least 3");
  if (points % 2 == 0) throw ConfigError("outcome.points", "must be odd so that 0 is a node");
}

double OutcomeGrid::half_line_weight(int k, Sign sign) const noexcept {
  const int c = center_index();
  if (k == c) return 0.5;
  return (sign == Sign::plus) == (k > c) ? 1.0 : 0.0;
}

double OutcomeDensity::integral() const {
  double s = 0.0;
  for (double p : density) s += p;
  return s * step;
}

double OutcomeDensity::half_line_integral(Sign sign) const {
  const int c = static_cast<int>(density.size()) / 2;
  double s = 0.5 * density[c];
  if (sign == Sign::plus) {
    for (std::size_t k = c + 1; k < density.size(); ++k) s += density[k];
  } else {
    for (int k = 0; k < c; ++k) s += density[k];
  }
  return s * step;
}

double sign_probability_position(const SpectralBasis& basis, const StateVector& state,
                                 Sign sign) {
  const Eigen::VectorXcd psi = wavefunction(basis, state);
  const int c = basis.grid().center_index();
  double total = 0.0, half = 0.5 * std::norm(psi[c]);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double p = std::norm(psi[i]);
    total += p;
    if ((sign == Sign::plus && i > c) || (sign == Sign::minus && i < c)) half += p;
  }
  return half / total;
}

UncertaintyResult effective_uncertainty(const OutcomeDensity& density, double reference_phi) {
  double moment = 0.0;
  for (std::size_t k = 0; k < density.density.size(); ++k) {
    const double d = density.outcome_grid[k] - reference_phi;
    moment += d * d * density.density[k];
  }
  return {reference_phi, std::sqrt(2.0 * moment * density.step)};
}

MeasurementModel::MeasurementModel(std::shared_ptr<const SpectralBasis> basis, FilterSpec filter,
                                   OutcomeGrid outcomes)
    : basis_(std::move(basis)), filter_(filter), outcomes_(outcomes) {
  filter_.validate();
  outcomes_.validate();
  nu_ = filter_.outcome_normalizer();

  const int m = basis_->truncation();
  const double step = outcomes_.step();
  effect_plus_ = {Sign::plus, Eigen::MatrixXd::Zero(m, m)};
  effect_minus_ = {Sign::minus, Eigen::MatrixXd::Zero(m, m)};
  node_weights_.reserve(outcomes_.points);
  node_norms_.reserve(outcomes_.points);
  for (int k = 0; k < outcomes_.points; ++k) {
    const Eigen::VectorXd w = sampled_weight(*basis_, filter_, outcomes_.node(k));
    node_weights_.push_back(grid_matrix(*basis_, w));
    // |w psi|^2 taken on the grid, before any truncation to the basis.
    node_norms_.push_back(grid_matrix(*basis_, w.cwiseAbs2()));
    const double scale = nu_ * step;
    if (double a = outcomes_.half_line_weight(k, Sign::plus); a > 0) {
      effect_plus_.entries += (a * scale) * node_norms_.back();
    }
    if (double a = outcomes_.half_line_weight(k, Sign::minus); a > 0) {
      effect_minus_.entries += (a * scale) * node_norms_.back();
    }
  }

  const Eigen::MatrixXd& u = basis_->eigenfunctions();
  const GridSpec& grid = basis_->grid();
  const int c = grid.center_index();
  Eigen::VectorXd plus = Eigen::VectorXd::Zero(grid.n_points);
  plus.tail(grid.n_points - c - 1).setOnes();
  plus[c] = 0.5;
  const Eigen::VectorXd minus = plus.reverse();
  const double h = basis_->quadrature_weight();
  position_plus_ = h * (u.transpose() * (plus.asDiagonal() * u));
  position_minus_ = h * (u.transpose() * (minus.asDiagonal() * u));
}

std::shared_ptr<const WeightMatrix> MeasurementModel::weight(double result_phi) const {
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = cache_.find(result_phi); it != cache_.end()) return it->second;
  }
  auto fresh = std::make_shared<const WeightMatrix>(weight_matrix(*basis_, filter_, result_phi));
  std::unique_lock lock(cache_mutex_);
  // Another thread may have won the race; either copy is identical.
  auto [it, inserted] = cache_.emplace(result_phi, std::move(fresh));
  return it->second;
}

Eigen::VectorXcd MeasurementModel::apply_outcome_weight(int k,
                                                        const Eigen::VectorXcd& coeffs) const {
  return real_times(node_weights_[k], coeffs);
}

OutcomeDensity MeasurementModel::outcome_density(const StateVector& state) const {
  const PotentialParams& params = basis_->params();
  if (outcomes_.half_width < 3.0 * params.phi_min()) {
    throw ConfigError("outcome.half_width", "outcome grid must span [-3 phi_min, 3 phi_min]");
  }
  OutcomeDensity out;
  out.step = outcomes_.step();
  out.outcome_grid.resize(outcomes_.points);
  out.density.resize(outcomes_.points);
  double mass = 0.0;
  for (int k = 0; k < outcomes_.points; ++k) {
    out.outcome_grid[k] = outcomes_.node(k);
    const double m = quadratic_form(node_norms_[k], state.coeffs);
    out.density[k] = m;
    mass += m;
  }
  out.normalizer = mass * out.step;
  if (!(out.normalizer >= 1e-12)) {
    throw DegenerateDensityError("outcome density has total mass " +
                                 std::to_string(out.normalizer) + " on the outcome grid");
  }
  for (double& p : out.density) p /= out.normalizer;
  return out;
}

double MeasurementModel::effect_probability(const StateVector& state, Sign sign) const {
  return quadratic_form(effect(sign).entries, state.coeffs);
}

double MeasurementModel::position_probability(const StateVector& state, Sign sign) const {
  return quadratic_form(position_projector(sign), state.coeffs) / state.norm2();
}

OutcomeDensity outcome_density(const SpectralBasis& basis, const StateVector& state,
                               const FilterSpec& filter, const OutcomeGrid& outcomes) {
  return MeasurementModel(borrow(basis), filter, outcomes).outcome_density(state);
}

EffectMatrix effect_matrix(const SpectralBasis& basis, const FilterSpec& filter, Sign sign,
                           const OutcomeGrid& outcomes) {
  return MeasurementModel(borrow(basis), filter, outcomes).effect(sign);
}

}  // namespace fluxbell
