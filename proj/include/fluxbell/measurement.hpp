#pragma once

// Selective impulsive flux measurements: filter weights, their matrices in
// the energy eigenbasis, outcome densities, sign-coarse-grained effect
// operators and the effective flux uncertainty.

#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include <Eigen/Dense>

#include "fluxbell/spectral.hpp"

namespace fluxbell {

enum class FilterKind { gaussian, box };
enum class Sign { plus, minus };

const char* to_string(FilterKind kind) noexcept;
const char* to_string(Sign sign) noexcept;

struct FilterSpec {
  FilterKind kind = FilterKind::gaussian;
  // Box half-width, or Gaussian standard deviation of w.
  double delta_phi = 2.0;

  void validate() const;
  // nu = 1 / int w_Phi(phi)^2 dPhi: 1/(sqrt(pi) dphi) for the gaussian,
  // 1/(2 dphi) for the box.
  double outcome_normalizer() const;
};

// Unit-peak filter: indicator of |phi - Phi| < dphi, or
// exp(-(phi - Phi)^2 / (2 dphi^2)).
double weight_value(const FilterSpec& filter, double result_phi, double phi);

struct WeightMatrix {
  double result_phi = 0.0;
  Eigen::MatrixXd entries;  // W_ij = h sum u_i w u_j
};

WeightMatrix weight_matrix(const SpectralBasis& basis, const FilterSpec& filter,
                           double result_phi);

struct MeasurementResult {
  StateVector state;          // renormalized
  double success_norm2 = 0.0;  // |W c|^2 before renormalization
};

// Throws ImpossibleOutcomeError when |W c|^2 < 1e-300.
MeasurementResult apply_measurement(const StateVector& state, const WeightMatrix& weight);

// Symmetric uniform grid of recorded outcomes Phi; points odd so that
// Phi = 0 is a node.
struct OutcomeGrid {
  double half_width = 10.0;
  int points = 161;

  void validate() const;
  double step() const noexcept { return 2.0 * half_width / (points - 1); }
  double node(int k) const noexcept { return -half_width + k * step(); }
  int center_index() const noexcept { return points / 2; }
  // Weight of node k in the half-line of `sign`: 1, 1/2 at Phi = 0, else 0.
  double half_line_weight(int k, Sign sign) const noexcept;
};

struct OutcomeDensity {
  std::vector<double> outcome_grid;
  std::vector<double> density;
  double step = 0.0;
  // sum_k |W^{Phi_k} c|^2 step, the explicit denominator of the outcome probability.
  double normalizer = 0.0;

  double integral() const;
  double half_line_integral(Sign sign) const;
};

struct EffectMatrix {
  Sign sign = Sign::plus;
  Eigen::MatrixXd entries;
};

struct UncertaintyResult {
  double reference_phi = 0.0;
  double delta_phi_eff = 0.0;
};

// Integral of |psi|^2 over one half-line, phi = 0 node split evenly,
// relative to the full grid norm.
double sign_probability_position(const SpectralBasis& basis, const StateVector& state, Sign sign);

// sqrt(2 sum (Phi - ref)^2 P(Phi) dPhi).
UncertaintyResult effective_uncertainty(const OutcomeDensity& density, double reference_phi);

// Precomputed measurement model for one (basis, filter, outcome grid):
// W at every outcome node, both effect operators and the position sign
// projectors. Immutable after construction apart from the weight cache,
// which is safe for concurrent lookup and insertion.
class MeasurementModel {
 public:
  MeasurementModel(std::shared_ptr<const SpectralBasis> basis, FilterSpec filter,
                   OutcomeGrid outcomes = {});

  const SpectralBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const SpectralBasis>& basis_ptr() const noexcept { return basis_; }
  const FilterSpec& filter() const noexcept { return filter_; }
  const OutcomeGrid& outcomes() const noexcept { return outcomes_; }
  double normalizer() const noexcept { return nu_; }

  // W at outcome node k.
  const Eigen::MatrixXd& outcome_weight(int k) const { return node_weights_[k]; }
  // h U^T diag(w^2) U at outcome node k: c^H Q c is the squared norm of the
  // filtered wavefunction before truncation to the basis.
  const Eigen::MatrixXd& outcome_norm(int k) const { return node_norms_[k]; }
  // W at outcome node k applied to complex coefficients.
  Eigen::VectorXcd apply_outcome_weight(int k, const Eigen::VectorXcd& coeffs) const;
  // W at an arbitrary result; computed once per value.
  std::shared_ptr<const WeightMatrix> weight(double result_phi) const;

  const EffectMatrix& effect(Sign sign) const noexcept {
    return sign == Sign::plus ? effect_plus_ : effect_minus_;
  }
  // h sum_{half-line} u_i u_j, the position sign projector in the eigenbasis.
  const Eigen::MatrixXd& position_projector(Sign sign) const noexcept {
    return sign == Sign::plus ? position_plus_ : position_minus_;
  }

  OutcomeDensity outcome_density(const StateVector& state) const;
  // c^H E_s c.
  double effect_probability(const StateVector& state, Sign sign) const;
  // c^H S_s c / c^H c.
  double position_probability(const StateVector& state, Sign sign) const;

 private:
  std::shared_ptr<const SpectralBasis> basis_;
  FilterSpec filter_;
  OutcomeGrid outcomes_;
  double nu_;
  std::vector<Eigen::MatrixXd> node_weights_;
  std::vector<Eigen::MatrixXd> node_norms_;
  EffectMatrix effect_plus_;
  EffectMatrix effect_minus_;
  Eigen::MatrixXd position_plus_;
  Eigen::MatrixXd position_minus_;

  mutable std::shared_mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const WeightMatrix>> cache_;
};

// Standalone forms; each builds the weight matrices it needs.
OutcomeDensity outcome_density(const SpectralBasis& basis, const StateVector& state,
                               const FilterSpec& filter, const OutcomeGrid& outcomes);
EffectMatrix effect_matrix(const SpectralBasis& basis, const FilterSpec& filter, Sign sign,
                           const OutcomeGrid& outcomes);

}  // namespace fluxbell
