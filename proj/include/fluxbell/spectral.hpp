#pragma once

// Quartic double well H = -d^2/dphi^2 - (mu/2) phi^2 + (lambda/4) phi^4 in
// units hbar = 2m = 1, its finite-difference spectrum, and exact free
// evolution in the truncated energy eigenbasis.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fluxbell {

using Complex = std::complex<double>;

class PotentialParams {
 public:
  // Throws ConfigError unless mu > 0 and lambda > 0.
  PotentialParams(double mu, double lambda);

  double mu() const noexcept { return mu_; }
  double lambda() const noexcept { return lambda_; }
  // Position of the right minimum, sqrt(mu / lambda).
  double phi_min() const noexcept { return phi_min_; }
  // Distance between the two minima.
  double delta_l() const noexcept { return 2.0 * phi_min_; }
  // |V(phi_min)| = mu^2 / (4 lambda).
  double barrier_depth() const noexcept { return mu_ * mu_ / (4.0 * lambda_); }

 private:
  double mu_;
  double lambda_;
  double phi_min_;
};

// V(phi) written through the well geometry, 2 V_min [1 - x^2/2] x^2 with
// x = phi / phi_min and V_min = -mu^2 / (4 lambda).
double potential_value(const PotentialParams& params, double phi);

// Interior nodes of a uniform grid on [-half_width, half_width]; the
// wavefunction vanishes on the two boundary points.
struct GridSpec {
  double half_width = 8.0;
  int n_points = 2049;

  // Throws ConfigError for n_points < 3, even n_points or half_width <= 0.
  void validate() const;
  double spacing() const noexcept { return 2.0 * half_width / (n_points + 1); }
  double node(int i) const noexcept { return -half_width + (i + 1) * spacing(); }
  int center_index() const noexcept { return n_points / 2; }
  // The grid with twice as many intervals.
  GridSpec refined() const noexcept { return {half_width, 2 * n_points + 1}; }
};

struct BasisOptions {
  // Require E_M >= V_min + 2 |V_min| so that the basis covers over-barrier motion.
  bool require_barrier_span = true;
};

class SpectralBasis {
 public:
  SpectralBasis(PotentialParams params, GridSpec grid, Eigen::VectorXd energies,
                Eigen::MatrixXd eigenfunctions, std::vector<bool> converged);

  const PotentialParams& params() const noexcept { return params_; }
  const GridSpec& grid() const noexcept { return grid_; }
  int truncation() const noexcept { return static_cast<int>(energies_.size()); }
  // Rectangle-rule quadrature weight.
  double quadrature_weight() const noexcept { return grid_.spacing(); }
  // Ascending E_1..E_M.
  const Eigen::VectorXd& energies() const noexcept { return energies_; }
  // Column n holds u_{n+1} sampled on the grid, normalized so h * sum u^2 = 1.
  const Eigen::MatrixXd& eigenfunctions() const noexcept { return eigenfunctions_; }
  const std::vector<bool>& converged() const noexcept { return converged_; }
  // Process-unique identity, used to key caches built on top of a basis.
  std::uint64_t id() const noexcept { return id_; }

 private:
  PotentialParams params_;
  GridSpec grid_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd eigenfunctions_;
  std::vector<bool> converged_;
  std::uint64_t id_;
};

// Lowest `truncation` eigenpairs of the central-difference Hamiltonian.
// The symmetric grid is split into even and odd sub-problems, so every
// eigenvector has exact parity. Sign convention: the first node with
// |u| above 1e-3 of its maximum is positive.
SpectralBasis build_basis(const PotentialParams& params, const GridSpec& grid, int truncation,
                          BasisOptions options = {});

// build_basis on `grid`, refining the grid by powers of two until the
// lowest doublet splitting changes by less than `tolerance` (relative) under
// one further doubling. Gives up beyond 2^15 points.
SpectralBasis build_converged_basis(const PotentialParams& params, const GridSpec& grid,
                                    int truncation, double tolerance = 0.01,
                                    BasisOptions options = {});

// 2 pi / (E_2 - E_1).
double tunneling_period(const SpectralBasis& basis);

struct StateVector {
  Eigen::VectorXcd coeffs;
  // Product of the norms discarded by every renormalization.
  double norm_accumulator = 1.0;

  double norm2() const { return coeffs.squaredNorm(); }
  // Rescales to unit norm and folds the old norm into norm_accumulator.
  void normalize();
};

struct Projection {
  StateVector state;
  // 1 - sum |c_l|^2 before normalization.
  double truncation_loss = 0.0;
};

// c_l = h sum u_l(phi) psi(phi). Throws BasisTooSmallError when more
// than `max_loss` of the norm falls outside the basis.
Projection project_state(const SpectralBasis& basis, std::span<const Complex> samples,
                         double max_loss = 1e-3);

// c_l <- exp(-i E_l dt) c_l.
StateVector evolve(const SpectralBasis& basis, const StateVector& state, double dt);

// psi(phi) on the grid nodes.
Eigen::VectorXcd wavefunction(const SpectralBasis& basis, const StateVector& state);

}  // namespace fluxbell
