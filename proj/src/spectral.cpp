#include "fluxbell/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include <lapacke.h>

#include "fluxbell/error.hpp"

namespace fluxbell {

namespace {

std::atomic<std::uint64_t> next_basis_id{1};

struct HalfSpectrum {
  std::vector<double> energies;
  std::vector<std::vector<double>> vectors;  // on the half-grid unknowns
  std::vector<bool> converged;
};

// Lowest `count` eigenpairs of the symmetric tridiagonal (diag, offdiag).
HalfSpectrum solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& offdiag,
                               int count) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  HalfSpectrum out;
  if (count <= 0) return out;

  std::vector<double> w(n);
  std::vector<lapack_int> iblock(n), isplit(n);
  lapack_int found = 0, nsplit = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  lapack_int info = LAPACKE_dstebz('I', 'B', n, 0.0, 0.0, 1, count, abstol, diag.data(),
                                   offdiag.data(), &found, &nsplit, w.data(), iblock.data(),
                                   isplit.data());
  if (info < 0) throw NumericalError("dstebz: illegal argument " + std::to_string(-info));
  if (info > 0 || found != count) {
    throw EigenConvergenceError(static_cast<int>(found),
                                "bisection failed to isolate the requested eigenvalues");
  }

  std::vector<double> z(static_cast<std::size_t>(n) * found);
  std::vector<lapack_int> ifail(found);
  info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, diag.data(), offdiag.data(), found, w.data(),
                        iblock.data(), isplit.data(), z.data(), n, ifail.data());
  if (info < 0) throw NumericalError("dstein: illegal argument " + std::to_string(-info));

  std::vector<bool> ok(found, true);
  for (lapack_int k = 0; k < info && k < found; ++k) {
    if (ifail[k] > 0) ok[ifail[k] - 1] = false;
  }

  std::vector<lapack_int> order(found);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](lapack_int a, lapack_int b) { return w[a] < w[b]; });
  for (lapack_int k : order) {
    out.energies.push_back(w[k]);
    out.vectors.emplace_back(z.begin() + static_cast<std::ptrdiff_t>(k) * n,
                             z.begin() + static_cast<std::ptrdiff_t>(k + 1) * n);
    out.converged.push_back(ok[k]);
  }
  return out;
}

struct FullState {
  double energy;
  Eigen::VectorXd samples;
  bool converged;
};

void fix_sign(Eigen::VectorXd& u) {
  const double peak = u.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > 1e-3 * peak) {
      if (u[i] < 0) u = -u;
      return;
    }
  }
}

}  // namespace

PotentialParams::PotentialParams(double mu, double lambda) : mu_(mu), lambda_(lambda) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu", "must be a positive number");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda", "must be a positive number");
  }
  phi_min_ = std::sqrt(mu / lambda);
}

double potential_value(const PotentialParams& params, double phi) {
  const double v_min = -params.barrier_depth();
  const double x = phi / params.phi_min();
  return 2.0 * v_min * (1.0 - 0.5 * x * x) * x * x;
}

void GridSpec::validate() const {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw ConfigError("grid.half_width", "must be a positive number");
  }
  if (n_points < 3) throw ConfigError("grid.points", "must be at least 3");
  if (n_points % 2 == 0) throw ConfigError("grid.points", "must be odd so that phi = 0 is a node");
}

SpectralBasis::SpectralBasis(PotentialParams params, GridSpec grid, Eigen::VectorXd energies,
                             Eigen::MatrixXd eigenfunctions, std::vector<bool> converged)
    : params_(params),
      grid_(grid),
      energies_(std::move(energies)),
      eigenfunctions_(std::move(eigenfunctions)),
      converged_(std::move(converged)),
      id_(next_basis_id.fetch_add(1)) {}

SpectralBasis build_basis(const PotentialParams& params, const GridSpec& grid, int truncation,
                          BasisOptions options) {
  grid.validate();
  if (truncation < 1) throw ConfigError("basis.size", "must be at least 1");
  if (truncation >= grid.n_points) throw ConfigError("basis.size", "must be below grid.points");
  if (!(grid.half_width > 2.0 * params.phi_min())) {
    throw ConfigError("grid.half_width", "must exceed twice the well position phi_min");
  }

  const double h = grid.spacing();
  const double kinetic = 1.0 / (h * h);
  const int half = grid.n_points / 2;  // nodes k h, k = 1..half on each side

  // Even states: unknowns u_0..u_half. The symmetrized coupling to the
  // central node is -sqrt(2)/h^2 with y_0 = u_0 / sqrt(2).
  std::vector<double> even_diag(half + 1), even_off(half);
  for (int k = 0; k <= half; ++k) even_diag[k] = 2.0 * kinetic + potential_value(params, k * h);
  for (int k = 0; k < half; ++k) even_off[k] = -kinetic;
  even_off[0] = -std::sqrt(2.0) * kinetic;

  // Odd states: u_0 = 0, unknowns u_1..u_half.
  std::vector<double> odd_diag(half), odd_off(half - 1);
  for (int k = 1; k <= half; ++k) odd_diag[k - 1] = 2.0 * kinetic + potential_value(params, k * h);
  for (int k = 0; k < half - 1; ++k) odd_off[k] = -kinetic;

  const HalfSpectrum even = solve_tridiagonal(even_diag, even_off, std::min(truncation, half + 1));
  const HalfSpectrum odd = solve_tridiagonal(odd_diag, odd_off, std::min(truncation, half));

  std::vector<FullState> states;
  states.reserve(even.energies.size() + odd.energies.size());
  const int center = grid.center_index();
  for (std::size_t s = 0; s < even.energies.size(); ++s) {
    Eigen::VectorXd u(grid.n_points);
    const auto& y = even.vectors[s];
    u[center] = std::sqrt(2.0) * y[0];
    for (int k = 1; k <= half; ++k) u[center + k] = u[center - k] = y[k];
    states.push_back({even.energies[s], std::move(u), even.converged[s]});
  }
  for (std::size_t s = 0; s < odd.energies.size(); ++s) {
    Eigen::VectorXd u(grid.n_points);
    const auto& y = odd.vectors[s];
    u[center] = 0.0;
    for (int k = 1; k <= half; ++k) {
      u[center + k] = y[k - 1];
      u[center - k] = -y[k - 1];
    }
    states.push_back({odd.energies[s], std::move(u), odd.converged[s]});
  }
  std::stable_sort(states.begin(), states.end(),
                   [](const FullState& a, const FullState& b) { return a.energy < b.energy; });

  Eigen::VectorXd energies(truncation);
  Eigen::MatrixXd functions(grid.n_points, truncation);
  std::vector<bool> converged(truncation);
  for (int n = 0; n < truncation; ++n) {
    FullState& st = states[n];
    if (!st.converged) {
      throw EigenConvergenceError(n + 1, "inverse iteration did not converge for state " +
                                             std::to_string(n + 1));
    }
    st.samples /= std::sqrt(h * st.samples.squaredNorm());
    fix_sign(st.samples);
    energies[n] = st.energy;
    functions.col(n) = st.samples;
    converged[n] = true;
  }

  if (options.require_barrier_span) {
    const double required = params.barrier_depth();  // V_min + 2 |V_min|
    if (energies[truncation - 1] < required) {
      throw ConfigError("basis.size", "E_M = " + std::to_string(energies[truncation - 1]) +
                                          " does not reach twice the barrier height above the "
                                          "well bottom (" +
                                          std::to_string(required) + ")");
    }
  }
  return SpectralBasis(params, grid, std::move(energies), std::move(functions), std::move(converged));
}

SpectralBasis build_converged_basis(const PotentialParams& params, const GridSpec& grid,
                                    int truncation, double tolerance, BasisOptions options) {
  constexpr int max_points = 1 << 15;
  if (truncation < 2) throw ConfigError("basis.size", "doublet refinement needs at least 2 states");
  GridSpec current = grid;
  while (true) {
    SpectralBasis coarse = build_basis(params, current, truncation, options);
    const GridSpec finer = current.refined();
    if (finer.n_points > max_points) {
      throw NumericalError("doublet splitting not stable under grid doubling up to " +
                           std::to_string(max_points) + " points");
    }
    const SpectralBasis fine = build_basis(params, finer, 2, BasisOptions{false});
    const double split_coarse = coarse.energies()[1] - coarse.energies()[0];
    const double split_fine = fine.energies()[1] - fine.energies()[0];
    if (std::abs(split_coarse - split_fine) <= tolerance * std::abs(split_fine)) return coarse;
    current = finer;
  }
}

double tunneling_period(const SpectralBasis& basis) {
  if (basis.truncation() < 2) throw ConfigError("basis.size", "tunneling period needs two states");
  const double split = basis.energies()[1] - basis.energies()[0];
  if (!(split >= 1e-12)) {
    throw DegenerateDoubletError("lowest doublet splitting " + std::to_string(split) +
                                 " is below 1e-12; refine the grid");
  }
  return 2.0 * M_PI / split;
}

void StateVector::normalize() {
  const double n2 = norm2();
  const double n = std::sqrt(n2);
  coeffs /= n;
  norm_accumulator *= n;
}

Projection project_state(const SpectralBasis& basis, std::span<const Complex> samples,
                         double max_loss) {
  const auto& u = basis.eigenfunctions();
  if (static_cast<Eigen::Index>(samples.size()) != u.rows()) {
    throw ConfigError("samples", "length does not match the basis grid");
  }
  const double h = basis.quadrature_weight();
  const Eigen::Map<const Eigen::VectorXcd> psi(samples.data(),
                                               static_cast<Eigen::Index>(samples.size()));
  const double input_norm2 = h * psi.squaredNorm();
  if (!(input_norm2 > 0.0)) throw ConfigError("samples", "state has zero norm");

  Projection out;
  out.state.coeffs = h * (u.transpose().cast<Complex>() * psi) / std::sqrt(input_norm2);
  out.truncation_loss = 1.0 - out.state.norm2();
  if (out.truncation_loss > max_loss) {
    throw BasisTooSmallError(out.truncation_loss,
                             "projection loses " + std::to_string(out.truncation_loss) +
                                 " of the norm; increase basis.size");
  }
  out.state.normalize();
  out.state.norm_accumulator = 1.0;
  return out;
}

StateVector evolve(const SpectralBasis& basis, const StateVector& state, double dt) {
  StateVector out = state;
  if (dt == 0.0) return out;
  const auto& e = basis.energies();
  for (Eigen::Index l = 0; l < out.coeffs.size(); ++l) {
    out.coeffs[l] *= std::polar(1.0, -e[l] * dt);
  }
  return out;
}

Eigen::VectorXcd wavefunction(const SpectralBasis& basis, const StateVector& state) {
  return basis.eigenfunctions().cast<Complex>() * state.coeffs;
}

}  // namespace fluxbell
