#pragma once

// Shared fixtures and independent oracles for the test binaries. Nothing here
// calls into the library's numerical paths except to obtain a basis to check.

#include <functional>
#include <memory>
#include <vector>

#include "fluxbell/measurement.hpp"
#include "fluxbell/protocol.hpp"
#include "fluxbell/spectral.hpp"

namespace fbtest {

using namespace fluxbell;

inline PotentialParams paper_params() { return PotentialParams(9.6, 1.536); }

// Default basis (half_width 8, 2049 points, 40 states), built once per process.
const std::shared_ptr<const SpectralBasis>& default_basis();
double default_period();

// Model on the default basis with a gaussian filter of width dphi.
std::shared_ptr<const MeasurementModel> model_for(double dphi,
                                                  FilterKind kind = FilterKind::gaussian);

// Left-well packet after the 16-step preparation at period T, dphi = 2.
const StateVector& prepared_state();

struct DoubletOracle {
  double e1 = 0.0;
  double e2 = 0.0;
};

// Numerov shooting on [0, half_width] with psi(half_width) = 0 and the
// parity condition at phi = 0, bisected to machine precision.
double shoot_eigenvalue(const std::function<double(double)>& potential, double half_width,
                        bool even, double e_low, double e_high, int steps = 40000);
DoubletOracle shooting_doublet(double mu, double lambda, double half_width);

// u sampled on nodes -L + (i+1) h, i < n, zero at +-L, interpolated by
// 8-point Lagrange at `refine` times the resolution and integrated with
// composite Simpson. Returns int f(phi) u_a u_b dphi.
double fine_quadrature(const Eigen::VectorXd& ua, const Eigen::VectorXd& ub, double half_width,
                       const std::function<double(double)>& f, int refine = 4);

// Joint sign probability of two impulsive measurements, the first on `state`
// and the second after a free flight tau, as the nested double sum over the
// outcome grid. Filtering and the final norms are taken on the position grid;
// only the free flight goes through the energy basis.
double brute_joint_probability(const SpectralBasis& basis, const FilterSpec& filter,
                               const OutcomeGrid& outcomes, const StateVector& state, double tau,
                               Sign first, Sign second);

}  // namespace fbtest
