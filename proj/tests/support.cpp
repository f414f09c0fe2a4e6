#include "support.hpp"

#include <cmath>
#include <stdexcept>

namespace fbtest {

const std::shared_ptr<const SpectralBasis>& default_basis() {
  static const auto basis =
      std::make_shared<const SpectralBasis>(build_basis(paper_params(), GridSpec{}, 40));
  return basis;
}

double default_period() {
  static const double t = tunneling_period(*default_basis());
  return t;
}

std::shared_ptr<const MeasurementModel> model_for(double dphi, FilterKind kind) {
  return std::make_shared<const MeasurementModel>(default_basis(), FilterSpec{kind, dphi});
}

const StateVector& prepared_state() {
  static const StateVector s = [] {
    const auto model = model_for(2.0);
    const StateVector init = initial_state(*default_basis(),
                                           InitialStateSpec::defaults(paper_params()));
    return prepare_state(*model, init, {16, default_period(), -paper_params().phi_min()}).state;
  }();
  return s;
}

namespace {

// Mismatch at phi = 0 of the Numerov solution integrated inward from the
// wall: psi(h) - psi(-h) for even states, psi(0) for odd ones.
double parity_mismatch(const std::function<double(double)>& v, double half_width, bool even,
                       double e, int steps) {
  const double h = half_width / steps;
  auto g = [&](int n) { return 1.0 - h * h * (v(n * h) - e) / 12.0; };
  double up = 0.0, cur = 1e-30;  // psi at n + 1 and n, starting from n = steps - 1
  double psi_h = 0.0, psi_0 = 0.0;
  for (int n = steps - 1; n >= 0; --n) {
    const double down = ((12.0 - 10.0 * g(n)) * cur - g(n + 1) * up) / g(n - 1);
    if (n == 1) psi_h = cur;
    if (n == 0) {
      psi_0 = cur;
      return even ? psi_h - down : psi_0;
    }
    up = cur;
    cur = down;
    if (n > 2 && std::abs(cur) > 1e200) {
      up *= 1e-200;
      cur *= 1e-200;
    }
  }
  return 0.0;
}

}  // namespace

double shoot_eigenvalue(const std::function<double(double)>& potential, double half_width,
                        bool even, double e_low, double e_high, int steps) {
  auto f = [&](double e) { return parity_mismatch(potential, half_width, even, e, steps); };
  double fl = f(e_low);
  if ((fl > 0) == (f(e_high) > 0)) throw std::runtime_error("shooting bracket has no root");
  for (int it = 0; it < 200 && e_high - e_low > 1e-15 * std::abs(e_low); ++it) {
    const double mid = 0.5 * (e_low + e_high);
    const double fm = f(mid);
    if ((fm > 0) == (fl > 0)) {
      e_low = mid;
      fl = fm;
    } else {
      e_high = mid;
    }
  }
  return 0.5 * (e_low + e_high);
}

DoubletOracle shooting_doublet(double mu, double lambda, double half_width) {
  auto v = [=](double x) { return -0.5 * mu * x * x + 0.25 * lambda * x * x * x * x; };
  const double depth = mu * mu / (4.0 * lambda);
  // The lowest doublet sits between the well bottom and 40% of the way up the barrier.
  return {shoot_eigenvalue(v, half_width, true, -depth + 1e-6, -0.6 * depth),
          shoot_eigenvalue(v, half_width, false, -depth + 1e-6, -0.6 * depth)};
}

double fine_quadrature(const Eigen::VectorXd& ua, const Eigen::VectorXd& ub, double half_width,
                       const std::function<double(double)>& f, int refine) {
  const int n = static_cast<int>(ua.size());
  const double h = 2.0 * half_width / (n + 1);
  // Boundary values and points beyond the walls are zero.
  auto sample = [&](const Eigen::VectorXd& u, int j) {  // j indexes x = -L + j h
    const int i = j - 1;
    return (i >= 0 && i < n) ? u[i] : 0.0;
  };
  auto interp = [&](const Eigen::VectorXd& u, double x) {
    const double s = (x + half_width) / h;
    int j0 = static_cast<int>(std::floor(s)) - 3;
    double acc = 0.0;
    for (int a = 0; a < 8; ++a) {
      double l = 1.0;
      for (int b = 0; b < 8; ++b) {
        if (b != a) l *= (s - (j0 + b)) / double(a - b);
      }
      acc += l * sample(u, j0 + a);
    }
    return acc;
  };
  const int m = (n + 1) * refine;  // even number of fine intervals
  const double hf = 2.0 * half_width / m;
  double sum = 0.0;
  for (int k = 0; k <= m; ++k) {
    const double x = -half_width + k * hf;
    const double c = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += c * f(x) * interp(ua, x) * interp(ub, x);
  }
  return sum * hf / 3.0;
}

double brute_joint_probability(const SpectralBasis& basis, const FilterSpec& filter,
                               const OutcomeGrid& outcomes, const StateVector& state, double tau,
                               Sign first, Sign second) {
  const GridSpec& g = basis.grid();
  const Eigen::MatrixXd& u = basis.eigenfunctions();
  const double h = g.spacing();
  const double nu = filter.kind == FilterKind::gaussian
                        ? 1.0 / (std::sqrt(M_PI) * filter.delta_phi)
                        : 1.0 / (2.0 * filter.delta_phi);
  const double step = outcomes.step();
  const int c = outcomes.points / 2;
  auto side = [&](int k, Sign s) {
    if (k == c) return 0.5;
    return (s == Sign::plus) == (k > c) ? 1.0 : 0.0;
  };
  auto w = [&](double result, double x) {
    const double d = x - result;
    if (filter.kind == FilterKind::box) return std::abs(d) < filter.delta_phi ? 1.0 : 0.0;
    return std::exp(-d * d / (2.0 * filter.delta_phi * filter.delta_phi));
  };
  const Eigen::VectorXcd psi = u.cast<Complex>() * state.coeffs;
  Eigen::VectorXd x(g.n_points);
  for (int i = 0; i < g.n_points; ++i) x[i] = g.node(i);
  Eigen::MatrixXd w2(outcomes.points, g.n_points);
  for (int k = 0; k < outcomes.points; ++k) {
    for (int i = 0; i < g.n_points; ++i) {
      const double v = w(-outcomes.half_width + k * step, x[i]);
      w2(k, i) = v * v;
    }
  }

  double total = 0.0;
  for (int k1 = 0; k1 < outcomes.points; ++k1) {
    const double a1 = side(k1, first);
    if (a1 == 0.0) continue;
    const double r1 = -outcomes.half_width + k1 * step;
    Eigen::VectorXcd chi(g.n_points);
    for (int i = 0; i < g.n_points; ++i) chi[i] = w(r1, x[i]) * psi[i];
    // Free flight in the energy basis.
    Eigen::VectorXcd coeff = h * (u.transpose().cast<Complex>() * chi);
    for (int l = 0; l < coeff.size(); ++l) {
      coeff[l] *= std::polar(1.0, -basis.energies()[l] * tau);
    }
    const Eigen::VectorXd dens = (u.cast<Complex>() * coeff).cwiseAbs2();
    double inner = 0.0;
    for (int k2 = 0; k2 < outcomes.points; ++k2) {
      const double a2 = side(k2, second);
      if (a2 == 0.0) continue;
      inner += a2 * nu * step * h * w2.row(k2).dot(dens);
    }
    total += a1 * nu * step * inner;
  }
  return total;
}

}  // namespace fbtest
