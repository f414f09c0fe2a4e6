#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fluxbell/error.hpp"
#include "support.hpp"

using namespace fluxbell;
using fbtest::default_basis;
using fbtest::paper_params;

TEST_CASE("well geometry of the default parameters") {
  const PotentialParams p = paper_params();
  CHECK(p.phi_min() == 2.5);
  CHECK(p.delta_l() == 5.0);
  CHECK(std::abs(p.barrier_depth() - 15.0) < 1e-12);
  CHECK_THROWS_AS(PotentialParams(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(PotentialParams(1.0, -1.0), ConfigError);
}

TEST_CASE("potential values") {
  const PotentialParams p = paper_params();
  CHECK(potential_value(p, 0.0) == 0.0);
  CHECK(std::abs(potential_value(p, 2.5) + 15.0) < 1e-12);
  for (double x : {0.5, 1.7, 3.2}) CHECK(potential_value(p, x) == potential_value(p, -x));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng);
    const double direct = -0.5 * 9.6 * x * x + 0.25 * 1.536 * x * x * x * x;
    CHECK(std::abs(potential_value(p, x) - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec({8.0, 2048}).validate(), ConfigError);
  CHECK_THROWS_AS(GridSpec({0.0, 2049}).validate(), ConfigError);
  CHECK_THROWS_AS(GridSpec({8.0, 1}).validate(), ConfigError);
  const GridSpec g{};
  CHECK(g.node(g.center_index()) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g.refined().n_points == 4099);
}

TEST_CASE("lowest doublet matches an independent shooting oracle") {
  const auto& b = *default_basis();
  const auto oracle = fbtest::shooting_doublet(9.6, 1.536, 8.0);
  const auto& e = b.energies();
  CHECK(std::abs(e[0] - oracle.e1) < 0.01 * std::abs(oracle.e1));
  CHECK(std::abs(e[1] - oracle.e2) < 0.01 * std::abs(oracle.e2));
  const double split = e[1] - e[0], oracle_split = oracle.e2 - oracle.e1;
  CHECK(split > 0.0);
  CHECK(std::abs(split - oracle_split) < 0.01 * oracle_split);
  CHECK(split < 1e-3 * (e[2] - e[0]));
  const double t_oracle = 2.0 * M_PI / oracle_split;
  CHECK(std::abs(tunneling_period(b) - t_oracle) < 0.01 * t_oracle);
  MESSAGE("E1 = " << e[0] << "  E2 = " << e[1] << "  oracle split = " << oracle_split);
}

TEST_CASE("spectrum is ascending and every state converged") {
  const auto& b = *default_basis();
  CHECK(b.truncation() == 40);
  for (int n = 1; n < 40; ++n) CHECK(b.energies()[n] > b.energies()[n - 1]);
  for (bool c : b.converged()) CHECK(c);
  CHECK(b.energies()[39] >= paper_params().barrier_depth());
}

TEST_CASE("eigenfunctions are orthonormal") {
  const auto& b = *default_basis();
  const Eigen::MatrixXd& u = b.eigenfunctions();
  const Eigen::MatrixXd g = b.quadrature_weight() * (u.transpose() * u);
  CHECK((g - Eigen::MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sub-barrier eigenfunctions have definite parity") {
  const auto& b = *default_basis();
  const Eigen::MatrixXd& u = b.eigenfunctions();
  for (int n = 0; n < b.truncation(); ++n) {
    if (b.energies()[n] >= 0.0) break;
    const Eigen::VectorXd v = u.col(n);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double defect = (v - sign * v.reverse()).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
    CHECK(defect < 1e-8);
  }
}

TEST_CASE("single-state basis is even") {
  const SpectralBasis b = build_basis(paper_params(), GridSpec{8.0, 513}, 1, {false});
  const Eigen::VectorXd v = b.eigenfunctions().col(0);
  CHECK((v - v.reverse()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("basis must reach over the barrier") {
  CHECK_THROWS_AS(build_basis(paper_params(), GridSpec{}, 4), ConfigError);
  CHECK_THROWS_AS(build_basis(paper_params(), GridSpec{8.0, 11}, 11), ConfigError);
  // Half-width must exceed 2 phi_min.
  CHECK_THROWS_AS(build_basis(paper_params(), GridSpec{4.0, 2049}, 40), ConfigError);
}

TEST_CASE("grid doubling leaves the doublet unchanged") {
  const auto& coarse = *default_basis();
  const SpectralBasis fine = build_basis(paper_params(), GridSpec{}.refined(), 40);
  for (int n : {0, 1}) {
    CHECK(std::abs(fine.energies()[n] - coarse.energies()[n]) <
          0.01 * std::abs(coarse.energies()[n]));
  }
  const double s0 = coarse.energies()[1] - coarse.energies()[0];
  const double s1 = fine.energies()[1] - fine.energies()[0];
  CHECK(std::abs(s1 - s0) < 0.01 * s0);
}

TEST_CASE("converged basis refines a coarse grid") {
  const SpectralBasis b = build_converged_basis(paper_params(), GridSpec{8.0, 129}, 40);
  CHECK(b.grid().n_points > 129);
  const double s = b.energies()[1] - b.energies()[0];
  const double ref = default_basis()->energies()[1] - default_basis()->energies()[0];
  CHECK(std::abs(s - ref) < 0.02 * ref);
}

TEST_CASE("tunneling period definition") {
  using V = Eigen::VectorXd;
  const GridSpec g{8.0, 5};
  const Eigen::MatrixXd u = Eigen::MatrixXd::Identity(5, 2) / std::sqrt(g.spacing());
  SpectralBasis b(paper_params(), g, V{{0.0, M_PI}}, u, {true, true});
  CHECK(tunneling_period(b) == doctest::Approx(2.0).epsilon(1e-15));
  SpectralBasis doubled(paper_params(), g, V{{0.0, 2.0 * M_PI}}, u, {true, true});
  CHECK(tunneling_period(doubled) == doctest::Approx(1.0).epsilon(1e-15));
  SpectralBasis flat(paper_params(), g, V{{1.0, 1.0 + 1e-13}}, u, {true, true});
  CHECK_THROWS_AS(tunneling_period(flat), DegenerateDoubletError);
}

TEST_CASE("projection of eigenfunctions and their combinations") {
  const auto& b = *default_basis();
  const Eigen::MatrixXd& u = b.eigenfunctions();
  std::vector<Complex> s(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) s[i] = u(i, 2);
  const Projection p3 = project_state(b, s);
  CHECK(std::abs(std::abs(p3.state.coeffs[2]) - 1.0) < 1e-12);
  CHECK(p3.state.coeffs.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p3.truncation_loss < 1e-12);

  for (Eigen::Index i = 0; i < u.rows(); ++i) s[i] = (u(i, 0) + u(i, 1)) / std::sqrt(2.0);
  const Projection p12 = project_state(b, s);
  CHECK(std::norm(p12.state.coeffs[0]) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::norm(p12.state.coeffs[1]) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("left-well packet projects onto the lowest doublet") {
  const auto& b = *default_basis();
  const GridSpec& g = b.grid();
  const InitialStateSpec spec = InitialStateSpec::defaults(paper_params());
  std::vector<Complex> s(g.n_points);
  Eigen::VectorXd direct(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    const double d = g.node(i) - spec.center;
    direct[i] = std::exp(-d * d / (4.0 * spec.sigma * spec.sigma));
    s[i] = direct[i];
  }
  const Projection p = project_state(b, s);
  CHECK(p.truncation_loss < 1e-4);
  // Direct quadrature of the overlaps, renormalized within the basis.
  Eigen::VectorXd c(40);
  for (int l = 0; l < 40; ++l) c[l] = g.spacing() * direct.dot(b.eigenfunctions().col(l));
  c.normalize();
  const double c1 = c[0], c2 = c[1];
  CHECK(std::abs(p.state.coeffs[0].real() - c1) < 1e-12);
  CHECK(std::abs(p.state.coeffs[1].real() - c2) < 1e-12);
  CHECK(std::abs(c1 * c1 - c2 * c2) < 0.05);
  // u_1 and u_2 share the sign in the left well by the sign convention, so
  // the left packet is their sum.
  CHECK(c1 * c2 > 0.0);
}

TEST_CASE("projection rejects states outside the basis") {
  const auto& b = *default_basis();
  const GridSpec& g = b.grid();
  std::vector<Complex> s(g.n_points);
  for (int i = 0; i < g.n_points; ++i) s[i] = (i % 2 == 0) ? 1.0 : -1.0;
  CHECK_THROWS_AS(project_state(b, s), BasisTooSmallError);
  CHECK_THROWS_AS(project_state(b, std::vector<Complex>(7)), ConfigError);
}

TEST_CASE("free evolution") {
  const auto& b = *default_basis();
  StateVector s{Eigen::VectorXcd::Zero(40), 1.0};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int l = 0; l < 40; ++l) s.coeffs[l] = Complex(n(rng), n(rng));
  s.normalize();
  CHECK(evolve(b, s, 0.0).coeffs == s.coeffs);
  const double before = s.norm2();
  StateVector t = s;
  for (int k = 0; k < 20; ++k) {
    const double prev = t.norm2();
    t = evolve(b, t, 17.3);
    CHECK(std::abs(t.norm2() - prev) < 1e-14);
  }
  CHECK(std::abs(t.norm2() - before) < 1e-13);

  StateVector d{Eigen::VectorXcd::Zero(40), 1.0};
  d.coeffs[0] = d.coeffs[1] = 1.0 / std::sqrt(2.0);
  const StateVector back = evolve(b, d, tunneling_period(b));
  CHECK(std::abs(std::abs(d.coeffs.dot(back.coeffs)) - 1.0) < 1e-10);
  // Half a period swaps the wells: the overlap vanishes.
  const StateVector half = evolve(b, d, 0.5 * tunneling_period(b));
  CHECK(std::abs(d.coeffs.dot(half.coeffs)) < 1e-10);
}
