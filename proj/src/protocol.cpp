#include "fluxbell/protocol.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "fluxbell/error.hpp"

namespace fluxbell {

namespace {

int sign_index(Sign s) { return s == Sign::plus ? 0 : 1; }
constexpr std::array<Sign, 2> kSigns{Sign::plus, Sign::minus};

Sign to_sign(EventAction a) { return a == EventAction::sign_plus ? Sign::plus : Sign::minus; }

double signed_phi_min(const MeasurementModel& model, Sign s) {
  const double p = model.basis().params().phi_min();
  return s == Sign::plus ? p : -p;
}

// x^H E x for real symmetric E; the imaginary cross terms cancel.
double real_form(const Eigen::MatrixXd& e, const Eigen::VectorXcd& x) {
  const Eigen::VectorXd re = x.real(), im = x.imag();
  return re.dot(e * re) + im.dot(e * im);
}

}  // namespace

InitialStateSpec InitialStateSpec::defaults(const PotentialParams& params) {
  return {-params.phi_min(), std::pow(2.0 * params.mu(), -0.25)};
}

void InitialStateSpec::validate(const GridSpec& grid) const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("init.sigma", "must be a positive number");
  }
  if (!(std::abs(center) < grid.half_width)) {
    throw ConfigError("init.center", "must lie inside the grid span");
  }
}

StateVector initial_state(const SpectralBasis& basis, const InitialStateSpec& spec) {
  spec.validate(basis.grid());
  const GridSpec& grid = basis.grid();
  std::vector<Complex> samples(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) {
    const double d = grid.node(i) - spec.center;
    samples[i] = std::exp(-d * d / (4.0 * spec.sigma * spec.sigma));
  }
  return project_state(basis, samples).state;
}

PreparedState prepare_state(const MeasurementModel& model, const StateVector& initial,
                            const PreparationConfig& config) {
  if (config.count < 0) throw ConfigError("prep.count", "must be non-negative");
  if (config.count > 0 && !(config.period > 0.0)) {
    throw ConfigError("prep.period", "must be positive");
  }
  const auto weight = model.weight(config.result);
  PreparedState out{initial, {}};
  out.trace.reserve(config.count);
  for (int n = 1; n <= config.count; ++n) {
    out.state = evolve(model.basis(), out.state, config.period);
    const double eff =
        effective_uncertainty(model.outcome_density(out.state), config.result).delta_phi_eff;
    MeasurementResult r = apply_measurement(out.state, *weight);
    out.state = std::move(r.state);
    out.trace.push_back({n, eff, r.success_norm2});
  }
  return out;
}

const char* to_string(SequenceId id) noexcept {
  switch (id) {
    case SequenceId::I: return "I";
    case SequenceId::II: return "II";
    case SequenceId::III: return "III";
  }
  return "?";
}

const char* to_string(CorrelationMode mode) noexcept {
  return mode == CorrelationMode::integrated ? "integrated" : "representative";
}

SequencePlan::SequencePlan(SequenceId id, double t_ab, double t_bc)
    : id_(id), t_ab_(t_ab), t_bc_(t_bc) {
  if (!(t_ab > 0.0) || !std::isfinite(t_ab)) throw ConfigError("t_ab", "must be positive");
  if (!(t_bc > 0.0) || !std::isfinite(t_bc)) throw ConfigError("t_bc", "must be positive");
  using A = EventAction;
  const double tb = t_ab, tc = t_ab + t_bc;
  switch (id) {
    case SequenceId::I: events_ = {{{0.0, A::none}, {tb, A::sign_plus}, {tc, A::sign_minus}}}; break;
    case SequenceId::II: events_ = {{{0.0, A::sign_plus}, {tb, A::sign_plus}, {tc, A::none}}}; break;
    case SequenceId::III: events_ = {{{0.0, A::sign_minus}, {tb, A::none}, {tc, A::sign_minus}}}; break;
  }
}

std::vector<SequenceEvent> SequencePlan::sign_events() const {
  std::vector<SequenceEvent> out;
  for (const auto& e : events_) {
    if (e.action != EventAction::none) out.push_back(e);
  }
  return out;
}

SignPairTable joint_sign_table(const MeasurementModel& model, const StateVector& state, double tau,
                               CorrelationMode mode) {
  const SpectralBasis& basis = model.basis();
  SignPairTable table{};
  if (mode == CorrelationMode::representative) {
    for (Sign s1 : kSigns) {
      const double p1 = model.position_probability(state, s1);
      const auto weight = model.weight(signed_phi_min(model, s1));
      Eigen::VectorXcd after = weight->entries.cast<Complex>() * state.coeffs;
      const double n2 = after.squaredNorm();
      for (Sign s2 : kSigns) {
        double p2 = 0.0;
        if (n2 >= 1e-300) {
          StateVector next{after / std::sqrt(n2), 1.0};
          p2 = model.position_probability(evolve(basis, next, tau), s2);
        }
        table[sign_index(s1)][sign_index(s2)] = p1 * p2;
      }
    }
    return table;
  }

  // (U(tau) W_k c)^H E (U(tau) W_k c) with U(tau) = diag(exp(-i E_l tau)).
  const OutcomeGrid& grid = model.outcomes();
  const double scale = model.normalizer() * grid.step();
  const Eigen::VectorXd& en = basis.energies();
  Eigen::VectorXcd phase(en.size());
  for (Eigen::Index l = 0; l < en.size(); ++l) phase[l] = std::polar(1.0, -en[l] * tau);
  const Eigen::MatrixXd& e_plus = model.effect(Sign::plus).entries;
  const Eigen::MatrixXd& e_minus = model.effect(Sign::minus).entries;
  for (int k = 0; k < grid.points; ++k) {
    const Eigen::VectorXcd x = phase.cwiseProduct(model.apply_outcome_weight(k, state.coeffs));
    const double to_plus = scale * real_form(e_plus, x);
    const double to_minus = scale * real_form(e_minus, x);
    for (Sign s1 : kSigns) {
      const double a = grid.half_line_weight(k, s1);
      if (a == 0.0) continue;
      table[sign_index(s1)][0] += a * to_plus;
      table[sign_index(s1)][1] += a * to_minus;
    }
  }
  return table;
}

double joint_sign_probability(const MeasurementModel& model, const StateVector& state_at_ta,
                              const SequencePlan& plan, CorrelationMode mode) {
  const auto events = plan.sign_events();
  const SpectralBasis& basis = model.basis();
  if (events.size() == 1) {
    const StateVector at = evolve(basis, state_at_ta, events[0].offset);
    const Sign s = to_sign(events[0].action);
    return mode == CorrelationMode::integrated ? model.effect_probability(at, s)
                                               : model.position_probability(at, s);
  }
  if (events.size() != 2) throw ConfigError("plan", "expected one or two sign-resolved events");
  const StateVector first = evolve(basis, state_at_ta, events[0].offset);
  const SignPairTable t =
      joint_sign_table(model, first, events[1].offset - events[0].offset, mode);
  return t[sign_index(to_sign(events[0].action))][sign_index(to_sign(events[1].action))];
}

CorrelationResult correlation_triple(const MeasurementModel& model, const StateVector& prepared,
                                     double t_ab, double t_bc, double t_offset_a,
                                     CorrelationMode mode) {
  if (!(t_offset_a >= 0.0)) throw ConfigError("prep.offset_a", "must be non-negative");
  const StateVector at_a = evolve(model.basis(), prepared, t_offset_a);
  CorrelationResult r;
  r.p_bc_plus_minus =
      joint_sign_probability(model, at_a, SequencePlan(SequenceId::I, t_ab, t_bc), mode);
  r.p_ab_plus_plus =
      joint_sign_probability(model, at_a, SequencePlan(SequenceId::II, t_ab, t_bc), mode);
  r.p_ac_minus_minus =
      joint_sign_probability(model, at_a, SequencePlan(SequenceId::III, t_ab, t_bc), mode);
  r.delta_p = r.p_bc_plus_minus - r.p_ab_plus_plus - r.p_ac_minus_minus;
  return r;
}

UncertaintyResult sequence_uncertainty(const MeasurementModel& model,
                                       const StateVector& state_at_ta, const SequencePlan& plan) {
  const auto events = plan.sign_events();
  const SpectralBasis& basis = model.basis();
  StateVector state = state_at_ta;
  double now = 0.0;
  for (std::size_t e = 0; e + 1 < events.size(); ++e) {
    state = evolve(basis, state, events[e].offset - now);
    now = events[e].offset;
    const auto weight = model.weight(signed_phi_min(model, to_sign(events[e].action)));
    state = apply_measurement(state, *weight).state;
  }
  const SequenceEvent& last = events.back();
  state = evolve(basis, state, last.offset - now);
  return effective_uncertainty(model.outcome_density(state),
                               signed_phi_min(model, to_sign(last.action)));
}

ScanGrid scan(const MeasurementModel& model, const StateVector& prepared, const ScanConfig& config) {
  if (config.steps < 2) throw ConfigError("scan.steps", "must be at least 2");
  if (!(config.t_max > 0.0)) throw ConfigError("scan.t_max_in_T", "must be positive");
  if (!(config.t_offset_a >= 0.0)) throw ConfigError("prep.offset_a", "must be non-negative");

  const int n = config.steps;
  ScanGrid g;
  g.t_ab_axis.resize(n);
  for (int k = 0; k < n; ++k) g.t_ab_axis[k] = (k + 1) * config.t_max / n;
  g.t_bc_axis = g.t_ab_axis;
  g.delta_p = Grid2D<double>(n, n);
  g.delta_phi_eff_bc = Grid2D<double>(n, n);
  g.delta_phi_eff_ab = Grid2D<double>(n, n);
  g.delta_phi_eff_ac = Grid2D<double>(n, n);
  g.violation = Mask(n, n);
  g.distinguishable = Mask(n, n);

  const StateVector at_a = evolve(model.basis(), prepared, config.t_offset_a);
  const double delta_l = model.basis().params().delta_l();

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  int error_index = n * n;
  std::exception_ptr error;

  auto work = [&] {
    for (int idx = next.fetch_add(1); idx < n * n && !failed.load(); idx = next.fetch_add(1)) {
      const int i = idx / n, j = idx % n;
      const double t_ab = g.t_ab_axis[i], t_bc = g.t_bc_axis[j];
      try {
        const CorrelationResult c = correlation_triple(model, at_a, t_ab, t_bc, 0.0, config.mode);
        const double u_bc =
            sequence_uncertainty(model, at_a, SequencePlan(SequenceId::I, t_ab, t_bc)).delta_phi_eff;
        const double u_ab =
            sequence_uncertainty(model, at_a, SequencePlan(SequenceId::II, t_ab, t_bc)).delta_phi_eff;
        const double u_ac =
            sequence_uncertainty(model, at_a, SequencePlan(SequenceId::III, t_ab, t_bc)).delta_phi_eff;
        g.delta_p(i, j) = c.delta_p;
        g.delta_phi_eff_bc(i, j) = u_bc;
        g.delta_phi_eff_ab(i, j) = u_ab;
        g.delta_phi_eff_ac(i, j) = u_ac;
        g.violation(i, j) = c.delta_p > 0.0;
        g.distinguishable(i, j) = u_bc < delta_l && u_ab < delta_l && u_ac < delta_l;
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (idx < error_index) {
          error_index = idx;
          error = std::make_exception_ptr(ScanPointError(
              t_ab, t_bc,
              "scan point (t_ab=" + std::to_string(t_ab) + ", t_bc=" + std::to_string(t_bc) +
                  ") failed: " + e.what()));
        }
        failed.store(true);
      }
    }
  };

  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return g;
}

}  // namespace fluxbell
