#pragma once

// Measurement sequences for the three-time inequality
//   P^bc_{+-} <= P^ab_{++} + P^ac_{--},
// the preparation by stroboscopic measurements at the tunneling period, and
// the scan over the two quiescent times (t_ab, t_bc).

#include <array>
#include <optional>
#include <vector>

#include "fluxbell/measurement.hpp"
#include "fluxbell/spectral.hpp"

namespace fluxbell {

// Gaussian packet psi(phi) ~ exp(-(phi - center)^2 / (4 sigma^2)), so that
// sigma is the standard deviation of |psi|^2.
struct InitialStateSpec {
  double center = 0.0;
  double sigma = 1.0;

  // center = -phi_min, sigma = (2 mu)^(-1/4).
  static InitialStateSpec defaults(const PotentialParams& params);
  void validate(const GridSpec& grid) const;
};

StateVector initial_state(const SpectralBasis& basis, const InitialStateSpec& spec);

struct PreparationConfig {
  int count = 16;
  double period = 0.0;
  double result = 0.0;
};

struct PreparationStep {
  int step = 0;                // 1-based measurement index
  double delta_phi_eff = 0.0;  // of the outcome density just before this measurement
  double success_norm2 = 0.0;
};

struct PreparedState {
  StateVector state;  // right after the last measurement
  std::vector<PreparationStep> trace;
};

// `count` times: evolve(period), record the effective uncertainty about
// `result`, then apply W^{result}.
PreparedState prepare_state(const MeasurementModel& model, const StateVector& initial,
                            const PreparationConfig& config);

enum class SequenceId { I, II, III };
enum class EventAction { none, sign_plus, sign_minus };

const char* to_string(SequenceId id) noexcept;

struct SequenceEvent {
  double offset = 0.0;  // time after t_a
  EventAction action = EventAction::none;
};

// One of the three histories. I: nothing at t_a, + at t_b, - at t_c.
// II: + at t_a, + at t_b. III: - at t_a, - at t_c.
class SequencePlan {
 public:
  // Throws ConfigError unless t_ab > 0 and t_bc > 0.
  SequencePlan(SequenceId id, double t_ab, double t_bc);

  SequenceId id() const noexcept { return id_; }
  double t_ab() const noexcept { return t_ab_; }
  double t_bc() const noexcept { return t_bc_; }
  // Events at t_a, t_b, t_c in time order.
  const std::array<SequenceEvent, 3>& events() const noexcept { return events_; }
  // The sign-resolved events, in time order.
  std::vector<SequenceEvent> sign_events() const;

 private:
  SequenceId id_;
  double t_ab_;
  double t_bc_;
  std::array<SequenceEvent, 3> events_;
};

enum class CorrelationMode {
  // Outcome signs integrated over each half-line through the effect operators.
  integrated,
  // Each sign-resolved event records the single result +-phi_min; its sign
  // probability is the position sign probability of the state just before.
  representative,
};

const char* to_string(CorrelationMode mode) noexcept;

// table[s1][s2] (index 0 = plus) for two sign-resolved measurements, the
// first on `state`, the second after a quiescent time tau.
using SignPairTable = std::array<std::array<double, 2>, 2>;
SignPairTable joint_sign_table(const MeasurementModel& model, const StateVector& state, double tau,
                               CorrelationMode mode);

// Probability of the plan's recorded signs, starting from the state at t_a.
double joint_sign_probability(const MeasurementModel& model, const StateVector& state_at_ta,
                              const SequencePlan& plan, CorrelationMode mode);

struct CorrelationResult {
  double p_bc_plus_minus = 0.0;
  double p_ab_plus_plus = 0.0;
  double p_ac_minus_minus = 0.0;
  double delta_p = 0.0;
};

CorrelationResult correlation_triple(const MeasurementModel& model, const StateVector& prepared,
                                     double t_ab, double t_bc, double t_offset_a,
                                     CorrelationMode mode);

// Conditions on the plan's intermediate signs through the results
// +-phi_min, then evaluates the effective uncertainty of the final
// sign-resolved measurement about its designated result.
UncertaintyResult sequence_uncertainty(const MeasurementModel& model,
                                       const StateVector& state_at_ta, const SequencePlan& plan);

struct ScanConfig {
  double t_max = 0.0;  // axes are k t_max / steps, k = 1..steps
  int steps = 48;
  double t_offset_a = 0.0;
  CorrelationMode mode = CorrelationMode::integrated;
  int threads = 1;
};

// Row-major 2D array indexed (i, j) = (t_ab index, t_bc index).
template <typename T>
struct Grid2D {
  int rows = 0;
  int cols = 0;
  std::vector<T> values;

  Grid2D() = default;
  Grid2D(int r, int c, T fill = T{}) : rows(r), cols(c), values(std::size_t(r) * c, fill) {}
  T& operator()(int i, int j) { return values[std::size_t(i) * cols + j]; }
  const T& operator()(int i, int j) const { return values[std::size_t(i) * cols + j]; }
};

using Mask = Grid2D<unsigned char>;

struct ScanGrid {
  std::vector<double> t_ab_axis;
  std::vector<double> t_bc_axis;
  Grid2D<double> delta_p;
  Grid2D<double> delta_phi_eff_bc;
  Grid2D<double> delta_phi_eff_ab;
  Grid2D<double> delta_phi_eff_ac;
  Mask violation;
  Mask distinguishable;
};

// Evaluates every grid point, concurrently when threads > 1. The result does
// not depend on the thread count. A failing point aborts with ScanPointError.
ScanGrid scan(const MeasurementModel& model, const StateVector& prepared, const ScanConfig& config);

}  // namespace fluxbell
