#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nucpol/propagator.hpp"
#include "nucpol/states.hpp"

// The repeated-measurement protocol. The conditioned path keeps only the
// all-up branch (V updates); the trajectory sampler draws outcomes, applies
// the complementary Kraus operator W on a down outcome (nuclear Iz rises by
// one since J_z is conserved while the electron flips), discards the electron
// and restarts the streak at t = 0.

namespace nucpol {

struct ProtocolPoint {
  int M = 0;
  double expected_Iz = 0.0;
  double log_P = 0.0;  // natural log of the cumulative success probability
};

struct ProtocolRecord {
  std::vector<ProtocolPoint> series;
  std::string fingerprint;

  // log_P nonincreasing; throws on violation.
  void validate() const;
};

// One conditioned (successful) measurement: per sector rho -> V rho V^H with
// the trace folded into the log weight, then a global renormalization.
// Returns the new state and ln P(up). Throws std::underflow_error if the step
// success probability falls below 1e-300.
std::pair<BlockedDensity, double> step_conditioned(const BlockedDensity& rho,
                                                   const ConditionedPropagator& prop);

ProtocolRecord run_conditioned(BlockedDensity rho, const ConditionedPropagator& prop, int M_max);

// Eq.-(5)-style direct evaluation for the even polarized initial state:
// P_M and <Iz>_M from the traces of V^M V^H^M, no density matrix carried.
// Cross-check path for run_conditioned(even_polarized(K, a), ...).
ProtocolRecord eq5_series(const ConditionedPropagator& prop, double a, int M_max);

// Conditioned run over the residual spins of the uneven initial state; the
// frozen offset is added to every expectation value.
ProtocolRecord run_uneven(const BlockedDensity& rho_uneven,
                          const ConditionedPropagator& prop_residual, int M_max);

struct TrajectoryPolicy {
  int max_attempts = 1000;
  int target_streak = 50;
  // After a down outcome the nuclear state either carries over (the electron
  // alone is re-injected) or is reset to the initial state.
  enum class OnFailure { carry, reset };
  OnFailure on_failure = OnFailure::carry;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> outcomes;  // 1 = up
  int restart_count = 0;
  std::vector<int> streak_lengths;  // every maximal run of ups, in order
  double final_expected_Iz = 0.0;
  bool reached_target = false;
  std::string fingerprint;

  // Streak statistics must match the outcome sequence; throws on violation.
  void validate() const;
};

TrajectoryRecord run_trajectory(const BlockedDensity& rho0, const ConditionedPropagator& prop,
                                std::uint64_t seed, const TrajectoryPolicy& policy);

struct DecaySummary {
  std::optional<double> M_at_p10;  // interpolated crossing of P_M = 0.1
  double early_log_slope = 0.0;    // per-step decrement of ln P_M before the crossing
};

DecaySummary expected_success_decay(const ProtocolRecord& record);

}  // namespace nucpol
