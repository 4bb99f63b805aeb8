#include "nucpol/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nucpol/kernels.hpp"

namespace nucpol {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double uniform_double(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }
}  // namespace

void ProtocolRecord::validate() const {
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].log_P > series[i - 1].log_P + 1e-12) {
      throw std::runtime_error("ProtocolRecord: log P increased at M = " +
                               std::to_string(series[i].M));
    }
  }
}

std::pair<BlockedDensity, double> step_conditioned(const BlockedDensity& rho,
                                                   const ConditionedPropagator& prop) {
  if (rho.K == 0) return {rho, 0.0};  // nothing dynamic: success is certain
  if (rho.K != prop.K) {
    throw std::domain_error("step_conditioned: density and propagator sector structure differ");
  }
  BlockedDensity out;
  out.K = rho.K;
  out.frozen_offset = rho.frozen_offset;
  out.blocks.reserve(rho.blocks.size());

  std::vector<double> logs;
  logs.reserve(rho.blocks.size());
  for (const auto& b : rho.blocks) {
    const Matrix& v = prop.V[prop.slot_of(b.sector.two_Iz)];
    Matrix updated = kernels::congruence(v, b.block);
    const double tr = updated.trace().real();
    if (!(tr > 0.0)) continue;  // sector annihilated by the projection
    DensityBlock nb;
    nb.sector = b.sector;
    nb.log_weight = b.log_weight + std::log(tr);
    nb.block = updated / tr;
    logs.push_back(nb.log_weight);
    out.blocks.push_back(std::move(nb));
  }
  const double log_p = log_sum_exp(logs);
  if (log_p < std::log(1e-300)) {
    throw std::underflow_error(
        "step_conditioned: success probability below 1e-300; track log-space observables only");
  }
  for (auto& b : out.blocks) b.log_weight -= log_p;
  return {std::move(out), std::min(log_p, 0.0)};
}

ProtocolRecord run_conditioned(BlockedDensity rho, const ConditionedPropagator& prop, int M_max) {
  if (M_max < 0) throw std::domain_error("run_conditioned: M_max must be nonnegative");
  ProtocolRecord rec;
  rec.series.reserve(M_max + 1);
  double log_P = 0.0;
  rec.series.push_back({0, expected_Iz(rho), 0.0});
  for (int M = 1; M <= M_max; ++M) {
    auto [next, log_p] = step_conditioned(rho, prop);
    rho = std::move(next);
    log_P += log_p;
    rec.series.push_back({M, expected_Iz(rho), log_P});
  }
  return rec;
}

ProtocolRecord eq5_series(const ConditionedPropagator& prop, double a, int M_max) {
  if (M_max < 0) throw std::domain_error("eq5_series: M_max must be nonnegative");
  const int K = prop.K;
  if (K % 2 != 0) throw std::domain_error("eq5_series: even initial state needs even K");

  // Per sector: log c(Iz, a) - log d_Iz + log Tr[V^M V^H^M], with the V powers
  // iterated in place. Underflowed sectors (a = 0 or 1) drop out.
  struct SectorState {
    int two_Iz;
    double log_c_over_d;
    Matrix power;  // V^M
  };
  std::vector<SectorState> sectors;
  for (int two_Iz = -K; two_Iz <= K; two_Iz += 2) {
    const double lc = weight_c_log(K, two_Iz, a);
    if (lc == kNegInf) continue;
    const int slot = prop.slot_of(two_Iz);
    sectors.push_back({two_Iz, lc - sector_dimension(K, two_Iz).log,
                       Matrix::Identity(prop.V[slot].rows(), prop.V[slot].rows())});
  }

  ProtocolRecord rec;
  rec.series.reserve(M_max + 1);
  for (int M = 0; M <= M_max; ++M) {
    if (M > 0) {
      for (auto& s : sectors) {
        s.power = kernels::multiply(prop.V[prop.slot_of(s.two_Iz)], s.power);
      }
    }
    std::vector<double> terms;
    terms.reserve(sectors.size());
    double num = 0.0;  // assembled after the common scale is known
    for (const auto& s : sectors) {
      terms.push_back(s.log_c_over_d + std::log(kernels::frobenius_sq(s.power)));
    }
    const double log_P = log_sum_exp(terms);
    for (std::size_t i = 0; i < sectors.size(); ++i) {
      num += std::exp(terms[i] - log_P) * (sectors[i].two_Iz / 2.0);
    }
    rec.series.push_back({M, num, log_P});
  }
  return rec;
}

ProtocolRecord run_uneven(const BlockedDensity& rho_uneven,
                          const ConditionedPropagator& prop_residual, int M_max) {
  if (rho_uneven.K > 0 && rho_uneven.K != prop_residual.K) {
    throw std::domain_error("run_uneven: propagator must be built over the residual spins");
  }
  return run_conditioned(rho_uneven, prop_residual, M_max);
}

void TrajectoryRecord::validate() const {
  std::vector<int> streaks;
  int run = 0;
  int downs = 0;
  for (std::uint8_t o : outcomes) {
    if (o) {
      ++run;
    } else {
      ++downs;
      if (run > 0) streaks.push_back(run);
      run = 0;
    }
  }
  if (run > 0) streaks.push_back(run);
  if (streaks != streak_lengths || downs != restart_count) {
    throw std::runtime_error("TrajectoryRecord: streak statistics do not match outcomes");
  }
}

TrajectoryRecord run_trajectory(const BlockedDensity& rho0, const ConditionedPropagator& prop,
                                std::uint64_t seed, const TrajectoryPolicy& policy) {
  if (policy.max_attempts < 1 || policy.target_streak < 1) {
    throw std::domain_error("run_trajectory: policy bounds must be positive");
  }
  if (rho0.K > 0 && rho0.K != prop.K) {
    throw std::domain_error("run_trajectory: density and propagator sector structure differ");
  }
  std::mt19937_64 rng(seed);
  BlockedDensity rho = rho0;
  TrajectoryRecord rec;
  rec.seed = seed;
  int streak = 0;

  for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
    // P(up) = sum_s w_s Tr(V rho_s V^H); staying in linear space is safe here
    // because weights are renormalized every step.
    double p_up = 0.0;
    std::vector<std::pair<double, Matrix>> v_updates(rho.blocks.size());
    for (std::size_t i = 0; i < rho.blocks.size(); ++i) {
      const auto& b = rho.blocks[i];
      const Matrix& v = prop.V[prop.slot_of(b.sector.two_Iz)];
      Matrix updated = kernels::congruence(v, b.block);
      const double tr = std::max(0.0, updated.trace().real());
      v_updates[i] = {tr, std::move(updated)};
      p_up += std::exp(b.log_weight) * tr;
    }
    if (rho.blocks.empty()) p_up = 1.0;  // nothing dynamic left
    p_up = std::clamp(p_up, 0.0, 1.0);
    if (!(p_up > 0.0) && !(1.0 - p_up > 0.0)) {
      throw std::runtime_error("run_trajectory: state assigns zero probability to both outcomes");
    }

    const bool up = uniform_double(rng) < p_up;
    rec.outcomes.push_back(up ? 1 : 0);
    if (up) {
      ++streak;
      if (!rho.blocks.empty()) {
        BlockedDensity next;
        next.K = rho.K;
        next.frozen_offset = rho.frozen_offset;
        std::vector<double> logs;
        for (std::size_t i = 0; i < rho.blocks.size(); ++i) {
          const double tr = v_updates[i].first;
          if (!(tr > 0.0)) continue;
          DensityBlock nb;
          nb.sector = rho.blocks[i].sector;
          nb.log_weight = rho.blocks[i].log_weight + std::log(tr);
          nb.block = v_updates[i].second / tr;
          logs.push_back(nb.log_weight);
          next.blocks.push_back(std::move(nb));
        }
        const double norm = log_sum_exp(logs);
        for (auto& b : next.blocks) b.log_weight -= norm;
        rho = std::move(next);
      }
      if (streak >= policy.target_streak) {
        rec.streak_lengths.push_back(streak);
        rec.reached_target = true;
        break;
      }
    } else {
      // Down outcome: complementary Kraus branch, nuclear Iz shifts up by one;
      // the electron is discarded and a fresh up-measured one starts at t = 0.
      if (streak > 0) rec.streak_lengths.push_back(streak);
      streak = 0;
      ++rec.restart_count;
      if (policy.on_failure == TrajectoryPolicy::OnFailure::reset) {
        rho = rho0;
      } else if (!rho.blocks.empty()) {
        BlockedDensity next;
        next.K = rho.K;
        next.frozen_offset = rho.frozen_offset;
        std::vector<double> logs;
        for (const auto& b : rho.blocks) {
          const int slot = prop.slot_of(b.sector.two_Iz);
          if (slot >= rho.K) continue;  // top sector has no down branch
          const Matrix& w = prop.W[slot];
          Matrix updated = kernels::congruence(w, b.block);
          const double tr = updated.trace().real();
          if (!(tr > 0.0)) continue;
          DensityBlock nb;
          nb.sector = {rho.K, b.sector.two_Iz + 2};
          nb.log_weight = b.log_weight + std::log(tr);
          nb.block = updated / tr;
          logs.push_back(nb.log_weight);
          next.blocks.push_back(std::move(nb));
        }
        if (next.blocks.empty()) {
          throw std::runtime_error("run_trajectory: down branch produced an empty state");
        }
        const double norm = log_sum_exp(logs);
        for (auto& b : next.blocks) b.log_weight -= norm;
        std::sort(next.blocks.begin(), next.blocks.end(),
                  [](const DensityBlock& x, const DensityBlock& y) {
                    return x.sector.two_Iz < y.sector.two_Iz;
                  });
        rho = std::move(next);
      }
    }
  }
  if (streak > 0 && !rec.reached_target) rec.streak_lengths.push_back(streak);
  rec.final_expected_Iz = expected_Iz(rho);
  return rec;
}

DecaySummary expected_success_decay(const ProtocolRecord& record) {
  if (record.series.size() < 2) {
    throw std::domain_error("expected_success_decay: need at least two points");
  }
  const double target = std::log(0.1);
  DecaySummary summary;
  for (std::size_t i = 1; i < record.series.size(); ++i) {
    const auto& lo = record.series[i - 1];
    const auto& hi = record.series[i];
    if (lo.log_P > target && hi.log_P <= target) {
      const double frac = (lo.log_P - target) / (lo.log_P - hi.log_P);
      summary.M_at_p10 = lo.M + frac * (hi.M - lo.M);
      break;
    }
  }
  // Early slope: mean per-step decrement over the stretch before the crossing
  // (the whole record if P never reaches 0.1).
  std::size_t end = record.series.size() - 1;
  if (summary.M_at_p10) {
    end = std::min(end, std::size_t(std::ceil(*summary.M_at_p10)));
  }
  end = std::max<std::size_t>(end, 1);
  summary.early_log_slope =
      (record.series[end].log_P - record.series[0].log_P) / double(end);
  return summary;
}

}  // namespace nucpol
