#pragma once

#include <vector>

#include "nucpol/hamiltonian.hpp"
#include "nucpol/spinspace.hpp"

// Blocked nuclear density matrices: one normalized positive block per Iz
// sector plus a log-space weight, so extreme post-selection stays finite.
// frozen_offset carries the Iz contribution of spins excluded from the
// dynamics (the polarized subset of the uneven initial state).

namespace nucpol {

inline constexpr double kDefaultLogWeightFloor = -745.0;  // below exp() underflow

struct DensityBlock {
  SectorIndex sector;
  double log_weight = 0.0;
  Matrix block;  // Hermitian, PSD, unit trace
};

struct BlockedDensity {
  int K = 0;
  double frozen_offset = 0.0;
  std::vector<DensityBlock> blocks;  // ascending two_Iz

  // Normalization, Hermiticity/PSD/trace of every block; throws on violation.
  void validate(double tol = 1e-10) const;
};

// ln c(Iz, a) with c = d_{Iz} a^(K/2+Iz) (1-a)^(K/2-Iz); a in {0, 1} resolve
// to exact point masses (-inf off the supported sector).
double weight_c_log(int K, int two_Iz, double a);

// Product of per-spin evenly polarized states, expanded over sectors with
// maximally mixed blocks. K must be even. Sectors below the weight floor are
// dropped.
BlockedDensity even_polarized(int K, double a,
                              double log_weight_floor = kDefaultLogWeightFloor);

// a*K spins frozen fully polarized (no dynamics), the remaining (1-a)*K
// thermal spins form the dynamic part at a = 1/2. Requires a*K integral and
// (1-a)*K even. The returned density has K equal to the residual spin count;
// couplings for the dynamic evolution live on those spins only.
BlockedDensity uneven_polarized(int K, double a,
                                double log_weight_floor = kDefaultLogWeightFloor);

// c(0, a) / c(K/2, a) = binomial(K, K/2) ((1-a)/a)^(K/2), evaluated in log
// space. This is the magnitude form of the published ratio R.
double ratio_R(int K, double a);

double expected_Iz(const BlockedDensity& rho);

// Stable log(sum(exp(x))) over a list of log values.
double log_sum_exp(const std::vector<double>& logs);

}  // namespace nucpol
