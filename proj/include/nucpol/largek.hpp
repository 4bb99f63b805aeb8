#pragma once

#include <cstdint>

#include "nucpol/hamiltonian.hpp"
#include "nucpol/protocol.hpp"
#include "nucpol/spinspace.hpp"

// Large-K diagonal-average model: every non-top eigenvalue of V is replaced
// by a single constant Vbar < 1 while the fully polarized block keeps modulus
// one. All sector sums run exactly, in log space, over the K+1 sectors, so
// K up to 1e6 works without underflow.

namespace nucpol {

struct DiagonalModelParams {
  std::int64_t K = 0;
  double a = 0.5;      // polarization fraction of the even initial state
  double Vbar = 0.9;   // average non-top modulus, in (0, 1)

  void validate() const;
};

struct DiagonalPoint {
  double expected_Iz = 0.0;
  double log_P = 0.0;
};

DiagonalPoint diagonal_expectation(const DiagonalModelParams& params, std::int64_t M);

// Series form matching the protocol record schema (model metadata in the CLI).
ProtocolRecord diagonal_series(const DiagonalModelParams& params, int M_max);
ProtocolRecord diagonal_series_uneven(const DiagonalModelParams& params, int M_max);

// Smallest M with <Iz>_M >= theta * K/2, by monotone bisection.
std::int64_t required_M(const DiagonalModelParams& params, double theta);

// Same threshold applied to the uneven initial state: a*K spins frozen at
// +1/2, the residual (1-a)*K thermal spins carry the diagonal model.
std::int64_t required_M_uneven(const DiagonalModelParams& params, double theta);

// cos(c * A * tau * sqrt(n0)) for the collective bosonic mode occupation n0.
double bosonic_eigenvalue(std::int64_t n0, double A, double tau,
                          double c = kFlipflopCosineConstant);

// max over mode pairs (k, k') of || [A_k+, A_k'-] - delta_kk' | restricted to
// the sector: how far the sector sits from the bosonic commutator.
double boson_commutator_residual(const SystemParams& params, const SectorIndex& sector);

}  // namespace nucpol
