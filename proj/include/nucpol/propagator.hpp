#pragma once

#include <random>
#include <utility>
#include <vector>

#include "nucpol/hamiltonian.hpp"

// Conditioned (electron-up post-selected) propagator V(tau) and its
// complementary Kraus partner W(tau), extracted sector by sector from
// U = exp(-i H tau). For nuclear sector Iz the relevant J_z block is
// J = Iz + 1/2; V_Iz is its up-up corner, W_Iz the down-up corner mapping
// into nuclear sector Iz + 1. Columns of a unitary give V'V + W'W = 1.

namespace nucpol {

inline constexpr int kDefaultDimensionCap = 4096;
inline constexpr double kDefaultDegeneracyThreshold = 1e-9;

// Constant c in V = cos(c * A * tau * sqrt(h)) for the bare flip-flop
// Hamiltonian under this artifact's unit ladder convention.
inline constexpr double kFlipflopCosineConstant = 0.5;

struct ConditionedPropagator {
  double tau = 0.0;
  int K = 0;
  // Slot s = (two_Iz + K) / 2 runs 0..K over nuclear sectors -K..K.
  std::vector<Matrix> V;  // V[s]: d(Iz) x d(Iz)
  std::vector<Matrix> W;  // W[s]: d(Iz+1) x d(Iz); W[K] is empty (top sector)

  int slot_of(int two_Iz) const { return (two_Iz + K) / 2; }
  int two_Iz_of(int slot) const { return 2 * slot - K; }
  Complex top_phase() const { return V.back()(0, 0); }

  // Kraus completeness, contraction and top-modulus invariants; throws on
  // violation.
  void validate(double tol = 1e-10) const;
};

// U = exp(-i H tau) by Hermitian spectral decomposition.
Matrix evolve_sector(const SectorHamiltonian& h, double tau);

ConditionedPropagator conditioned_blocks(const SystemParams& params, double tau,
                                         int dimension_cap = kDefaultDimensionCap,
                                         int threads = 1);

struct SectorSpectrum {
  int two_Iz = 0;
  std::vector<Complex> eigenvalues;  // sorted by descending modulus
  std::vector<double> moduli;
  int degenerate_count = 0;  // moduli >= 1 - threshold
};

struct SpectralReport {
  int K = 0;
  double threshold = kDefaultDegeneracyThreshold;
  std::vector<SectorSpectrum> sectors;  // ascending two_Iz

  bool is_top(const SectorSpectrum& s) const { return s.two_Iz == K; }
  // True if any non-top sector holds a modulus-1 eigenvalue: repeated
  // successful measurements then cannot reach the fully polarized state.
  bool degeneracy_flagged() const;
  double max_nontop_modulus() const;
};

SpectralReport spectral_report(const ConditionedPropagator& prop,
                               double threshold = kDefaultDegeneracyThreshold);

// h = A_- A_+ restricted to a nuclear sector.
Matrix flipflop_h(const SystemParams& params, const SectorIndex& sector);

// Closed-form V for H_nuc = none: cos(c A tau sqrt(h)), times the
// effective-field phase exp(-i Beff tau / 2) when Zeeman/Overhauser terms are
// present (homogeneous couplings required so Beff is a sector scalar; the
// phase is the published claim and is exact only in the bare flip-flop case).
Matrix analytic_flipflop_v(const SystemParams& params, double tau, const SectorIndex& sector);

// Orthonormal basis of null(A_+ restricted to the sector); columns span the
// dark states. SVD with null-threshold 1e-10.
Matrix dark_states(const SystemParams& params, const SectorIndex& sector);

// Up-up corner of H^n computed two ways: directly from the block matrix power
// and by programmatic enumeration of stay/flip factor sequences from the
// H = (A/2)(A+S- + A-S+) + curly-H split. n <= 6.
std::pair<Matrix, Matrix> moment_check(const SystemParams& params, int n, int two_J);

// Uniform draw over (lo, hi), rejecting tau values where some nonzero
// h-eigenvalue sits near a cosine extremum (|cos(c A tau sqrt(lambda))| close
// to 1), which would fake a degeneracy.
double draw_generic_tau(const SystemParams& params, std::mt19937_64& rng, double lo, double hi);

}  // namespace nucpol
