#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "nucpol/spinspace.hpp"

// Conserved-J_z sector Hamiltonians for one electron spin hyperfine-coupled
// to K nuclear spins-1/2:
//
//   H = ez*S_z + nz*I_z + A*(A_z S_z + (A_+ S_- + A_- S_+)/2) + H_nuc
//
// with A_mu = sum_i alpha_i I_mu^i and sum_i alpha_i^2 = 1. Ladder convention:
// S_-|up> = |down> and I_-|+1/2> = |-1/2> with unit matrix elements, so the
// flip-flop block carries elements A*alpha_i/2. The sector with conserved
// J_z = J spans nuclear Iz = J - 1/2 (electron up) and Iz = J + 1/2 (electron
// down), ordered up block first.

namespace nucpol {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

struct HNucSpec {
  enum class Kind { none, secular_dipolar, custom };

  Kind kind = Kind::none;
  // secular_dipolar: symmetric coupling matrix with zero diagonal;
  // H_nuc = sum_{i<j} b_ij (Iz_i Iz_j - (I+_i I-_j + I-_i I+_j)/4).
  Eigen::MatrixXd b;
  // custom: must return a Hermitian matrix over the given sector basis.
  std::function<Matrix(const SectorBasis&)> provider;

  static HNucSpec none() { return {}; }
  static HNucSpec secular_dipolar(Eigen::MatrixXd b_matrix);
  // All pairs coupled with the same constant.
  static HNucSpec secular_dipolar_uniform(int K, double b_value);
  static HNucSpec custom(std::function<Matrix(const SectorBasis&)> provider);
};

struct SystemParams {
  int K = 0;
  double hyperfine_A = 0.0;      // script-A, in units of 1/tau
  std::vector<double> alphas;    // per-site couplings, unit 2-norm
  double electron_zeeman = 0.0;  // g* mu_B B
  double nuclear_zeeman = 0.0;   // g_n mu_n B
  // Drop the A*A_z*S_z (Overhauser/Knight) term, leaving the bare flip-flop
  // exchange. This is the regime of the closed-form propagator.
  bool flip_flop_only = false;
  HNucSpec hnuc;

  void validate() const;
  int two_J_max() const { return K + 1; }
};

struct SectorHamiltonian {
  int two_J = 0;     // twice the conserved J_z eigenvalue
  SectorBasis up;    // nuclear Iz = J - 1/2; empty only at two_J = -(K+1)
  SectorBasis down;  // nuclear Iz = J + 1/2; empty only at two_J = +(K+1)
  Matrix matrix;     // dim = up.dim() + down.dim(), up block first, Hermitian
};

// A_- between two sector bases (to.two_Iz = from.two_Iz - 2); the element
// between configurations differing by clearing bit i is alpha_i.
Matrix collective_lowering(const std::vector<double>& alphas, const SectorBasis& from,
                           const SectorBasis& to);

// Mode operator A_{k-} built from row k of a unitary mode matrix whose row 0
// is the collective alpha vector. Throws if the matrix is not orthonormal.
Matrix mode_lowering(const Eigen::MatrixXd& modes, int k, const SectorBasis& from,
                     const SectorBasis& to);

// Deterministic orthogonal completion: row 0 equals alphas.
Eigen::MatrixXd complete_mode_matrix(const std::vector<double>& alphas);

Matrix build_hnuc(const HNucSpec& spec, const SectorBasis& basis);

SectorHamiltonian build_sector_hamiltonian(const SystemParams& params, int two_J);

// Diagonal of A_z = sum_i alpha_i I_z^i over a sector basis.
Eigen::VectorXd az_diagonal(const std::vector<double>& alphas, const SectorBasis& basis);

// Overhauser-shifted field per configuration, returned as the energy
// g* mu_B B_eff = ez - nz - A * sum_i alpha_i m_i.
Eigen::VectorXd effective_field(const SystemParams& params, const SectorBasis& basis);

}  // namespace nucpol
