#include "nucpol/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace nucpol {

HNucSpec HNucSpec::secular_dipolar(Eigen::MatrixXd b_matrix) {
  if (b_matrix.rows() != b_matrix.cols()) {
    throw std::domain_error("HNucSpec: dipolar coupling matrix must be square");
  }
  if (!b_matrix.isApprox(b_matrix.transpose(), 1e-12)) {
    throw std::domain_error("HNucSpec: dipolar coupling matrix must be symmetric");
  }
  if (b_matrix.diagonal().cwiseAbs().maxCoeff() > 0.0) {
    throw std::domain_error("HNucSpec: dipolar coupling matrix must have zero diagonal");
  }
  HNucSpec spec;
  spec.kind = Kind::secular_dipolar;
  spec.b = std::move(b_matrix);
  return spec;
}

HNucSpec HNucSpec::secular_dipolar_uniform(int K, double b_value) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Constant(K, K, b_value);
  b.diagonal().setZero();
  return secular_dipolar(std::move(b));
}

HNucSpec HNucSpec::custom(std::function<Matrix(const SectorBasis&)> provider) {
  HNucSpec spec;
  spec.kind = Kind::custom;
  spec.provider = std::move(provider);
  return spec;
}

void SystemParams::validate() const {
  if (K <= 0) throw std::domain_error("SystemParams: K must be positive");
  if (static_cast<int>(alphas.size()) != K) {
    throw std::domain_error("SystemParams: expected " + std::to_string(K) + " alphas, got " +
                            std::to_string(alphas.size()));
  }
  double norm2 = 0.0;
  for (double a : alphas) norm2 += a * a;
  if (std::abs(norm2 - 1.0) > 1e-12) {
    throw std::domain_error("SystemParams: alphas must have unit 2-norm (sum alpha^2 = " +
                            std::to_string(norm2) + ")");
  }
  for (double v : {hyperfine_A, electron_zeeman, nuclear_zeeman}) {
    if (!std::isfinite(v)) throw std::domain_error("SystemParams: non-finite energy");
  }
  if (hnuc.kind == HNucSpec::Kind::secular_dipolar && hnuc.b.rows() != K) {
    throw std::domain_error("SystemParams: dipolar matrix dimension does not match K");
  }
  if (hnuc.kind == HNucSpec::Kind::custom && !hnuc.provider) {
    throw std::domain_error("SystemParams: custom H_nuc without provider");
  }
}

namespace {

// Shared single-bit-flip lowering construction.
Matrix lowering_matrix(const Eigen::VectorXd& coeff, const SectorBasis& from,
                       const SectorBasis& to) {
  if (to.sector.K != from.sector.K || to.sector.two_Iz != from.sector.two_Iz - 2) {
    throw std::domain_error("lowering: target sector must sit one Iz step below source");
  }
  const int K = from.sector.K;
  Matrix m = Matrix::Zero(to.dim(), from.dim());
  for (std::size_t col = 0; col < from.configs.size(); ++col) {
    const SpinWord w = from.configs[col];
    for (int i = 0; i < K; ++i) {
      if (w & (SpinWord(1) << i)) {
        const SpinWord flipped = w & ~(SpinWord(1) << i);
        m(to.index_of(flipped), col) += coeff[i];
      }
    }
  }
  return m;
}

}  // namespace

Matrix collective_lowering(const std::vector<double>& alphas, const SectorBasis& from,
                           const SectorBasis& to) {
  if (static_cast<int>(alphas.size()) != from.sector.K) {
    throw std::domain_error("collective_lowering: alpha count does not match K");
  }
  return lowering_matrix(Eigen::Map<const Eigen::VectorXd>(alphas.data(), alphas.size()), from,
                         to);
}

Matrix mode_lowering(const Eigen::MatrixXd& modes, int k, const SectorBasis& from,
                     const SectorBasis& to) {
  const int K = from.sector.K;
  if (modes.rows() != K || modes.cols() != K) {
    throw std::domain_error("mode_lowering: mode matrix must be K x K");
  }
  if (!(modes * modes.transpose()).isIdentity(1e-10)) {
    throw std::domain_error("mode_lowering: mode matrix is not unitary");
  }
  if (k < 0 || k >= K) throw std::domain_error("mode_lowering: mode index out of range");
  return lowering_matrix(modes.row(k).transpose(), from, to);
}

Eigen::MatrixXd complete_mode_matrix(const std::vector<double>& alphas) {
  const int K = static_cast<int>(alphas.size());
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(alphas.data(), K);
  const double norm = a.norm();
  if (norm == 0.0) throw std::domain_error("complete_mode_matrix: zero alpha vector");
  a /= norm;
  // Householder reflection H with H e0 = a; H is symmetric orthogonal, so its
  // row 0 is the alpha vector and the remaining rows complete the mode basis.
  Eigen::VectorXd v = a;
  v[0] -= (a[0] >= 0.0 ? -1.0 : 1.0);  // v = a + sign(a0) e0, avoids cancellation
  const double vnorm2 = v.squaredNorm();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(K, K) - (2.0 / vnorm2) * (v * v.transpose());
  if (a[0] >= 0.0) {
    // H e0 = -a in this branch; flip the reflection to land on +a.
    h = -h;
  }
  return h;
}

Matrix build_hnuc(const HNucSpec& spec, const SectorBasis& basis) {
  const int K = basis.sector.K;
  const std::size_t d = basis.dim();
  switch (spec.kind) {
    case HNucSpec::Kind::none:
      return Matrix::Zero(d, d);
    case HNucSpec::Kind::custom: {
      Matrix m = spec.provider(basis);
      if (m.rows() != static_cast<Eigen::Index>(d) || m.cols() != static_cast<Eigen::Index>(d)) {
        throw std::invalid_argument("build_hnuc: custom provider returned wrong dimension");
      }
      const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
      if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("build_hnuc: custom provider returned non-Hermitian matrix");
      }
      return m;
    }
    case HNucSpec::Kind::secular_dipolar:
      break;
  }
  if (spec.b.rows() != K) {
    throw std::domain_error("build_hnuc: dipolar matrix dimension does not match sector K");
  }
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t col = 0; col < d; ++col) {
    const SpinWord w = basis.configs[col];
    for (int i = 0; i < K; ++i) {
      const double mi = (w >> i) & 1 ? 0.5 : -0.5;
      for (int j = i + 1; j < K; ++j) {
        const double bij = spec.b(i, j);
        if (bij == 0.0) continue;
        const double mj = (w >> j) & 1 ? 0.5 : -0.5;
        m(col, col) += bij * mi * mj;
        // Secular flip-flop: -(I+_i I-_j + I-_i I+_j)/4 moves one unit of m
        // between sites i and j, staying inside the sector.
        const bool up_i = (w >> i) & 1, up_j = (w >> j) & 1;
        if (up_i != up_j) {
          const SpinWord flipped = w ^ (SpinWord(1) << i) ^ (SpinWord(1) << j);
          m(basis.index_of(flipped), col) += -0.25 * bij;
        }
      }
    }
  }
  return m;
}

Eigen::VectorXd az_diagonal(const std::vector<double>& alphas, const SectorBasis& basis) {
  const int K = basis.sector.K;
  Eigen::VectorXd diag(basis.dim());
  for (std::size_t n = 0; n < basis.dim(); ++n) {
    const SpinWord w = basis.configs[n];
    double v = 0.0;
    for (int i = 0; i < K; ++i) v += alphas[i] * (((w >> i) & 1) ? 0.5 : -0.5);
    diag[n] = v;
  }
  return diag;
}

SectorHamiltonian build_sector_hamiltonian(const SystemParams& params, int two_J) {
  params.validate();
  const int K = params.K;
  if (std::abs(two_J) > K + 1 || (((two_J ^ (K + 1)) & 1) != 0)) {
    throw std::domain_error("build_sector_hamiltonian: two_J = " + std::to_string(two_J) +
                            " outside the J_z ladder for K = " + std::to_string(K));
  }

  SectorHamiltonian h;
  h.two_J = two_J;
  const int up_two_Iz = two_J - 1;
  const int dn_two_Iz = two_J + 1;
  if (std::abs(up_two_Iz) <= K) h.up = enumerate_sector({K, up_two_Iz});
  if (std::abs(dn_two_Iz) <= K) h.down = enumerate_sector({K, dn_two_Iz});
  const std::size_t du = h.up.dim(), dd = h.down.dim();
  h.matrix = Matrix::Zero(du + dd, du + dd);

  const double A = params.hyperfine_A;
  auto electron_block = [&](const SectorBasis& basis, double sz) -> Matrix {
    Matrix blk = build_hnuc(params.hnuc, basis);
    const double zeeman =
        sz * params.electron_zeeman + params.nuclear_zeeman * (basis.sector.two_Iz / 2.0);
    blk.diagonal().array() += zeeman;
    if (!params.flip_flop_only) {
      blk.diagonal() += (A * sz) * az_diagonal(params.alphas, basis).cast<Complex>();
    }
    return blk;
  };

  if (du) h.matrix.topLeftCorner(du, du) = electron_block(h.up, +0.5);
  if (dd) h.matrix.bottomRightCorner(dd, dd) = electron_block(h.down, -0.5);
  if (du && dd) {
    // (A/2) A_- couples the electron-down block (Iz = J + 1/2) into the
    // electron-up block (Iz = J - 1/2).
    const Matrix a_minus = collective_lowering(params.alphas, h.down, h.up);
    h.matrix.topRightCorner(du, dd) = (A / 2.0) * a_minus;
    h.matrix.bottomLeftCorner(dd, du) = (A / 2.0) * a_minus.adjoint();
  }
  return h;
}

Eigen::VectorXd effective_field(const SystemParams& params, const SectorBasis& basis) {
  params.validate();
  Eigen::VectorXd f =
      -params.hyperfine_A * az_diagonal(params.alphas, basis);
  f.array() += params.electron_zeeman - params.nuclear_zeeman;
  return f;
}

}  // namespace nucpol
