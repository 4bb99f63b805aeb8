#include "nucpol/states.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "nucpol/kernels.hpp"

namespace nucpol {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_sum_exp(const std::vector<double>& logs) {
  if (logs.empty()) return kNegInf;
  const double m = kernels::vmax(logs.data(), logs.size());
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - m);
  return m + std::log(s);
}

void BlockedDensity::validate(double tol) const {
  if (K == 0) {
    if (!blocks.empty()) throw std::runtime_error("BlockedDensity: blocks present with K = 0");
    return;
  }
  std::vector<double> logs;
  logs.reserve(blocks.size());
  int prev = std::numeric_limits<int>::min();
  for (const auto& b : blocks) {
    b.sector.validate();
    if (b.sector.K != K) throw std::runtime_error("BlockedDensity: sector K mismatch");
    if (b.sector.two_Iz <= prev) {
      throw std::runtime_error("BlockedDensity: blocks not in ascending sector order");
    }
    prev = b.sector.two_Iz;
    logs.push_back(b.log_weight);
    const double scale = std::max(1.0, b.block.cwiseAbs().maxCoeff());
    if ((b.block - b.block.adjoint()).cwiseAbs().maxCoeff() > tol * scale) {
      throw std::runtime_error("BlockedDensity: non-Hermitian block at two_Iz = " +
                               std::to_string(b.sector.two_Iz));
    }
    if (std::abs(b.block.trace().real() - 1.0) > tol) {
      throw std::runtime_error("BlockedDensity: block trace differs from one at two_Iz = " +
                               std::to_string(b.sector.two_Iz));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.block, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) {
      throw std::runtime_error("BlockedDensity: block not PSD at two_Iz = " +
                               std::to_string(b.sector.two_Iz));
    }
  }
  if (std::abs(log_sum_exp(logs)) > tol) {
    throw std::runtime_error("BlockedDensity: weights do not sum to one");
  }
}

double weight_c_log(int K, int two_Iz, double a) {
  SectorIndex{K, two_Iz}.validate();
  if (a < 0.0 || a > 1.0) throw std::domain_error("weight_c_log: a outside [0, 1]");
  const int n_up = (K + two_Iz) / 2;
  const int n_dn = (K - two_Iz) / 2;
  if (a == 0.0) return n_up == 0 ? 0.0 : kNegInf;
  if (a == 1.0) return n_dn == 0 ? 0.0 : kNegInf;
  return log_binomial(K, n_up) + n_up * std::log(a) + n_dn * std::log1p(-a);
}

BlockedDensity even_polarized(int K, double a, double log_weight_floor) {
  if (K <= 0 || K % 2 != 0) {
    throw std::domain_error(
        "even_polarized: K must be a positive even number (I = 1/2 simplification)");
  }
  if (a < 0.0 || a > 1.0) throw std::domain_error("even_polarized: a outside [0, 1]");
  BlockedDensity rho;
  rho.K = K;
  for (int two_Iz = -K; two_Iz <= K; two_Iz += 2) {
    const double lw = weight_c_log(K, two_Iz, a);
    if (lw < log_weight_floor) continue;
    const auto dim = sector_dimension(K, two_Iz).exact;
    if (!dim) {
      throw std::domain_error("even_polarized: sector dimension too large for the exact engine");
    }
    DensityBlock blk;
    blk.sector = {K, two_Iz};
    blk.log_weight = lw;
    blk.block = Matrix::Identity(*dim, *dim) / double(*dim);
    rho.blocks.push_back(std::move(blk));
  }
  return rho;
}

BlockedDensity uneven_polarized(int K, double a, double log_weight_floor) {
  if (K <= 0) throw std::domain_error("uneven_polarized: K must be positive");
  const double frozen_real = a * K;
  const long frozen = std::lround(frozen_real);
  if (std::abs(frozen_real - double(frozen)) > 1e-9) {
    throw std::domain_error("uneven_polarized: a*K must be integral");
  }
  const int residual = K - int(frozen);
  if (residual % 2 != 0) {
    throw std::domain_error("uneven_polarized: residual spin count (1-a)K must be even");
  }
  if (residual == 0) {
    // Fully polarized: nothing left to evolve.
    BlockedDensity rho;
    rho.K = 0;
    rho.frozen_offset = K / 2.0;
    return rho;
  }
  BlockedDensity rho = even_polarized(residual, 0.5, log_weight_floor);
  rho.frozen_offset = double(frozen) / 2.0;
  return rho;
}

double ratio_R(int K, double a) {
  if (K <= 0 || K % 2 != 0) throw std::domain_error("ratio_R: K must be positive even");
  if (a <= 0.0 || a >= 1.0) throw std::domain_error("ratio_R: a must lie strictly inside (0, 1)");
  const double log_r = log_binomial(K, K / 2) + (K / 2.0) * (std::log1p(-a) - std::log(a));
  return std::exp(log_r);
}

double expected_Iz(const BlockedDensity& rho) {
  if (rho.blocks.empty()) return rho.frozen_offset;
  // Blocks are Iz-homogeneous: the weight alone carries the observable.
  double num = 0.0;
  double den = 0.0;
  for (const auto& b : rho.blocks) {
    const double w = std::exp(b.log_weight);
    num += w * (b.sector.two_Iz / 2.0);
    den += w;
  }
  if (den == 0.0) throw std::runtime_error("expected_Iz: all sector weights underflowed");
  return rho.frozen_offset + num / den;
}

}  // namespace nucpol
