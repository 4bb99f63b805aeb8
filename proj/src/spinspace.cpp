#include "nucpol/spinspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nucpol {

void SectorIndex::validate() const {
  if (K <= 0) throw std::domain_error("SectorIndex: K must be positive, got " + std::to_string(K));
  if (std::abs(two_Iz) > K) {
    throw std::domain_error("SectorIndex: |two_Iz| = " + std::to_string(std::abs(two_Iz)) +
                            " exceeds K = " + std::to_string(K));
  }
  if (((two_Iz ^ K) & 1) != 0) {
    throw std::domain_error("SectorIndex: two_Iz = " + std::to_string(two_Iz) +
                            " and K = " + std::to_string(K) + " differ in parity");
  }
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
         std::lgamma(double(n - k) + 1.0);
}

namespace {

std::uint64_t exact_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  // Stays integral at every step: r after i iterations equals binomial(n0+i, i).
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * std::uint64_t(n - k + i) / std::uint64_t(i);
  }
  return r;
}

}  // namespace

SectorDimension sector_dimension(int K, int two_Iz) {
  SectorIndex{K, two_Iz}.validate();
  const int n_up = (two_Iz + K) / 2;
  SectorDimension d;
  d.log = log_binomial(K, n_up);
  if (K <= kExactDimensionLimit) d.exact = exact_binomial(K, n_up);
  return d;
}

std::uint64_t omega_count(int K, int N) {
  if (K <= 0) throw std::domain_error("omega_count: K must be positive");
  if (N < 0 || N > K + 1) {
    throw std::domain_error("omega_count: N = " + std::to_string(N) + " outside [0, " +
                            std::to_string(K + 1) + "]");
  }
  if (K + 1 > kExactDimensionLimit) {
    throw std::domain_error("omega_count: exact count requires K+1 <= " +
                            std::to_string(kExactDimensionLimit));
  }
  return exact_binomial(K + 1, N);
}

SectorBasis enumerate_sector(const SectorIndex& sector) {
  sector.validate();
  if (sector.K > 62) throw std::domain_error("enumerate_sector: K too large for exact enumeration");
  SectorBasis basis;
  basis.sector = sector;
  const int n_up = sector.n_up();
  const auto dim = sector_dimension(sector.K, sector.two_Iz).exact.value();
  basis.configs.reserve(dim);
  if (n_up == 0) {
    basis.configs.push_back(0);
    return basis;
  }
  // Gosper's hack walks words of fixed popcount in ascending order.
  SpinWord w = (SpinWord(1) << n_up) - 1;
  const SpinWord limit = SpinWord(1) << sector.K;
  while (w < limit) {
    basis.configs.push_back(w);
    const SpinWord c = w & (~w + 1);
    const SpinWord r = w + c;
    w = (((r ^ w) >> 2) / c) | r;
  }
  return basis;
}

std::size_t SectorBasis::index_of(SpinWord config) const {
  const auto it = std::lower_bound(configs.begin(), configs.end(), config);
  if (it == configs.end() || *it != config) {
    throw std::domain_error("SectorBasis: configuration not in sector");
  }
  return static_cast<std::size_t>(it - configs.begin());
}

int config_two_Iz(SpinWord bits, int K) { return 2 * std::popcount(bits) - K; }

}  // namespace nucpol
