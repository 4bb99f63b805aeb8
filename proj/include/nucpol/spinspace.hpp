#pragma once

#include <cstdint>
#include <optional>
#include <vector>

// Basis bookkeeping for K spin-1/2 nuclei grouped into total-Iz symmetry
// sectors. Conventions used throughout:
//   * occupation words: bit i set means nucleus i carries m_i = +1/2,
//   * sector labels carry 2*Iz so they stay integral for odd K,
//   * sector bases are sorted ascending by occupation word.

namespace nucpol {

using SpinWord = std::uint64_t;

// Largest K for which binomial(K, K/2) fits in 64 bits.
inline constexpr int kExactDimensionLimit = 60;

struct SectorIndex {
  int K = 0;
  int two_Iz = 0;

  // Throws std::domain_error on parity mismatch or |two_Iz| > K.
  void validate() const;

  int n_up() const { return (two_Iz + K) / 2; }
  bool operator==(const SectorIndex&) const = default;
};

struct SectorDimension {
  std::optional<std::uint64_t> exact;  // present for K <= kExactDimensionLimit
  double log = 0.0;                    // ln d, valid up to K ~ 1e6 and beyond
};

// d_{Iz} = binomial(K, K/2 + Iz)
SectorDimension sector_dimension(int K, int two_Iz);

// Dimension of the combined electron+nuclear J_z sector, Omega(1/2, N) =
// binomial(K+1, N) with N = J_m - J counted in electron-flip units.
std::uint64_t omega_count(int K, int N);

struct SectorBasis {
  SectorIndex sector;
  std::vector<SpinWord> configs;  // ascending

  std::size_t dim() const { return configs.size(); }
  bool empty() const { return configs.empty(); }

  // Ordinal of a configuration; exact inverse of configs[]. Throws
  // std::domain_error if the word does not belong to the sector.
  std::size_t index_of(SpinWord config) const;
};

SectorBasis enumerate_sector(const SectorIndex& sector);

// 2*Iz of a single configuration.
int config_two_Iz(SpinWord bits, int K);

// ln binomial(n, k) via log-gamma; valid for huge n.
double log_binomial(std::int64_t n, std::int64_t k);

}  // namespace nucpol
