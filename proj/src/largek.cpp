#include "nucpol/largek.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

#include "nucpol/propagator.hpp"

namespace nucpol {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Signed log-space scalar: value = sign * exp(log_abs).
struct SignedLog {
  double log_abs = kNegInf;
  int sign = 1;

  static SignedLog from(double sign_value, double log_abs) {
    if (log_abs == kNegInf || sign_value == 0.0) return {kNegInf, 1};
    return {log_abs, sign_value > 0.0 ? 1 : -1};
  }

  SignedLog add(const SignedLog& other) const {
    if (other.log_abs == kNegInf) return *this;
    if (log_abs == kNegInf) return other;
    const SignedLog *big = this, *small = &other;
    if (other.log_abs > log_abs) std::swap(big, small);
    const double r = std::exp(small->log_abs - big->log_abs) * small->sign * big->sign;
    // |r| <= 1; 1 + r = 0 only on exact cancellation.
    if (1.0 + r <= 0.0) return {kNegInf, 1};
    return {big->log_abs + std::log1p(r), big->sign};
  }

  double value() const { return sign * std::exp(log_abs); }
};

// Sector sums of the even initial state, accumulated once per parameter set:
//   log_total  = ln sum_Iz c(Iz, a)                  (= 0 up to roundoff)
//   mean       = sum_Iz c(Iz, a) * Iz  as SignedLog  (= K(a - 1/2))
//   log_top    = ln c(K/2, a)
struct SectorSums {
  double log_total;
  SignedLog mean;
  double log_top;
};

SectorSums accumulate_sectors(std::int64_t K, double a) {
  // Streaming log-sum-exp over the K+1 sectors, positive and negative Iz kept
  // in separate streams so symmetric weights (a = 1/2) cancel exactly.
  double max_c = kNegInf, sum_c = 0.0;
  double max_pos = kNegInf, sum_pos = 0.0;
  double max_neg = kNegInf, sum_neg = 0.0;
  auto push = [](double lw, double& mx, double& sm) {
    if (lw == kNegInf) return;
    if (lw <= mx) {
      sm += std::exp(lw - mx);
    } else {
      sm = sm * std::exp(mx - lw) + 1.0;
      mx = lw;
    }
  };
  const double log_a = a > 0.0 ? std::log(a) : kNegInf;
  const double log_1ma = a < 1.0 ? std::log1p(-a) : kNegInf;
  for (std::int64_t n_up = 0; n_up <= K; ++n_up) {
    double lw;
    if (a == 0.0) {
      lw = n_up == 0 ? 0.0 : kNegInf;
    } else if (a == 1.0) {
      lw = n_up == K ? 0.0 : kNegInf;
    } else {
      lw = log_binomial(K, n_up) + double(n_up) * log_a + double(K - n_up) * log_1ma;
    }
    push(lw, max_c, sum_c);
    const double two_Iz = double(2 * n_up - K);
    if (two_Iz > 0.0) push(lw + std::log(two_Iz / 2.0), max_pos, sum_pos);
    if (two_Iz < 0.0) push(lw + std::log(-two_Iz / 2.0), max_neg, sum_neg);
  }
  auto close = [](double mx, double sm) { return mx == kNegInf ? kNegInf : mx + std::log(sm); };
  SectorSums sums;
  sums.log_total = close(max_c, sum_c);
  const SignedLog pos{close(max_pos, sum_pos), 1};
  const SignedLog neg{close(max_neg, sum_neg), -1};
  sums.mean = pos.add(neg);
  sums.log_top = a == 0.0 ? (K == 0 ? 0.0 : kNegInf)
                          : (a == 1.0 ? 0.0 : double(K) * std::log(a));
  return sums;
}

DiagonalPoint evaluate(const SectorSums& sums, std::int64_t K, double Vbar, std::int64_t M) {
  const double log_x = 2.0 * double(M) * std::log(Vbar);  // x = Vbar^(2M)
  const double log_half_K = std::log(double(K) / 2.0);
  // Numerator  sum_Iz c Iz v^(2M) = x * mean + (1 - x) * c_top * K/2
  // Denominator sum_Iz c   v^(2M) = x * total + (1 - x) * c_top
  // (exact rearrangement; keeps the a = 1/2 case free of cancellation).
  const double log_1mx = M == 0 ? kNegInf : std::log1p(-std::exp(log_x));
  SignedLog num = SignedLog::from(double(sums.mean.sign), sums.mean.log_abs + log_x);
  num = num.add({sums.log_top + log_half_K + log_1mx, 1});
  SignedLog den{sums.log_total + log_x, 1};
  den = den.add({sums.log_top + log_1mx, 1});

  DiagonalPoint point;
  point.log_P = den.log_abs;
  if (den.log_abs == kNegInf) {
    throw std::runtime_error("diagonal model: success probability underflowed to zero");
  }
  point.expected_Iz = num.sign * den.sign * std::exp(num.log_abs - den.log_abs);
  return point;
}

}  // namespace

void DiagonalModelParams::validate() const {
  if (K <= 0) throw std::domain_error("DiagonalModelParams: K must be positive");
  if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("DiagonalModelParams: a outside [0, 1]");
  if (!(Vbar > 0.0 && Vbar < 1.0)) {
    throw std::domain_error("DiagonalModelParams: Vbar must lie strictly inside (0, 1)");
  }
}

DiagonalPoint diagonal_expectation(const DiagonalModelParams& params, std::int64_t M) {
  params.validate();
  if (M < 0) throw std::domain_error("diagonal_expectation: M must be nonnegative");
  return evaluate(accumulate_sectors(params.K, params.a), params.K, params.Vbar, M);
}

ProtocolRecord diagonal_series(const DiagonalModelParams& params, int M_max) {
  params.validate();
  if (M_max < 0) throw std::domain_error("diagonal_series: M_max must be nonnegative");
  const SectorSums sums = accumulate_sectors(params.K, params.a);
  ProtocolRecord rec;
  rec.series.reserve(M_max + 1);
  for (int M = 0; M <= M_max; ++M) {
    const DiagonalPoint p = evaluate(sums, params.K, params.Vbar, M);
    rec.series.push_back({M, p.expected_Iz, p.log_P});
  }
  return rec;
}

namespace {

// Residual thermal system of the uneven state; frozen spins contribute
// offset = a*K/2 to every expectation value.
struct UnevenSplit {
  std::int64_t frozen;
  std::int64_t residual;
  double offset;
};

UnevenSplit split_uneven(const DiagonalModelParams& params) {
  const double frozen_real = params.a * double(params.K);
  const std::int64_t frozen = std::llround(frozen_real);
  if (std::abs(frozen_real - double(frozen)) > 1e-9) {
    throw std::domain_error("uneven diagonal model: a*K must be integral");
  }
  return {frozen, params.K - frozen, double(frozen) / 2.0};
}

}  // namespace

ProtocolRecord diagonal_series_uneven(const DiagonalModelParams& params, int M_max) {
  params.validate();
  const UnevenSplit split = split_uneven(params);
  if (split.residual == 0) {
    ProtocolRecord rec;
    for (int M = 0; M <= M_max; ++M) rec.series.push_back({M, split.offset, 0.0});
    return rec;
  }
  DiagonalModelParams residual = params;
  residual.K = split.residual;
  residual.a = 0.5;
  ProtocolRecord rec = diagonal_series(residual, M_max);
  for (auto& p : rec.series) p.expected_Iz += split.offset;
  return rec;
}

namespace {

std::int64_t bisect_required_M(const std::function<double(std::int64_t)>& iz_at,
                               double target) {
  if (iz_at(0) >= target) return 0;
  std::int64_t hi = 1;
  while (iz_at(hi) < target) {
    hi *= 2;
    if (hi > (std::int64_t(1) << 50)) {
      throw std::runtime_error("required_M: threshold not reached within 2^50 measurements");
    }
  }
  std::int64_t lo = hi / 2;  // iz(lo) < target <= iz(hi)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (iz_at(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

std::int64_t required_M(const DiagonalModelParams& params, double theta) {
  params.validate();
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::domain_error("required_M: theta must lie strictly inside (0, 1)");
  }
  const SectorSums sums = accumulate_sectors(params.K, params.a);
  const double target = theta * double(params.K) / 2.0;
  return bisect_required_M(
      [&](std::int64_t M) { return evaluate(sums, params.K, params.Vbar, M).expected_Iz; },
      target);
}

std::int64_t required_M_uneven(const DiagonalModelParams& params, double theta) {
  params.validate();
  if (!(theta > 0.0 && theta < 1.0)) {
    throw std::domain_error("required_M_uneven: theta must lie strictly inside (0, 1)");
  }
  const UnevenSplit split = split_uneven(params);
  const double target = theta * double(params.K) / 2.0;
  if (split.residual == 0) return 0;
  const SectorSums sums = accumulate_sectors(split.residual, 0.5);
  return bisect_required_M(
      [&](std::int64_t M) {
        return split.offset + evaluate(sums, split.residual, params.Vbar, M).expected_Iz;
      },
      target);
}

double bosonic_eigenvalue(std::int64_t n0, double A, double tau, double c) {
  if (n0 < 0) throw std::domain_error("bosonic_eigenvalue: occupation must be nonnegative");
  return std::cos(c * A * tau * std::sqrt(double(n0)));
}

double boson_commutator_residual(const SystemParams& params, const SectorIndex& sector) {
  params.validate();
  sector.validate();
  const int K = params.K;
  const Eigen::MatrixXd modes = complete_mode_matrix(params.alphas);
  const SectorBasis basis = enumerate_sector(sector);
  const bool has_above = sector.two_Iz + 2 <= K;
  const bool has_below = sector.two_Iz - 2 >= -K;
  const SectorBasis above = has_above ? enumerate_sector({K, sector.two_Iz + 2}) : SectorBasis{};
  const SectorBasis below = has_below ? enumerate_sector({K, sector.two_Iz - 2}) : SectorBasis{};

  // A_{k-} blocks touching this sector: "entering" maps above -> sector,
  // "leaving" maps sector -> below.
  std::vector<Matrix> entering(K), leaving(K);
  for (int k = 0; k < K; ++k) {
    if (has_above) entering[k] = mode_lowering(modes, k, above, basis);
    if (has_below) leaving[k] = mode_lowering(modes, k, basis, below);
  }

  double worst = 0.0;
  const auto d = static_cast<Eigen::Index>(basis.dim());
  for (int k = 0; k < K; ++k) {
    for (int kp = 0; kp < K; ++kp) {
      Matrix comm = Matrix::Zero(d, d);
      // [A_k+, A_k'-] on the sector: raise-after-lower minus lower-after-raise.
      if (has_below) comm += leaving[k].adjoint() * leaving[kp];
      if (has_above) comm -= entering[kp] * entering[k].adjoint();
      if (k == kp) comm -= Matrix::Identity(d, d);
      const double norm = comm.jacobiSvd().singularValues()(0);
      worst = std::max(worst, norm);
    }
  }
  return worst;
}

}  // namespace nucpol
