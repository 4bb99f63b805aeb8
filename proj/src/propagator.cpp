#include "nucpol/propagator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "nucpol/kernels.hpp"

namespace nucpol {

void ConditionedPropagator::validate(double tol) const {
  if (static_cast<int>(V.size()) != K + 1 || static_cast<int>(W.size()) != K + 1) {
    throw std::runtime_error("ConditionedPropagator: wrong sector count");
  }
  for (int s = 0; s <= K; ++s) {
    const Matrix& v = V[s];
    Matrix gram = v.adjoint() * v;
    if (s < K) {
      const Matrix& w = W[s];
      gram += w.adjoint() * w;
    }
    const double dev = (gram - Matrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
    if (dev > tol) {
      throw std::runtime_error("ConditionedPropagator: Kraus completeness violated in sector " +
                               std::to_string(two_Iz_of(s)) + "/2, deviation " +
                               std::to_string(dev));
    }
    const Eigen::JacobiSVD<Matrix> svd(v);
    if (svd.singularValues().size() > 0 && svd.singularValues()(0) > 1.0 + 1e-12) {
      throw std::runtime_error("ConditionedPropagator: singular value above one in sector " +
                               std::to_string(two_Iz_of(s)) + "/2");
    }
  }
  if (V.back().rows() != 1 || std::abs(std::abs(V.back()(0, 0)) - 1.0) > 1e-12) {
    throw std::runtime_error("ConditionedPropagator: top sector is not a pure phase");
  }
}

Matrix evolve_sector(const SectorHamiltonian& h, double tau) {
  const double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
  if ((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("evolve_sector: Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("evolve_sector: eigensolver failed in sector two_J = " +
                             std::to_string(h.two_J));
  }
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases[i] = std::exp(Complex(0.0, -tau * es.eigenvalues()[i]));
  }
  const Matrix scaled = es.eigenvectors() * phases.asDiagonal();
  return kernels::multiply_adjoint(scaled, es.eigenvectors());
}

namespace {

void for_each_slot(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int s = 0; s < count; ++s) body(s);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int s = next.fetch_add(1); s < count; s = next.fetch_add(1)) body(s);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ConditionedPropagator conditioned_blocks(const SystemParams& params, double tau,
                                         int dimension_cap, int threads) {
  params.validate();
  const int K = params.K;
  const bool over_cap =
      K + 1 > kExactDimensionLimit ||
      omega_count(K, (K + 1) / 2) > static_cast<std::uint64_t>(dimension_cap);
  if (over_cap) {
    throw std::domain_error("conditioned_blocks: largest J_z sector of K = " + std::to_string(K) +
                            " exceeds the dimension cap " + std::to_string(dimension_cap) +
                            "; use the large-K diagonal model for this regime");
  }

  ConditionedPropagator prop;
  prop.tau = tau;
  prop.K = K;
  prop.V.resize(K + 1);
  prop.W.resize(K + 1);

  for_each_slot(K + 1, threads, [&](int s) {
    const int two_Iz = 2 * s - K;
    const SectorHamiltonian h = build_sector_hamiltonian(params, two_Iz + 1);
    const Matrix u = evolve_sector(h, tau);
    const std::size_t du = h.up.dim(), dd = h.down.dim();
    prop.V[s] = u.topLeftCorner(du, du);
    prop.W[s] = u.bottomLeftCorner(dd, du);
  });
  return prop;
}

bool SpectralReport::degeneracy_flagged() const {
  for (const auto& s : sectors) {
    if (!is_top(s) && s.degenerate_count > 0) return true;
  }
  return false;
}

double SpectralReport::max_nontop_modulus() const {
  double m = 0.0;
  for (const auto& s : sectors) {
    if (!is_top(s) && !s.moduli.empty()) m = std::max(m, s.moduli.front());
  }
  return m;
}

SpectralReport spectral_report(const ConditionedPropagator& prop, double threshold) {
  SpectralReport report;
  report.K = prop.K;
  report.threshold = threshold;
  report.sectors.reserve(prop.V.size());
  for (std::size_t s = 0; s < prop.V.size(); ++s) {
    SectorSpectrum spec;
    spec.two_Iz = prop.two_Iz_of(static_cast<int>(s));
    Eigen::ComplexEigenSolver<Matrix> es(prop.V[s], /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("spectral_report: eigensolver failed in sector " +
                               std::to_string(spec.two_Iz) + "/2");
    }
    spec.eigenvalues.assign(es.eigenvalues().data(),
                            es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(),
              [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
    spec.moduli.resize(spec.eigenvalues.size());
    std::transform(spec.eigenvalues.begin(), spec.eigenvalues.end(), spec.moduli.begin(),
                   [](Complex v) { return std::abs(v); });
    if (!spec.moduli.empty() && spec.moduli.front() > 1.0 + 1e-12) {
      throw std::runtime_error("spectral_report: eigenvalue modulus above one in sector " +
                               std::to_string(spec.two_Iz) + "/2");
    }
    spec.degenerate_count = static_cast<int>(std::count_if(
        spec.moduli.begin(), spec.moduli.end(),
        [threshold](double m) { return m >= 1.0 - threshold; }));
    report.sectors.push_back(std::move(spec));
  }
  return report;
}

Matrix flipflop_h(const SystemParams& params, const SectorIndex& sector) {
  sector.validate();
  if (sector.K != params.K) throw std::domain_error("flipflop_h: sector K does not match params");
  const SectorBasis basis = enumerate_sector(sector);
  if (sector.two_Iz + 2 > params.K) {
    // A_+ annihilates the top sector; h vanishes there.
    return Matrix::Zero(basis.dim(), basis.dim());
  }
  const SectorBasis above = enumerate_sector({params.K, sector.two_Iz + 2});
  const Matrix a_minus = collective_lowering(params.alphas, above, basis);
  // h = A_- A_+ with A_+ = (A_-)^H mapping the sector one step up.
  return kernels::multiply(a_minus, a_minus.adjoint());
}

namespace {

// Eigenvalues of h restricted to a sector (clamped nonnegative).
Eigen::VectorXd h_spectrum(const Matrix& h, Matrix* vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, vectors ? Eigen::ComputeEigenvectors
                                                      : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("flip-flop h eigensolver failed");
  if (vectors) *vectors = es.eigenvectors();
  return es.eigenvalues().cwiseMax(0.0);
}

}  // namespace

Matrix analytic_flipflop_v(const SystemParams& params, double tau, const SectorIndex& sector) {
  params.validate();
  if (params.hnuc.kind != HNucSpec::Kind::none) {
    throw std::domain_error("analytic_flipflop_v: closed form requires H_nuc = none");
  }
  const bool has_field = params.electron_zeeman != 0.0 || params.nuclear_zeeman != 0.0 ||
                         !params.flip_flop_only;
  Complex phase(1.0, 0.0);
  if (has_field) {
    // Eq-(8)-style factor: needs a sector-scalar effective field, i.e.
    // homogeneous couplings.
    const double a0 = params.alphas.front();
    for (double a : params.alphas) {
      if (std::abs(a - a0) > 1e-12) {
        throw std::domain_error(
            "analytic_flipflop_v: effective-field phase requires homogeneous couplings");
      }
    }
    double beff = params.electron_zeeman - params.nuclear_zeeman;
    if (!params.flip_flop_only) {
      beff -= params.hyperfine_A * a0 * (sector.two_Iz / 2.0);
    }
    phase = std::exp(Complex(0.0, -0.5 * beff * tau));
  }
  const Matrix h = flipflop_h(params, sector);
  Matrix q;
  const Eigen::VectorXd lambda = h_spectrum(h, &q);
  Eigen::VectorXcd f(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    f[i] = phase * std::cos(kFlipflopCosineConstant * params.hyperfine_A * tau *
                            std::sqrt(lambda[i]));
  }
  return kernels::multiply_adjoint(Matrix(q * f.asDiagonal()), q);
}

Matrix dark_states(const SystemParams& params, const SectorIndex& sector) {
  params.validate();
  sector.validate();
  const SectorBasis basis = enumerate_sector(sector);
  if (sector.two_Iz + 2 > params.K) {
    // Whole sector is annihilated by A_+.
    return Matrix::Identity(basis.dim(), basis.dim());
  }
  const SectorBasis above = enumerate_sector({params.K, sector.two_Iz + 2});
  const Matrix a_plus = collective_lowering(params.alphas, above, basis).adjoint();
  Eigen::JacobiSVD<Matrix> svd(a_plus, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-10) ++rank;
  return svd.matrixV().rightCols(static_cast<Eigen::Index>(basis.dim()) - rank);
}

std::pair<Matrix, Matrix> moment_check(const SystemParams& params, int n, int two_J) {
  if (n < 1 || n > 6) {
    throw std::invalid_argument("moment_check: n must lie in [1, 6] (combinatorial blowup)");
  }
  const SectorHamiltonian h = build_sector_hamiltonian(params, two_J);
  const std::size_t du = h.up.dim(), dd = h.down.dim();
  if (du == 0) throw std::domain_error("moment_check: sector has no electron-up block");

  Matrix direct = Matrix::Identity(du + dd, du + dd);
  for (int i = 0; i < n; ++i) direct = kernels::multiply(h.matrix, direct);
  Matrix direct_up = direct.topLeftCorner(du, du);

  // curly-H blocks and flip operators of the split
  // H = curly-H + (A/2)(A+ S- + A- S+).
  const Matrix h_up = h.matrix.topLeftCorner(du, du);
  const Matrix h_dn = h.matrix.bottomRightCorner(dd, dd);
  const Matrix f_minus = h.matrix.topRightCorner(du, dd);   // (A/2) A-  : down -> up
  const Matrix f_plus = h.matrix.bottomLeftCorner(dd, du);  // (A/2) A+  : up -> down

  // Enumerate stay/flip factor strings of length n; keep those returning to
  // the electron-up side. Bit b of the mask selects the b-th factor counted
  // from the right, i.e. in application order.
  Matrix reconstructed = Matrix::Zero(du, du);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    bool up = true;
    bool dead = false;
    Matrix acc = Matrix::Identity(du, du);
    for (int step = 0; step < n; ++step) {
      const bool flip = (mask >> step) & 1u;
      if (!flip) {
        acc = kernels::multiply(up ? h_up : h_dn, acc);
      } else {
        if (up && dd == 0) {
          dead = true;
          break;
        }
        acc = kernels::multiply(up ? f_plus : f_minus, acc);
        up = !up;
      }
    }
    if (!dead && up) reconstructed += acc;
  }
  return {std::move(direct_up), std::move(reconstructed)};
}

double draw_generic_tau(const SystemParams& params, std::mt19937_64& rng, double lo, double hi) {
  params.validate();
  std::vector<double> sqrt_lambdas;
  for (int two_Iz = -params.K; two_Iz <= params.K; two_Iz += 2) {
    const Eigen::VectorXd lambda = h_spectrum(flipflop_h(params, {params.K, two_Iz}), nullptr);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda[i] > 1e-12) sqrt_lambdas.push_back(std::sqrt(lambda[i]));
    }
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double u = double(rng() >> 11) * 0x1.0p-53;
    const double tau = lo + (hi - lo) * u;
    bool ok = true;
    for (double sl : sqrt_lambdas) {
      if (std::abs(std::cos(kFlipflopCosineConstant * params.hyperfine_A * tau * sl)) >
          1.0 - 1e-6) {
        ok = false;
        break;
      }
    }
    if (ok) return tau;
  }
  throw std::runtime_error("draw_generic_tau: no generic tau found in range");
}

}  // namespace nucpol
