#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nucpol/config.hpp"
#include "nucpol/kernels.hpp"
#include "nucpol/largek.hpp"
#include "nucpol/records.hpp"
#include "nucpol/version.hpp"

namespace nucpol {

namespace {

std::vector<double> resolve_alphas(const RunConfig& c, int count, int offset) {
  std::vector<double> a(count);
  switch (c.alpha.kind) {
    case AlphaSpec::Kind::uniform:
      std::fill(a.begin(), a.end(), 1.0);
      break;
    case AlphaSpec::Kind::exponential_envelope:
      for (int i = 0; i < count; ++i) a[i] = std::exp(-c.alpha.decay * (offset + i));
      break;
    case AlphaSpec::Kind::explicit_list:
      for (int i = 0; i < count; ++i) a[i] = c.alpha.values[offset + i];
      break;
  }
  double norm2 = 0.0;
  for (double v : a) norm2 += v * v;
  if (norm2 == 0.0) {
    throw std::invalid_argument("config: key 'alpha': zero couplings on the dynamic spins");
  }
  const double norm = std::sqrt(norm2);
  for (double& v : a) v /= norm;
  return a;
}

// Sparse Hermitian H_nuc entries: lines "row_word col_word re im", words over
// the K-spin computational basis, Iz-preserving.
HNucSpec load_custom_hnuc(const std::string& path, int K) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: key 'hnuc_file': cannot open '" + path + "'");
  auto entries = std::make_shared<std::map<std::pair<SpinWord, SpinWord>, Complex>>();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    SpinWord r, c;
    double re, im;
    if (!(row >> r)) continue;  // blank
    if (!(row >> c >> re >> im)) {
      throw std::invalid_argument("config: key 'hnuc_file': malformed line " +
                                  std::to_string(line_no));
    }
    if (r >= (SpinWord(1) << K) || c >= (SpinWord(1) << K)) {
      throw std::invalid_argument("config: key 'hnuc_file': word outside the K-spin basis at line " +
                                  std::to_string(line_no));
    }
    if (std::popcount(r) != std::popcount(c)) {
      throw std::invalid_argument(
          "config: key 'hnuc_file': entry does not preserve total I_z at line " +
          std::to_string(line_no));
    }
    (*entries)[{r, c}] += Complex(re, im);
  }
  return HNucSpec::custom([entries](const SectorBasis& basis) {
    Matrix m = Matrix::Zero(basis.dim(), basis.dim());
    for (std::size_t col = 0; col < basis.dim(); ++col) {
      for (std::size_t row = 0; row < basis.dim(); ++row) {
        const auto it = entries->find({basis.configs[row], basis.configs[col]});
        if (it != entries->end()) m(row, col) = it->second;
      }
    }
    return m;
  });
}

HNucSpec resolve_hnuc(const RunConfig& c, int count, int offset) {
  switch (c.hnuc.kind) {
    case HNucConfig::Kind::none:
      return HNucSpec::none();
    case HNucConfig::Kind::dipolar: {
      if (c.hnuc.b_matrix.empty()) return HNucSpec::secular_dipolar_uniform(count, c.hnuc.b);
      Eigen::MatrixXd b(count, count);
      for (int i = 0; i < count; ++i) {
        for (int j = 0; j < count; ++j) {
          b(i, j) = c.hnuc.b_matrix[std::size_t(offset + i) * c.K + std::size_t(offset + j)];
        }
      }
      b.diagonal().setZero();
      return HNucSpec::secular_dipolar(std::move(b));
    }
    case HNucConfig::Kind::custom_file:
      if (offset != 0) {
        throw std::invalid_argument(
            "config: key 'hnuc_file': custom H_nuc is not supported with the uneven state");
      }
      return load_custom_hnuc(c.hnuc.file, count);
  }
  throw std::logic_error("unreachable hnuc kind");
}

// The uneven state freezes the polarized a*K spins; the dynamic system lives
// on the residual (1-a)*K spins, taken as the trailing couplings (the weakest
// sites under a decaying envelope) and renormalized.
SystemParams build_system(const RunConfig& c, bool residual_only) {
  SystemParams p;
  int count = c.K, offset = 0;
  if (residual_only) {
    const double frozen_real = c.a * c.K;
    const long frozen = std::lround(frozen_real);
    if (std::abs(frozen_real - double(frozen)) > 1e-9) {
      throw std::invalid_argument("config: key 'a': a*K must be integral for the uneven state");
    }
    count = c.K - int(frozen);
    offset = int(frozen);
    if (count == 0) {
      p.K = 0;
      return p;
    }
  }
  p.K = count;
  p.hyperfine_A = c.hyperfine_A;
  p.alphas = resolve_alphas(c, count, offset);
  p.electron_zeeman = c.electron_zeeman;
  p.nuclear_zeeman = c.nuclear_zeeman;
  p.flip_flop_only = c.flip_flop_only;
  p.hnuc = resolve_hnuc(c, count, offset);
  return p;
}

void write_file(const std::string& path, const std::string& content,
                std::vector<std::string>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
  out << content;
  files.push_back(path);
}

}  // namespace

ExecResult execute(const RunConfig& config) {
  ExecResult result;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string canonical = emit_config(config);
  const std::string fp = fingerprint_of(canonical);
  nlohmann::ordered_json meta;
  meta["fingerprint"] = fp;
  meta["version"] = kVersion;
  meta["mode"] = "";
  meta["seed"] = config.seed;
  meta["kernels"] = kernels::active_backend_name();

  try {
    // Re-validate: execute() may be called with a hand-built config.
    const ParseResult revalidated = parse_config(canonical);
    if (!(revalidated.config == config)) {
      throw std::invalid_argument("config: canonical form does not round-trip");
    }

    switch (config.mode) {
      case RunMode::exact: {
        const bool uneven = config.state == InitialState::uneven;
        const SystemParams params = build_system(config, uneven);
        BlockedDensity rho = uneven ? uneven_polarized(config.K, config.a)
                                    : even_polarized(config.K, config.a);
        ProtocolRecord rec;
        if (params.K == 0) {
          for (int M = 0; M <= config.M_max; ++M) {
            rec.series.push_back({M, rho.frozen_offset, 0.0});
          }
        } else {
          const ConditionedPropagator prop =
              conditioned_blocks(params, config.tau, config.dimension_cap, config.threads);
          rec = uneven ? run_uneven(rho, prop, config.M_max)
                       : run_conditioned(std::move(rho), prop, config.M_max);
        }
        rec.fingerprint = fp;
        meta["mode"] = "exact";
        meta["state"] = uneven ? "uneven" : "even";
        write_file(config.out,
                   config.format == OutputFormat::csv ? to_csv(rec) : to_json(rec, "exact"),
                   result.files_written);
        break;
      }
      case RunMode::trajectory: {
        const SystemParams params = build_system(config, false);
        const BlockedDensity rho = even_polarized(config.K, config.a);
        const ConditionedPropagator prop =
            conditioned_blocks(params, config.tau, config.dimension_cap, config.threads);
        TrajectoryPolicy policy;
        policy.max_attempts = config.max_attempts;
        policy.target_streak = config.target_streak;
        policy.on_failure = config.reset_on_failure ? TrajectoryPolicy::OnFailure::reset
                                                    : TrajectoryPolicy::OnFailure::carry;
        TrajectoryRecord rec = run_trajectory(rho, prop, config.seed, policy);
        rec.fingerprint = fp;
        meta["mode"] = "trajectory";
        meta["reached_target"] = rec.reached_target;
        write_file(config.out,
                   config.format == OutputFormat::csv ? to_csv(rec) : to_json(rec),
                   result.files_written);
        break;
      }
      case RunMode::spectrum: {
        const SystemParams params = build_system(config, false);
        const ConditionedPropagator prop =
            conditioned_blocks(params, config.tau, config.dimension_cap, config.threads);
        const SpectralReport report = spectral_report(prop);
        meta["mode"] = "spectrum";
        meta["degeneracy_flagged"] = report.degeneracy_flagged();
        // Spectral reports are JSON by contract regardless of the format key.
        write_file(config.out, to_json(report), result.files_written);
        break;
      }
      case RunMode::largek:
      case RunMode::largek_uneven: {
        const bool uneven = config.mode == RunMode::largek_uneven;
        DiagonalModelParams params;
        params.K = config.K;
        params.a = config.a;
        params.Vbar = config.Vbar;
        ProtocolRecord rec = uneven ? diagonal_series_uneven(params, config.M_max)
                                    : diagonal_series(params, config.M_max);
        rec.fingerprint = fp;
        const std::int64_t m_required = uneven ? required_M_uneven(params, config.theta)
                                               : required_M(params, config.theta);
        meta["mode"] = uneven ? "largek-uneven" : "largek";
        meta["model"] = "diagonal-average";
        meta["theta"] = config.theta;
        meta["Vbar"] = config.Vbar;
        meta["required_M"] = m_required;
        if (config.format == OutputFormat::csv) {
          write_file(config.out, to_csv(rec), result.files_written);
        } else {
          nlohmann::ordered_json j =
              nlohmann::ordered_json::parse(to_json(rec, "diagonal-average"));
          j["theta"] = config.theta;
          j["required_M"] = m_required;
          write_file(config.out, j.dump(2) + "\n", result.files_written);
        }
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    result.exit_code = kExitConfigError;
    result.error_category = "config";
    result.message = e.what();
  } catch (const std::domain_error& e) {
    result.exit_code = kExitConfigError;
    result.error_category = "config";
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitNumericalError;
    result.error_category = "numerical";
    result.message = e.what();
  }

  if (result.exit_code == kExitConfigError &&
      result.message.find("dimension cap") != std::string::npos) {
    result.exit_code = kExitCapExceeded;
    result.error_category = "cap";
  }

  if (result.exit_code == kExitOk) {
    const auto t1 = std::chrono::steady_clock::now();
    meta["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();
    std::ofstream side(config.out + ".meta.json", std::ios::binary);
    if (side) {
      side << meta.dump(2) << "\n";
      result.files_written.push_back(config.out + ".meta.json");
    }
  }
  return result;
}

}  // namespace nucpol
