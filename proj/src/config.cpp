#include "nucpol/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nucpol/kernels.hpp"
#include "nucpol/largek.hpp"
#include "nucpol/records.hpp"
#include "nucpol/version.hpp"

namespace nucpol {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config: key '" + key + "': " + what);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail(key, "expected a number, got '" + v + "'");
  }
  if (pos != v.size()) fail(key, "trailing characters in number '" + v + "'");
  return d;
}

long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long i = 0;
  try {
    i = std::stoll(v, &pos);
  } catch (const std::exception&) {
    fail(key, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) fail(key, "trailing characters in integer '" + v + "'");
  return i;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    fail(key, "expected a bracketed list like [1, 2]");
  }
  std::vector<double> values;
  std::string item;
  std::istringstream body(v.substr(1, v.size() - 2));
  while (std::getline(body, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(key, "empty list element");
    values.push_back(parse_double(key, item));
  }
  if (values.empty()) fail(key, "empty list");
  return values;
}

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::exact: return "exact";
    case RunMode::trajectory: return "trajectory";
    case RunMode::spectrum: return "spectrum";
    case RunMode::largek: return "largek";
    case RunMode::largek_uneven: return "largek-uneven";
  }
  return "?";
}

bool exact_engine_mode(RunMode m) {
  return m == RunMode::exact || m == RunMode::trajectory || m == RunMode::spectrum;
}

void check_dimension_cap(const RunConfig& c) {
  if (!exact_engine_mode(c.mode)) return;
  const bool over = c.K + 1 > kExactDimensionLimit ||
                    omega_count(c.K, (c.K + 1) / 2) > std::uint64_t(c.dimension_cap);
  if (over) {
    throw std::invalid_argument("config: dimension cap: exact mode with K = " +
                                std::to_string(c.K) + " exceeds the block cap " +
                                std::to_string(c.dimension_cap) +
                                "; use mode = largek for this regime");
  }
}

void validate_config(const RunConfig& c) {
  if (c.K <= 0) fail("K", "must be positive");
  if (!(c.a >= 0.0 && c.a <= 1.0)) fail("a", "must lie in [0, 1]");
  if (!(c.tau > 0.0)) fail("tau", "must be positive");
  if (!(c.theta > 0.0 && c.theta < 1.0)) fail("theta", "must lie strictly inside (0, 1)");
  if (c.M_max < 0) fail("M_max", "must be nonnegative");
  if (c.max_attempts < 1) fail("max_attempts", "must be positive");
  if (c.target_streak < 1) fail("target_streak", "must be positive");
  if (c.dimension_cap < 1) fail("dimension_cap", "must be positive");
  if (c.threads < 1) fail("threads", "must be positive");
  if (c.out.empty()) fail("out", "must not be empty");
  if (c.mode == RunMode::largek || c.mode == RunMode::largek_uneven) {
    if (!(c.Vbar > 0.0 && c.Vbar < 1.0)) fail("Vbar", "must lie strictly inside (0, 1)");
  }
  if (c.alpha.kind == AlphaSpec::Kind::explicit_list &&
      static_cast<int>(c.alpha.values.size()) != c.K) {
    fail("alpha", "expected " + std::to_string(c.K) + " entries");
  }
  if (c.alpha.kind == AlphaSpec::Kind::exponential_envelope && c.alpha.decay < 0.0) {
    fail("alpha", "envelope decay must be nonnegative");
  }
  if (c.hnuc.kind == HNucConfig::Kind::dipolar && !c.hnuc.b_matrix.empty() &&
      c.hnuc.b_matrix.size() != std::size_t(c.K) * std::size_t(c.K)) {
    fail("b_matrix", "expected a K*K row-major list");
  }
  if (c.hnuc.kind == HNucConfig::Kind::custom_file && c.hnuc.file.empty()) {
    fail("hnuc_file", "required when hnuc = custom-file");
  }
  check_dimension_cap(c);
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config: empty key or value in '" + line + "'");
    }
    if (!kv.emplace(key, value).second) {
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
  }

  ParseResult result;
  RunConfig& c = result.config;
  auto take = [&kv](const std::string& key) -> std::string {
    const auto it = kv.find(key);
    if (it == kv.end()) return "";
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  // mode and K drive everything else.
  {
    const std::string v = take("mode");
    if (v.empty()) throw std::invalid_argument("config: key 'mode' is required");
    if (v == "exact") c.mode = RunMode::exact;
    else if (v == "trajectory") c.mode = RunMode::trajectory;
    else if (v == "spectrum") c.mode = RunMode::spectrum;
    else if (v == "largek") c.mode = RunMode::largek;
    else if (v == "largek-uneven") c.mode = RunMode::largek_uneven;
    else fail("mode", "expected exact|trajectory|spectrum|largek|largek-uneven, got '" + v + "'");
  }
  {
    const std::string v = take("K");
    if (v.empty()) throw std::invalid_argument("config: key 'K' is required");
    c.K = static_cast<int>(parse_int("K", v));
  }
  if (const std::string v = take("tau"); !v.empty()) c.tau = parse_double("tau", v);
  if (!(c.tau > 0.0)) fail("tau", "must be positive");
  if (const std::string v = take("a"); !v.empty()) c.a = parse_double("a", v);

  // Hyperfine coupling: per-site tau-products, a single product, or an energy.
  const std::string a_alpha_tau = take("A_alpha_tau");
  const std::string a_tau = take("A_tau");
  const std::string a_energy = take("A");
  const std::string alpha = take("alpha");
  if (!a_alpha_tau.empty() && (!a_tau.empty() || !a_energy.empty() || !alpha.empty())) {
    fail("A_alpha_tau", "conflicts with A, A_tau and alpha");
  }
  if (!a_tau.empty() && !a_energy.empty()) fail("A_tau", "conflicts with A");
  if (!a_alpha_tau.empty()) {
    const std::vector<double> products = parse_list("A_alpha_tau", a_alpha_tau);
    double norm2 = 0.0;
    for (double p : products) norm2 += p * p;
    if (norm2 == 0.0) fail("A_alpha_tau", "products must not all vanish");
    const double norm = std::sqrt(norm2);
    c.hyperfine_A = norm / c.tau;
    c.alpha.kind = AlphaSpec::Kind::explicit_list;
    c.alpha.values.resize(products.size());
    for (std::size_t i = 0; i < products.size(); ++i) c.alpha.values[i] = products[i] / norm;
  } else {
    if (!a_tau.empty()) c.hyperfine_A = parse_double("A_tau", a_tau) / c.tau;
    if (!a_energy.empty()) c.hyperfine_A = parse_double("A", a_energy);
    if (!alpha.empty()) {
      if (alpha == "uniform") {
        c.alpha.kind = AlphaSpec::Kind::uniform;
      } else if (alpha.rfind("exponential:", 0) == 0) {
        c.alpha.kind = AlphaSpec::Kind::exponential_envelope;
        c.alpha.decay = parse_double("alpha", alpha.substr(12));
      } else {
        const std::vector<double> values = parse_list("alpha", alpha);
        double norm2 = 0.0;
        for (double v : values) norm2 += v * v;
        if (norm2 == 0.0) fail("alpha", "entries must not all vanish");
        const double norm = std::sqrt(norm2);
        if (std::abs(norm - 1.0) > 1e-6) {
          result.warnings.push_back("alpha list renormalized (2-norm was " +
                                    format_double(norm) + ")");
        }
        c.alpha.kind = AlphaSpec::Kind::explicit_list;
        c.alpha.values.resize(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) c.alpha.values[i] = values[i] / norm;
      }
    }
  }

  if (const std::string v = take("electron_zeeman_tau"); !v.empty()) {
    c.electron_zeeman = parse_double("electron_zeeman_tau", v) / c.tau;
  }
  if (const std::string v = take("electron_zeeman"); !v.empty()) {
    c.electron_zeeman = parse_double("electron_zeeman", v);
  }
  if (const std::string v = take("nuclear_zeeman_tau"); !v.empty()) {
    c.nuclear_zeeman = parse_double("nuclear_zeeman_tau", v) / c.tau;
  }
  if (const std::string v = take("nuclear_zeeman"); !v.empty()) {
    c.nuclear_zeeman = parse_double("nuclear_zeeman", v);
  }

  if (const std::string v = take("hyperfine"); !v.empty()) {
    if (v == "full") c.flip_flop_only = false;
    else if (v == "flipflop") c.flip_flop_only = true;
    else fail("hyperfine", "expected full|flipflop, got '" + v + "'");
  }

  const std::string hnuc = take("hnuc");
  const std::string b_tau = take("b_tau");
  const std::string b_energy = take("b");
  const std::string b_matrix_tau = take("b_matrix_tau");
  const std::string b_matrix = take("b_matrix");
  const std::string hnuc_file = take("hnuc_file");
  if (hnuc.empty() || hnuc == "none") {
    if (!b_tau.empty() || !b_energy.empty() || !b_matrix_tau.empty() || !b_matrix.empty()) {
      fail("hnuc", "dipolar couplings given but hnuc is not 'dipolar'");
    }
    if (!hnuc_file.empty()) fail("hnuc", "hnuc_file given but hnuc is not 'custom-file'");
    c.hnuc.kind = HNucConfig::Kind::none;
  } else if (hnuc == "dipolar") {
    c.hnuc.kind = HNucConfig::Kind::dipolar;
    if (!b_tau.empty() && !b_energy.empty()) fail("b_tau", "conflicts with b");
    if (!b_matrix_tau.empty() && !b_matrix.empty()) fail("b_matrix_tau", "conflicts with b_matrix");
    if ((!b_tau.empty() || !b_energy.empty()) && (!b_matrix_tau.empty() || !b_matrix.empty())) {
      fail("b", "scalar and matrix dipolar couplings conflict");
    }
    if (!b_tau.empty()) c.hnuc.b = parse_double("b_tau", b_tau) / c.tau;
    if (!b_energy.empty()) c.hnuc.b = parse_double("b", b_energy);
    if (!b_matrix_tau.empty()) {
      c.hnuc.b_matrix = parse_list("b_matrix_tau", b_matrix_tau);
      for (double& v : c.hnuc.b_matrix) v /= c.tau;
    }
    if (!b_matrix.empty()) c.hnuc.b_matrix = parse_list("b_matrix", b_matrix);
    if (b_tau.empty() && b_energy.empty() && b_matrix_tau.empty() && b_matrix.empty()) {
      fail("hnuc", "dipolar requires b_tau, b, b_matrix_tau or b_matrix");
    }
  } else if (hnuc == "custom-file") {
    c.hnuc.kind = HNucConfig::Kind::custom_file;
    c.hnuc.file = hnuc_file;
  } else {
    fail("hnuc", "expected none|dipolar|custom-file, got '" + hnuc + "'");
  }

  if (const std::string v = take("state"); !v.empty()) {
    if (v == "even") c.state = InitialState::even;
    else if (v == "uneven") c.state = InitialState::uneven;
    else fail("state", "expected even|uneven, got '" + v + "'");
  }
  if (const std::string v = take("M_max"); !v.empty()) {
    c.M_max = static_cast<int>(parse_int("M_max", v));
  }
  if (const std::string v = take("theta"); !v.empty()) c.theta = parse_double("theta", v);
  if (const std::string v = take("Vbar"); !v.empty()) c.Vbar = parse_double("Vbar", v);
  if (const std::string v = take("seed"); !v.empty()) {
    c.seed = static_cast<std::uint64_t>(parse_int("seed", v));
  }
  if (const std::string v = take("max_attempts"); !v.empty()) {
    c.max_attempts = static_cast<int>(parse_int("max_attempts", v));
  }
  if (const std::string v = take("target_streak"); !v.empty()) {
    c.target_streak = static_cast<int>(parse_int("target_streak", v));
  }
  if (const std::string v = take("on_failure"); !v.empty()) {
    if (v == "carry") c.reset_on_failure = false;
    else if (v == "reset") c.reset_on_failure = true;
    else fail("on_failure", "expected carry|reset, got '" + v + "'");
  }
  if (const std::string v = take("dimension_cap"); !v.empty()) {
    c.dimension_cap = static_cast<int>(parse_int("dimension_cap", v));
  }
  if (const std::string v = take("threads"); !v.empty()) {
    c.threads = static_cast<int>(parse_int("threads", v));
  }
  if (const std::string v = take("out"); !v.empty()) c.out = v;
  if (const std::string v = take("format"); !v.empty()) {
    if (v == "csv") c.format = OutputFormat::csv;
    else if (v == "json") c.format = OutputFormat::json;
    else fail("format", "expected csv|json, got '" + v + "'");
  }

  if (!kv.empty()) {
    throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");
  }
  validate_config(c);
  return result;
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream out;
  out << "mode = " << mode_name(c.mode) << "\n";
  out << "K = " << c.K << "\n";
  out << "a = " << format_double(c.a) << "\n";
  out << "tau = " << format_double(c.tau) << "\n";
  out << "A = " << format_double(c.hyperfine_A) << "\n";
  switch (c.alpha.kind) {
    case AlphaSpec::Kind::uniform:
      out << "alpha = uniform\n";
      break;
    case AlphaSpec::Kind::exponential_envelope:
      out << "alpha = exponential:" << format_double(c.alpha.decay) << "\n";
      break;
    case AlphaSpec::Kind::explicit_list: {
      out << "alpha = [";
      for (std::size_t i = 0; i < c.alpha.values.size(); ++i) {
        out << (i ? ", " : "") << format_double(c.alpha.values[i]);
      }
      out << "]\n";
      break;
    }
  }
  out << "electron_zeeman = " << format_double(c.electron_zeeman) << "\n";
  out << "nuclear_zeeman = " << format_double(c.nuclear_zeeman) << "\n";
  out << "hyperfine = " << (c.flip_flop_only ? "flipflop" : "full") << "\n";
  switch (c.hnuc.kind) {
    case HNucConfig::Kind::none:
      out << "hnuc = none\n";
      break;
    case HNucConfig::Kind::dipolar:
      out << "hnuc = dipolar\n";
      if (c.hnuc.b_matrix.empty()) {
        out << "b = " << format_double(c.hnuc.b) << "\n";
      } else {
        out << "b_matrix = [";
        for (std::size_t i = 0; i < c.hnuc.b_matrix.size(); ++i) {
          out << (i ? ", " : "") << format_double(c.hnuc.b_matrix[i]);
        }
        out << "]\n";
      }
      break;
    case HNucConfig::Kind::custom_file:
      out << "hnuc = custom-file\n";
      out << "hnuc_file = " << c.hnuc.file << "\n";
      break;
  }
  out << "state = " << (c.state == InitialState::uneven ? "uneven" : "even") << "\n";
  out << "M_max = " << c.M_max << "\n";
  out << "theta = " << format_double(c.theta) << "\n";
  out << "Vbar = " << format_double(c.Vbar) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "max_attempts = " << c.max_attempts << "\n";
  out << "target_streak = " << c.target_streak << "\n";
  out << "on_failure = " << (c.reset_on_failure ? "reset" : "carry") << "\n";
  out << "dimension_cap = " << c.dimension_cap << "\n";
  out << "threads = " << c.threads << "\n";
  out << "out = " << c.out << "\n";
  out << "format = " << (c.format == OutputFormat::json ? "json" : "csv") << "\n";
  return out.str();
}

}  // namespace nucpol
