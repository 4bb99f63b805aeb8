#include "nucpol/records.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace nucpol {

std::string fingerprint_of(const std::string& canonical_text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[32];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

namespace {

constexpr double kLn10 = 2.302585092994045684;

double log10_from_ln(double ln_p) { return ln_p / kLn10; }

}  // namespace

std::string to_csv(const ProtocolRecord& record) {
  std::string out = "M,expected_Iz,log10_P_M\n";
  for (const auto& p : record.series) {
    out += std::to_string(p.M);
    out += ',';
    out += format_double(p.expected_Iz);
    out += ',';
    out += format_double(log10_from_ln(p.log_P));
    out += '\n';
  }
  return out;
}

std::string to_json(const ProtocolRecord& record, const std::string& model) {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["fingerprint"] = record.fingerprint;
  nlohmann::ordered_json series = nlohmann::ordered_json::array();
  for (const auto& p : record.series) {
    series.push_back({{"M", p.M},
                      {"expected_Iz", p.expected_Iz},
                      {"log10_P_M", log10_from_ln(p.log_P)}});
  }
  j["series"] = std::move(series);
  return j.dump(2) + "\n";
}

std::string to_csv(const TrajectoryRecord& record) {
  std::string out = "attempt,outcome_up,streak\n";
  int streak = 0;
  for (std::size_t i = 0; i < record.outcomes.size(); ++i) {
    streak = record.outcomes[i] ? streak + 1 : 0;
    out += std::to_string(i + 1);
    out += ',';
    out += record.outcomes[i] ? '1' : '0';
    out += ',';
    out += std::to_string(streak);
    out += '\n';
  }
  return out;
}

std::string to_json(const TrajectoryRecord& record) {
  nlohmann::ordered_json j;
  j["seed"] = record.seed;
  j["fingerprint"] = record.fingerprint;
  j["outcomes"] = record.outcomes;
  j["restart_count"] = record.restart_count;
  j["streak_lengths"] = record.streak_lengths;
  j["final_expected_Iz"] = record.final_expected_Iz;
  j["reached_target"] = record.reached_target;
  return j.dump(2) + "\n";
}

std::string to_json(const SpectralReport& report) {
  nlohmann::ordered_json sectors = nlohmann::ordered_json::array();
  for (const auto& s : report.sectors) {
    sectors.push_back({{"sector_two_Iz", s.two_Iz},
                       {"eigen_moduli", s.moduli},
                       {"degenerate_count", s.degenerate_count},
                       {"threshold", report.threshold}});
  }
  return sectors.dump(2) + "\n";
}

}  // namespace nucpol
