#pragma once

#include <string>

#include "nucpol/propagator.hpp"
#include "nucpol/protocol.hpp"

// File emission for the run records. CSV columns are a fixed contract
// (M, expected_Iz, log10_P_M) so downstream tooling can diff outputs
// directly; all formatting is locale-free and deterministic.

namespace nucpol {

// FNV-1a over the canonical config text; ties outputs to their exact inputs.
std::string fingerprint_of(const std::string& canonical_text);

std::string to_csv(const ProtocolRecord& record);
std::string to_json(const ProtocolRecord& record, const std::string& model);

std::string to_csv(const TrajectoryRecord& record);
std::string to_json(const TrajectoryRecord& record);

// Array of per-sector objects {sector_two_Iz, eigen_moduli, degenerate_count,
// threshold}.
std::string to_json(const SpectralReport& report);

// Deterministic shortest-round-trip double formatting used by every writer.
std::string format_double(double v);

}  // namespace nucpol
