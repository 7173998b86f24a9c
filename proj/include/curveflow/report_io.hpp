#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "curveflow/diffpoly.hpp"
#include "curveflow/flowc.hpp"
#include "curveflow/harness.hpp"
#include "curveflow/spectral.hpp"
#include "curveflow/stability.hpp"

namespace curveflow {

using Json = nlohmann::ordered_json;

/// [{"coeff": "num/den", "exps": [...]}, ...] in graded order.
Json to_json(const DiffPoly& poly);
DiffPoly diffpoly_from_json(const Json& j);

Json to_json(const CompiledFlow& flow);
Json to_json(const StabilityCertificate& cert);
Json to_json(const SpectralState& state);
SpectralState state_from_json(const Json& j);

Json to_json(const ExperimentConfig& config);
/// Unknown keys are rejected. A "flow" value ending in .flow is read as a
/// file relative to base_dir.
ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});

/// Self-contained report; `series_path` names the CSV written alongside.
Json to_json(const ExperimentReport& report, const std::string& series_path);

/// One row per sweep entry: axis values, status, fitted and predicted rates.
void write_sweep_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepEntry>& entries);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

}  // namespace curveflow
