#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "srcimg/config.hpp"

namespace srcimg {

// Far field of the configured scene with the configured noise applied.
MeasurementSet simulate(const ExperimentConfig& cfg, QuadratureStats* stats = nullptr);

// Data handed to line extraction: mu removed when correction is on and mu is known.
MeasurementSet recovery_input(const ExperimentConfig& cfg, const MeasurementSet& ms);

// Re-synthesizes the configured scene at requested directions with fresh noise; calls are
// numbered so the draws only depend on the call order.
MeasurementOracle simulation_oracle(const ExperimentConfig& cfg);

std::vector<IndicatorField> compute_indicators(const ExperimentConfig& cfg, const MeasurementSet& ms);

ReconstructionReport run_recovery(const ExperimentConfig& cfg, const MeasurementSet& ms,
                                  const MeasurementOracle* oracle);

nlohmann::json report_to_json(const ReconstructionReport& r, const ExperimentConfig& cfg);

std::string profile_csv(const MeasurementSet& ms, size_t l);

struct RunSummary {
    std::vector<std::string> files;  // bundle files relative to the output directory
    std::map<std::string, double> seconds;
    std::optional<ReconstructionReport> report;
};

enum class Stage { Synthesize, Indicate, Recover, Run };

// Writes the stages' artifacts plus manifest.json into out_dir. Every bundle file is a pure
// function of the config; wall times go to timing.json, which the manifest does not list.
// When measured is given the scene is not re-synthesized and no oracle is available.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, Stage stage = Stage::Run,
                          const MeasurementSet* measured = nullptr);

}  // namespace srcimg
