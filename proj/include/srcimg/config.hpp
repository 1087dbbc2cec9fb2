#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "srcimg/forward.hpp"
#include "srcimg/indicators.hpp"
#include "srcimg/recover.hpp"

namespace srcimg {

struct ExperimentConfig {
    std::string preset = "lshape";  // "custom" for an inline scene
    nlohmann::json scene_doc;       // inline scene as given (null for presets)
    std::optional<nlohmann::json> amplitude_override;
    SourceScene scene;

    int L = 25;
    double gamma = 2.0;
    int Lambda = 30;
    std::vector<Vec2> directions;  // explicit directions replace (L, gamma) when non-empty

    double delta = 0.3;
    std::optional<Systematic> systematic;
    std::uint64_t seed = 1;

    QuadratureOptions quadrature;
    SamplingGrid grid;
    std::vector<IndicatorKind> indicators{IndicatorKind::Iminus, IndicatorKind::IminusProcessed,
                                          IndicatorKind::Iplus};
    IndicatorOptions indicator_options;
    double epsilon = 1.5;
    std::optional<double> mu;  // prior mean for the modified indicators; defaults to systematic.mu
    MuMode mu_mode = MuMode::Both;

    bool recover = true;
    bool correct_recovery = true;  // subtract mu before line extraction when mu is known
    RecoverOptions recover_options;
    bool identify_edges = true;
    EdgeOptions edge_options;

    bool profiles = true;
    std::string out = "out";

    ObservationSet observation_set() const;
    double mu_value() const;  // 0 when neither mu nor a systematic term is configured
};

// Preset names: annulus, lshape, kite, mixed.
SourceScene preset_scene(const std::string& name);
std::vector<std::string> preset_names();

SourceScene scene_from_json(const nlohmann::json& doc, const std::string& where = "scene");

// Throws ConfigError with a JSON-pointer style location for unknown keys, wrong types and
// invalid values.
ExperimentConfig load_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& doc);

// Fully resolved configuration, every default spelled out.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace srcimg
