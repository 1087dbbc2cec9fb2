#include "srcimg/runner.hpp"

#include <Eigen/Core>
#include <chrono>
#include <filesystem>
#include <memory>
#include <sstream>

#include "srcimg/errors.hpp"
#include "srcimg/io.hpp"

namespace srcimg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

NoiseModel noise_model(const ExperimentConfig& cfg, std::uint64_t seed) {
    NoiseModel m;
    m.delta = cfg.delta;
    m.systematic = cfg.systematic;
    m.seed = seed;
    return m;
}

std::string verdict_name(EdgeVerdict v) {
    switch (v) {
        case EdgeVerdict::Accepted: return "accepted";
        case EdgeVerdict::Rejected: return "rejected";
        case EdgeVerdict::Undecided: return "undecided";
    }
    return "?";
}

std::string flag_name(ValueFlag f) {
    switch (f) {
        case ValueFlag::Signed: return "signed";
        case ValueFlag::MagnitudeOnly: return "magnitude_only";
        case ValueFlag::Indeterminate: return "indeterminate";
    }
    return "?";
}

json vec(Vec2 v) { return json::array({v.x, v.y}); }

// FNV-1a over the file bytes; only used to make the manifest self-checking.
std::string fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

class Bundle {
public:
    explicit Bundle(std::string dir) : dir_(std::move(dir)) {}

    void text(const std::string& rel, std::string content) { files_.emplace_back(rel, std::move(content)); }
    void bytes(const std::string& rel, const std::vector<std::uint8_t>& b) {
        files_.emplace_back(rel, std::string(b.begin(), b.end()));
    }

    json listing() const {
        json a = json::array();
        for (const auto& [rel, content] : files_)
            a.push_back({{"path", rel}, {"bytes", content.size()}, {"fnv1a64", fnv1a(content)}});
        return a;
    }

    // All writes happen here, after the computation.
    std::vector<std::string> flush() const {
        std::vector<std::string> names;
        for (const auto& [rel, content] : files_) {
            const fs::path p = fs::path(dir_) / rel;
            std::error_code ec;
            fs::create_directories(p.parent_path(), ec);
            if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
            io::write_text(p.string(), content);
            names.push_back(rel);
        }
        return names;
    }

private:
    std::string dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

json field_meta_json(const IndicatorField& f) {
    json d = json::object();
    for (const auto& [k, v] : f.meta.diagnostics) d[k] = v;
    json n = json::object();
    for (const auto& [k, v] : f.meta.notes) n[k] = v;
    return {{"kind", to_string(f.kind)}, {"diagnostics", d}, {"notes", n}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

MeasurementSet simulate(const ExperimentConfig& cfg, QuadratureStats* stats) {
    const MeasurementSet clean =
        synthesize_far_field(cfg.scene, cfg.observation_set(), WaveBand(cfg.Lambda), cfg.quadrature, stats);
    return apply_noise(clean, noise_model(cfg, cfg.seed));
}

MeasurementSet recovery_input(const ExperimentConfig& cfg, const MeasurementSet& ms) {
    const double mu = cfg.mu_value();
    if (cfg.correct_recovery && mu != 0.0) return subtract_mu(ms, mu, cfg.mu_mode);
    return ms;
}

MeasurementOracle simulation_oracle(const ExperimentConfig& cfg) {
    auto calls = std::make_shared<std::uint64_t>(0);
    return [cfg, calls](const ObservationSet& obs, const WaveBand& band) {
        const std::uint64_t n = ++*calls;
        const MeasurementSet clean = synthesize_far_field(cfg.scene, obs, band, cfg.quadrature);
        const MeasurementSet noisy = apply_noise(clean, noise_model(cfg, cfg.seed + 0x9E3779B97F4A7C15ull * n));
        return recovery_input(cfg, noisy);
    };
}

std::vector<IndicatorField> compute_indicators(const ExperimentConfig& cfg, const MeasurementSet& ms) {
    std::vector<IndicatorField> out;
    std::optional<IndicatorField> iplus;
    std::optional<ModifiedFields> modified;
    auto get_plus = [&]() -> const IndicatorField& {
        if (!iplus) iplus = eval_I_plus(ms, cfg.grid, cfg.indicator_options);
        return *iplus;
    };
    auto get_modified = [&]() -> const ModifiedFields& {
        if (!modified) modified = eval_modified(ms, cfg.grid, cfg.mu_value(), cfg.mu_mode, cfg.indicator_options);
        return *modified;
    };
    for (IndicatorKind k : cfg.indicators) {
        switch (k) {
            case IndicatorKind::Iminus: out.push_back(eval_I_minus(ms, cfg.grid, cfg.indicator_options)); break;
            case IndicatorKind::IminusProcessed:
                out.push_back(eval_I_minus_processed(ms, cfg.grid, cfg.indicator_options));
                break;
            case IndicatorKind::Iplus: out.push_back(get_plus()); break;
            case IndicatorKind::ALHS: out.push_back(eval_I_alhs(ms, cfg.grid, cfg.indicator_options)); break;
            case IndicatorKind::IminusM: out.push_back(get_modified().minus); break;
            case IndicatorKind::IplusM: out.push_back(get_modified().plus); break;
            case IndicatorKind::Iepsilon: out.push_back(eval_I_epsilon(cfg.scene, get_plus(), cfg.epsilon)); break;
        }
        auto& f = out.back();
        f.meta.L = static_cast<int>(ms.obs.directions.size());
        f.meta.Lambda = ms.band.Lambda;
        f.meta.gamma = ms.obs.gamma;
        f.meta.delta = cfg.delta;
        f.meta.seed = cfg.seed;
    }
    return out;
}

ReconstructionReport run_recovery(const ExperimentConfig& cfg, const MeasurementSet& ms,
                                  const MeasurementOracle* oracle) {
    RecoverOptions ro = cfg.recover_options;
    ro.grid = cfg.grid;
    const MeasurementOracle* o = cfg.identify_edges ? oracle : nullptr;
    auto rep = reconstruct(recovery_input(cfg, ms), ro, o, cfg.edge_options);
    if (!cfg.identify_edges)
        for (auto& e : rep.edges) e.reason = "edge identification disabled in the config";
    return rep;
}

json report_to_json(const ReconstructionReport& r, const ExperimentConfig& cfg) {
    json j;
    json lines = json::array();
    for (const auto& l : r.lines)
        lines.push_back({{"dir", l.dir},
                         {"xhat", vec(l.xhat)},
                         {"s0", l.s0},
                         {"class", l.cls == JumpClass::Finite ? "finite" : "blowup"},
                         {"magnitude", l.magnitude}});
    j["lines"] = lines;
    json corners = json::array();
    for (const auto& c : r.corners) corners.push_back({{"p", vec(c.p)}, {"votes", c.votes}});
    j["corners"] = corners;
    j["quorum"] = r.quorum;
    json circles = json::array();
    for (const auto& c : r.circles)
        circles.push_back({{"center", vec(c.center)}, {"radius", c.radius}, {"support", c.support}});
    j["circles"] = circles;
    json ann = json::array();
    for (const auto& a : r.annuluses) ann.push_back({{"center", vec(a.center)}, {"r", a.r}, {"R", a.R}});
    j["annuluses"] = ann;
    json edges = json::array();
    for (const auto& e : r.edges)
        edges.push_back({{"a", e.a},
                         {"b", e.b},
                         {"verdict", verdict_name(e.verdict)},
                         {"reason", e.reason},
                         {"measured", e.measured},
                         {"threshold", e.threshold},
                         {"test_angle", e.test_angle},
                         {"test_lambda", e.test_lambda}});
    j["edges"] = edges;
    json values = json::array();
    for (const auto& v : r.corner_values)
        values.push_back({{"corner", v.corner},
                          {"re", v.value.real()},
                          {"im", v.value.imag()},
                          {"flag", flag_name(v.flag)},
                          {"meaning", v.flag == ValueFlag::Indeterminate ? "raw jump of I' (no incident edges)" : "f at corner"}});
    j["corner_values"] = values;
    j["warnings"] = r.warnings;

    const auto& o = cfg.recover_options;
    j["tolerances"] = {{"estimator", o.estimator == LineEstimator::Atoms ? "atoms" : "peaks"},
                       {"tau_rel", o.detect.tau_rel},
                       {"window", o.detect.window},
                       {"g_min", o.detect.g_min},
                       {"class_window", o.detect.class_window},
                       {"atom_tau", o.atoms.tau},
                       {"max_atoms", o.atoms.max_atoms},
                       {"atom_fine", o.atoms.fine},
                       {"atom_span", o.atoms.span},
                       {"tangent_exclusion", o.tangent_exclusion},
                       {"eps_d", o.eps_d},
                       {"rho", o.rho},
                       {"eps_r", o.eps_r},
                       {"eps_c", o.eps_c},
                       {"min_support", o.min_support},
                       {"peel", o.peel_annuluses},
                       {"edge_lambda", cfg.edge_options.lambda},
                       {"edge_lambda_cap", cfg.edge_options.lambda_cap},
                       {"edge_min_sep_steps", cfg.edge_options.min_sep_steps},
                       {"edge_budget", cfg.edge_options.budget}};
    j["seeds"] = {{"noise", cfg.seed}, {"edge_directions", cfg.edge_options.seed}};
    j["mu_corrected"] = cfg.correct_recovery && cfg.mu_value() != 0.0;
    return j;
}

std::string profile_csv(const MeasurementSet& ms, size_t l) {
    const Profile p = profile_from_far_field(ms, l, SGrid::make(ms.band.kmax()));
    std::ostringstream os;
    os << "s,re_I,im_I,abs_deriv\n";
    for (size_t j = 0; j < p.s.size(); ++j)
        os << io::fmt17(p.s[j]) << ',' << io::fmt17(p.I[j].real()) << ',' << io::fmt17(p.I[j].imag()) << ','
           << io::fmt17(p.abs_deriv[j]) << '\n';
    return os.str();
}

RunSummary run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, Stage stage,
                          const MeasurementSet* measured) {
    using clock = std::chrono::steady_clock;
    RunSummary sum;
    Bundle b(out_dir);
    json manifest;
    manifest["software"] = {{"name", "srcimg"},
                            {"version", kVersion},
                            {"compiler", __VERSION__},
                            {"cxx_standard", static_cast<long>(__cplusplus)},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    manifest["config"] = config_to_json(cfg);
    manifest["config"].erase("out");  // bundles written to different places stay identical
    manifest["stage"] = stage == Stage::Synthesize ? "synthesize"
                        : stage == Stage::Indicate ? "indicate"
                        : stage == Stage::Recover  ? "recover"
                                                   : "run";

    auto t0 = clock::now();
    MeasurementSet ms;
    if (measured) {
        ms = *measured;
        manifest["data"] = {{"source", "measured"}};
    } else {
        QuadratureStats stats;
        ms = simulate(cfg, &stats);
        manifest["data"] = {{"source", "simulated"},
                            {"quadrature_nodes", stats.nodes},
                            {"boundary_cells", stats.boundary_cells},
                            {"warnings", stats.warnings}};
        b.text("measurements.csv", measurements_csv_text(ms));
    }
    json dirs = json::array();
    for (auto d : ms.obs.directions) dirs.push_back(vec(d));
    manifest["directions"] = dirs;
    manifest["wavenumbers"] = {{"k1", ms.band.k(0)}, {"dk", ms.band.dk()}, {"kmax", ms.band.kmax()}};
    sum.seconds["synthesize"] = seconds_since(t0);

    if (stage == Stage::Run && cfg.profiles) {
        t0 = clock::now();
        char name[32];
        for (size_t l = 0; l < ms.obs.directions.size(); ++l) {
            std::snprintf(name, sizeof name, "profiles/dir_%03zu.csv", l);
            b.text(name, profile_csv(ms, l));
        }
        sum.seconds["profiles"] = seconds_since(t0);
    }

    if (stage == Stage::Indicate || stage == Stage::Run) {
        t0 = clock::now();
        json fields = json::array();
        for (const auto& f : compute_indicators(cfg, ms)) {
            const std::string base = "fields/" + to_string(f.kind);
            b.text(base + ".csv", io::matrix_csv_text(f.values, f.grid.P, f.grid.Q));
            b.bytes(base + ".pgm", io::encode_pgm(f.values, f.grid.P, f.grid.Q));
            fields.push_back(field_meta_json(f));
        }
        manifest["fields"] = fields;
        sum.seconds["indicators"] = seconds_since(t0);
    }

    if ((stage == Stage::Recover || stage == Stage::Run) && cfg.recover) {
        t0 = clock::now();
        std::optional<MeasurementOracle> oracle;
        if (!measured) oracle = simulation_oracle(cfg);
        sum.report = run_recovery(cfg, ms, oracle ? &*oracle : nullptr);
        json rep = report_to_json(*sum.report, cfg);
        rep["oracle"] = measured ? "none (recorded data)" : "simulation";
        b.text("report.json", rep.dump(2) + "\n");
        sum.seconds["recover"] = seconds_since(t0);
    }

    manifest["files"] = b.listing();
    b.text("manifest.json", manifest.dump(2) + "\n");
    sum.files = b.flush();

    json timing = json::object();
    for (const auto& [k, v] : sum.seconds) timing[k] = v;
    io::write_text((fs::path(out_dir) / "timing.json").string(), timing.dump(2) + "\n");
    return sum;
}

}  // namespace srcimg
