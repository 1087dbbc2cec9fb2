// Command line front end: synthesize | indicate | recover | run | oracle.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"
#include "srcimg/config.hpp"
#include "srcimg/errors.hpp"
#include "srcimg/io.hpp"
#include "srcimg/runner.hpp"

namespace {

using namespace srcimg;

struct Common {
    std::string config_path, preset, out, measurements;
    std::vector<std::string> indicators;
    std::optional<std::uint64_t> seed;
    std::optional<int> L, Lambda;
    std::optional<double> delta, gamma;
};

void add_common(CLI::App* app, Common& c, bool with_measurements) {
    app->add_option("--config", c.config_path, "JSON experiment config");
    app->add_option("--preset", c.preset, "annulus | lshape | kite | mixed");
    app->add_option("--seed", c.seed, "noise seed");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--indicator", c.indicators, "indicator kind (repeatable)");
    app->add_option("--L", c.L, "number of observation directions");
    app->add_option("--Lambda", c.Lambda, "wavenumber band index");
    app->add_option("--delta", c.delta, "relative noise level");
    app->add_option("--gamma", c.gamma, "aperture parameter in (0, 2]");
    if (with_measurements)
        app->add_option("--measurements", c.measurements, "recorded measurements CSV instead of simulation");
}

// Command-line values override the config file; everything is validated once, on the
// merged document.
ExperimentConfig resolve(const Common& c) {
    nlohmann::json doc = nlohmann::json::object();
    if (!c.config_path.empty()) {
        try {
            doc = nlohmann::json::parse(io::read_text(c.config_path));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(c.config_path + " byte " + std::to_string(e.byte), "malformed JSON");
        }
        if (!doc.is_object()) throw ConfigError(c.config_path, "expected an object");
    }
    if (!c.preset.empty()) {
        doc.erase("scene");
        doc["preset"] = c.preset;
    }
    if (c.seed) doc["seed"] = *c.seed;
    if (!c.out.empty()) doc["out"] = c.out;
    if (!c.indicators.empty()) doc["indicators"] = c.indicators;
    if (c.L) doc["L"] = *c.L;
    if (c.Lambda) doc["Lambda"] = *c.Lambda;
    if (c.delta) doc["delta"] = *c.delta;
    if (c.gamma) doc["gamma"] = *c.gamma;
    return config_from_json(doc);
}

int run_stage(const Common& c, Stage stage) {
    const ExperimentConfig cfg = resolve(c);
    std::optional<MeasurementSet> measured;
    if (!c.measurements.empty()) {
        measured = read_measurements_csv(c.measurements, cfg.observation_set());
        if (measured->band.Lambda != cfg.Lambda)
            throw ConfigError("/Lambda", "measurements carry Lambda=" + std::to_string(measured->band.Lambda));
    }
    const RunSummary s = run_experiment(cfg, cfg.out, stage, measured ? &*measured : nullptr);
    for (const auto& f : s.files) std::cout << cfg.out << "/" << f << "\n";
    if (s.report) {
        std::cout << "corners " << s.report->corners.size() << " (quorum " << s.report->quorum << "), circles "
                  << s.report->circles.size() << ", annuluses " << s.report->annuluses.size() << "\n";
        for (const auto& w : s.report->warnings) std::cerr << "warning: " << w << "\n";
    }
    return 0;
}

int run_oracle(const Common& c, const std::string& kind, double angle, const std::vector<double>& values,
               double radius, const std::vector<double>& center) {
    const Vec2 xhat{std::cos(angle), std::sin(angle)};
    if (kind == "radon") {
        const ExperimentConfig cfg = resolve(c);
        std::cout << "s,re,im\n";
        for (double s : values) {
            const cplx v = radon_oracle(cfg.scene, xhat, s);
            std::cout << io::fmt17(s) << ',' << io::fmt17(v.real()) << ',' << io::fmt17(v.imag()) << "\n";
        }
        return 0;
    }
    if (kind == "disk") {
        if (center.size() != 2) throw ConfigError("--center", "expected two values");
        std::cout << "k,re,im\n";
        for (double k : values) {
            const cplx v = disk_far_field_analytic({center[0], center[1]}, radius, 1.0, xhat, k);
            std::cout << io::fmt17(k) << ',' << io::fmt17(v.real()) << ',' << io::fmt17(v.imag()) << "\n";
        }
        return 0;
    }
    throw ConfigError("--kind", "expected radon or disk");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Source imaging from multi-frequency far-field data"};
    app.require_subcommand(1);

    Common syn, ind, rec, run, orc;
    add_common(app.add_subcommand("synthesize", "simulate far-field measurements"), syn, false);
    add_common(app.add_subcommand("indicate", "evaluate indicator fields"), ind, true);
    add_common(app.add_subcommand("recover", "lines, corners, circles, edges and corner values"), rec, true);
    add_common(app.add_subcommand("run", "full experiment bundle"), run, false);

    auto* oracle = app.add_subcommand("oracle", "reference values for tests");
    add_common(oracle, orc, false);
    std::string kind = "radon";
    double angle = 0.0, radius = 1.0;
    std::vector<double> values, center{0.0, 0.0};
    oracle->add_option("--kind", kind, "radon (profile of the scene) or disk (analytic far field)");
    oracle->add_option("--angle", angle, "direction angle in radians");
    oracle->add_option("--at", values, "offsets s (radon) or wavenumbers k (disk)")->required();
    oracle->add_option("--radius", radius, "disk radius");
    oracle->add_option("--center", center, "disk center x y")->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto* sub = app.get_subcommands().front();
        const std::string verb = sub->get_name();
        if (verb == "synthesize") return run_stage(syn, Stage::Synthesize);
        if (verb == "indicate") return run_stage(ind, Stage::Indicate);
        if (verb == "recover") return run_stage(rec, Stage::Recover);
        if (verb == "run") return run_stage(run, Stage::Run);
        return run_oracle(orc, kind, angle, values, radius, center);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
