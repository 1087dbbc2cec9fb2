#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "doctest.h"
#include "srcimg/config.hpp"
#include "srcimg/errors.hpp"
#include "srcimg/io.hpp"
#include "srcimg/runner.hpp"

using namespace srcimg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("srcimg_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// A run small enough for unit tests.
json tiny() {
    return json{{"L", 3},
                {"Lambda", 6},
                {"resolution", 120},
                {"grid", {{"P", 21}, {"Q", 21}}},
                {"indicators", {"Iminus", "Iplus"}},
                {"recovery", {{"edges", false}}}};
}

std::string config_error_location(const json& doc) {
    try {
        config_from_json(doc);
    } catch (const ConfigError& e) {
        return e.location();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("empty document gives the defaults") {
    const auto cfg = config_from_json(json::object());
    CHECK(cfg.grid.xlo == -3.0);
    CHECK(cfg.grid.xhi == 3.0);
    CHECK(cfg.grid.ylo == -3.0);
    CHECK(cfg.grid.yhi == 3.0);
    CHECK(cfg.grid.P == 601);
    CHECK(cfg.grid.Q == 601);
    CHECK(cfg.delta == 0.3);
    CHECK(cfg.gamma == 2.0);
    CHECK(cfg.epsilon == 1.5);
    CHECK(cfg.observation_set().directions.size() == static_cast<size_t>(cfg.L));
    CHECK(config_from_json(json()).L == cfg.L);
}

TEST_CASE("presets carry their own L and Lambda, explicit keys win") {
    const auto kite = config_from_json({{"preset", "kite"}});
    CHECK(kite.L == 21);
    CHECK(kite.Lambda == 30);
    const auto mixed = config_from_json({{"preset", "mixed"}});
    CHECK(mixed.L == 15);
    CHECK(mixed.Lambda == 20);
    const auto g = config_from_json({{"preset", "annulus"}, {"gamma", 0.3}, {"L", 9}});
    CHECK(g.gamma == 0.3);
    CHECK(g.L == 9);
    CHECK(g.Lambda == 30);
    for (const auto& name : preset_names()) CHECK_NOTHROW(preset_scene(name));
    CHECK_THROWS_AS(preset_scene("teapot"), ConfigError);
}

TEST_CASE("config errors name their location") {
    CHECK(config_error_location({{"Lamda", 30}}) == "/Lamda");
    CHECK(config_error_location({{"recovery", {{"rho", 0.6}, {"rh0", 1}}}}) == "/recovery/rh0");
    CHECK(config_error_location({{"gamma", 2.5}}) == "/gamma");
    CHECK(config_error_location({{"gamma", 0.0}}) == "/gamma");
    CHECK(config_error_location({{"delta", -0.1}}) == "/delta");
    CHECK(config_error_location({{"L", "many"}}) == "/L");
    CHECK(config_error_location({{"indicators", {"Iplus", "Inope"}}}).rfind("/indicators", 0) == 0);
    CHECK(config_error_location({{"scene", {{"components", {{{"region", {{"type", "disk"}, {"center", {0, 0}}, {"R", 1}, {"spin", 3}}}}}}}}})
              .find("spin") != std::string::npos);
    CHECK_THROWS_AS(load_config_text("{\"L\": "), ConfigError);
}

TEST_CASE("inline scenes and amplitudes") {
    const json doc = {{"scene",
                       {{"components",
                         {{{"region", {{"type", "polygon"}, {"vertices", {{0, 0}, {1, 0}, {0, 1}}}}},
                           {"amplitude", {{"type", "radial_affine"}, {"c", 5}}}},
                          {{"region", {{"type", "annulus"}, {"center", {-1, -1}}, {"r", 0.2}, {"R", 0.5}}},
                           {"amplitude", 2.0}}}}}}};
    const auto cfg = config_from_json(doc);
    CHECK(cfg.preset == "custom");
    REQUIRE(cfg.scene.components.size() == 2);
    CHECK(cfg.scene.components[0].region->contains({0.2, 0.2}));
    CHECK_FALSE(cfg.scene.components[1].region->contains({-1, -1}));
    CHECK(cfg.scene.components[1].region->contains({-1.35, -1}));
    const json echo = config_to_json(cfg);
    CHECK(echo.contains("scene_description"));
    CHECK(echo.at("grid").at("P") == 601);
}

TEST_CASE("PGM encoding follows the row and scaling convention") {
    std::vector<double> v(9);
    for (size_t i = 0; i < 9; ++i) v[i] = static_cast<double>(i);  // values[q*3 + p]
    const auto bytes = io::encode_pgm(v, 3, 3);
    const std::string header = "P5\n3 3\n255\n";
    REQUIRE(bytes.size() == header.size() + 9);
    CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())) == header);
    const std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<long>(header.size()), bytes.end());
    // top row is the largest y, i.e. q = 2
    CHECK(pixels == std::vector<std::uint8_t>{191, 223, 255, 95, 127, 159, 0, 31, 63});

    const auto flat = io::encode_pgm(std::vector<double>(12, 0.0), 4, 3);
    const size_t skip = std::string("P5\n4 3\n255\n").size();
    REQUIRE(flat.size() == skip + 12);
    CHECK(std::all_of(flat.begin() + static_cast<long>(skip), flat.end(), [](std::uint8_t b) { return b == 128; }));
    CHECK_THROWS_AS(io::encode_pgm({1.0, std::nan("")}, 2, 1), NumericalError);
}

TEST_CASE("CSV read-back is exact") {
    const auto dir = scratch("csv");
    std::vector<double> v;
    for (int i = 0; i < 12; ++i) v.push_back(std::sin(1.0 + i) * std::pow(10.0, i - 6) + 1.0 / 3.0);
    v[5] = -0.0;
    v[7] = 1e-300;
    io::write_matrix_csv((dir / "m.csv").string(), v, 4, 3);
    size_t P = 0, Q = 0;
    const auto back = io::read_matrix_csv((dir / "m.csv").string(), P, Q);
    CHECK(P == 4);
    CHECK(Q == 3);
    CHECK(back == v);

    const ExperimentConfig cfg = config_from_json(tiny());
    const auto ms = simulate(cfg);
    write_measurements_csv(ms, (dir / "ms.csv").string());
    const auto ms2 = read_measurements_csv((dir / "ms.csv").string(), cfg.observation_set());
    CHECK(ms2.values == ms.values);
    CHECK(ms2.band.Lambda == ms.band.Lambda);
    CHECK_THROWS_AS(io::read_text((dir / "missing.csv").string()), IoError);
    fs::remove_all(dir);
}

TEST_CASE("every setting that affects output shows up in the manifest") {
    const auto dir = scratch("manifest");
    auto manifest_of = [&](const json& doc) {
        run_experiment(config_from_json(doc), dir.string(), Stage::Synthesize);
        return slurp(dir / "manifest.json");
    };
    const std::string base = manifest_of(tiny());
    const std::vector<json> tweaks{
        {{"seed", 2}},
        {{"delta", 0.1}},
        {{"gamma", 1.5}},
        {{"resolution", 140}},
        {{"refine_depth", 2}},
        {{"systematic", {{"mu", 0.01}, {"sigma", 0.02}}}},
        {{"grid", {{"P", 23}}}},
        {{"oversample", 9}},
        {{"epsilon", 2.0}},
        {{"mu", 0.05}},
        {{"mu_mode", "real"}},
        {{"profiles", false}},
        {{"recovery", {{"rho", 0.5}}}},
        {{"recovery", {{"eps_d", 0.03}}}},
        {{"recovery", {{"eps_r", 0.04}}}},
        {{"recovery", {{"tau_rel", 0.2}}}},
        {{"recovery", {{"g_min", 1.3}}}},
        {{"recovery", {{"atom_tau", 0.2}}}},
        {{"recovery", {{"estimator", "peaks"}}}},
        {{"recovery", {{"edge_lambda_cap", 90}}}},
        {{"recovery", {{"correct", false}}}},
    };
    for (const auto& t : tweaks) {
        json doc = tiny();
        doc.merge_patch(t);
        CHECK_MESSAGE(manifest_of(doc) != base, t.dump());
    }
    CHECK(manifest_of(tiny()) == base);
    fs::remove_all(dir);
}

TEST_CASE("a run is a pure function of the config") {
    const auto a = scratch("run_a"), b = scratch("run_b");
    json doc = tiny();
    const auto sa = run_experiment(config_from_json(doc), a.string(), Stage::Run);
    const auto sb = run_experiment(config_from_json(doc), b.string(), Stage::Run);
    REQUIRE(sa.files == sb.files);
    CHECK(sa.files.size() >= 8);
    for (const auto& f : sa.files) CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    const json m = json::parse(slurp(a / "manifest.json"));
    CHECK(m.at("files").size() + 1 == sa.files.size());  // every file but the manifest itself
    CHECK_FALSE(m.at("config").contains("out"));
    fs::remove_all(a);
    fs::remove_all(b);
}
