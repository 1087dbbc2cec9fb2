// Acceptance run: one PASS/FAIL line per criterion, with the measured numbers.
// Usage: acceptance [criterion numbers...]   (all ten when none are given)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

#include "srcimg/config.hpp"
#include "srcimg/indicators.hpp"
#include "srcimg/profile.hpp"
#include "srcimg/recover.hpp"
#include "srcimg/runner.hpp"

using namespace srcimg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    const auto mid = v.begin() + static_cast<long>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

MeasurementSet noisy(const MeasurementSet& clean, const ExperimentConfig& cfg, std::uint64_t seed) {
    return apply_noise(clean, {cfg.delta, cfg.systematic, seed});
}

double nearest(const std::vector<Corner>& found, Vec2 p) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : found) d = std::min(d, norm(c.p - p));
    return d;
}

Outcome forward_oracle() {
    const Clock clock;
    SourceScene disk{{{std::make_shared<Annulus>(Vec2{0, 0}, 0.0, 1.0), Amplitude::constant(1.0)}}};
    const auto obs = ObservationSet::make(4);
    const WaveBand band(40);  // k_m = 0.5 .. 40
    QuadratureOptions q;
    q.resolution = 1600;
    const auto ms = synthesize_far_field(disk, obs, band, q);
    double worst = 0, at = 0;
    for (size_t l = 0; l < obs.directions.size(); ++l)
        for (Sign sg : {Sign::Plus, Sign::Minus}) {
            const Vec2 x = sg == Sign::Plus ? obs.directions[l] : obs.directions[l] * -1.0;
            for (size_t m = 0; m < ms.M(); ++m) {
                const cplx ref = disk_far_field_analytic({0, 0}, 1.0, 1.0, x, band.k(m));
                const double e = std::abs(ms.at(l, sg, m) - ref) / std::abs(ref);
                if (e > worst) {
                    worst = e;
                    at = band.k(m);
                }
            }
        }
    const double t = clock.seconds();
    return {worst <= 1e-3 && t <= 60.0,
            "max pointwise relative error " + fmt("%.2e", worst) + " (k=" + fmt("%g", at) + "), " + fmt("%.1f", t) + " s"};
}

Outcome radon_identity() {
    SourceScene disk{{{std::make_shared<Annulus>(Vec2{0, 0}, 0.0, 1.0), Amplitude::constant(1.0)}}};
    const ExperimentConfig cfg = config_from_json(json::object());
    std::vector<double> errs;
    for (int lam : {10, 20, 40}) {
        const auto ms = synthesize_far_field(disk, ObservationSet::make(1), WaveBand(lam), cfg.quadrature);
        const auto p = profile_from_far_field(ms, 0, SGrid::make(lam));
        double e = 0;
        for (size_t j = 0; j < p.s.size(); ++j)
            if (std::abs(p.s[j]) <= 0.9) {
                const double ref = 2 * std::sqrt(1 - p.s[j] * p.s[j]);
                e = std::max(e, std::abs(p.I[j] - ref) / ref);
            }
        errs.push_back(e);
    }
    const bool pass = errs[2] <= 0.05 && errs[0] > errs[1] && errs[1] > errs[2];
    return {pass, "max relative error on |s|<=0.9 at Lambda 10/20/40: " + fmt("%.4f", errs[0]) + " / " +
                      fmt("%.4f", errs[1]) + " / " + fmt("%.4f", errs[2])};
}

Outcome tangent_lines() {
    ExperimentConfig cfg = config_from_json({{"preset", "annulus"}, {"L", 1}, {"Lambda", 30}});
    const auto clean = synthesize_far_field(cfg.scene, cfg.observation_set(), WaveBand(cfg.Lambda), cfg.quadrature);
    const Vec2 x = cfg.observation_set().directions[0];
    const Circle inner{{-1, -1}, 0.5}, outer{{-1, -1}, 1.0};
    std::vector<double> truth;
    for (const auto& c : {inner, outer}) {
        const auto [lo, hi] = tangent_offsets(c, x);
        truth.push_back(lo);
        truth.push_back(hi);
    }
    const double hs = std::numbers::pi / (2.0 * clean.band.kmax());
    // worst distance from a tangent to its nearest Blowup event, and from a Blowup event to its
    // nearest tangent
    auto score = [&](const MeasurementSet& ms) {
        double worst = 0;
        std::vector<double> blow;
        for (const auto& e : detect_jumps(ms, 0))
            if (e.cls == JumpClass::Blowup) blow.push_back(e.s0);
        for (double t : truth) {
            double d = std::numeric_limits<double>::infinity();
            for (double b : blow) d = std::min(d, std::abs(b - t));
            worst = std::max(worst, d);
        }
        for (double b : blow) {
            double d = std::numeric_limits<double>::infinity();
            for (double t : truth) d = std::min(d, std::abs(b - t));
            worst = std::max(worst, d);
        }
        return worst;
    };
    const double exact = score(clean);
    cfg.delta = 0.3;
    const double at_seed = score(noisy(clean, cfg, cfg.seed));
    // The criterion is one noisy run at the configured seed; the sweep is reported alongside.
    int sweep_ok = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) sweep_ok += score(noisy(clean, cfg, seed)) <= 3 * hs;
    return {exact <= hs && at_seed <= 3 * hs,
            "noise-free worst offset " + fmt("%.2f", exact / hs) + " hs, delta=0.3 seed " + std::to_string(cfg.seed) +
                " " + fmt("%.2f", at_seed / hs) + " hs; seeds 1-5 within 3 hs: " + std::to_string(sweep_ok) + "/5"};
}

Outcome corner_recovery() {
    const Clock clock;
    ExperimentConfig cfg = config_from_json({{"preset", "lshape"}, {"L", 15}, {"Lambda", 30}, {"delta", 0.3}});
    cfg.identify_edges = false;
    const auto truth = ground_truth(cfg.scene).corners;
    const auto clean = synthesize_far_field(cfg.scene, cfg.observation_set(), WaveBand(cfg.Lambda), cfg.quadrature);
    double worst = 0;
    int spurious = 0, missed = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ms = noisy(clean, cfg, seed);
        const auto rep = run_recovery(cfg, recovery_input(cfg, ms), nullptr);
        for (auto p : truth) {
            const double d = nearest(rep.corners, p);
            worst = std::max(worst, d);
            missed += d > 0.05;
        }
        for (const auto& c : rep.corners) {
            double d = std::numeric_limits<double>::infinity();
            for (auto p : truth) d = std::min(d, norm(c.p - p));
            spurious += d > 0.1;
        }
    }
    const double t = clock.seconds();
    return {truth.size() == 6 && missed == 0 && spurious == 0 && t <= 300.0,
            "seeds 1-5: worst corner error " + fmt("%.3f", worst) + ", missed " + std::to_string(missed) +
                ", spurious " + std::to_string(spurious) + ", " + fmt("%.0f", t) + " s"};
}

Outcome annulus_assembly() {
    ExperimentConfig cfg = config_from_json({{"preset", "annulus"}, {"L", 15}, {"Lambda", 40}, {"delta", 0.3}});
    cfg.identify_edges = false;
    const auto clean = synthesize_far_field(cfg.scene, cfg.observation_set(), WaveBand(cfg.Lambda), cfg.quadrature);
    auto error = [&](std::uint64_t seed) {
        const auto rep = run_recovery(cfg, recovery_input(cfg, noisy(clean, cfg, seed)), nullptr);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : rep.annuluses)
            best = std::min(best, std::max({norm(a.center - Vec2{-1, -1}), std::abs(a.r - 0.5), std::abs(a.R - 1.0)}));
        return best;
    };
    const double at_seed = error(cfg.seed);
    int sweep_ok = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) sweep_ok += (seed == cfg.seed ? at_seed : error(seed)) <= 0.05;
    return {at_seed <= 0.05, "seed " + std::to_string(cfg.seed) + ": max(|dc|, |dr|, |dR|) = " + fmt("%.4f", at_seed) +
                                 "; seeds 1-5 within 0.05: " + std::to_string(sweep_ok) + "/5"};
}

Outcome amplitude_fidelity() {
    const Clock clock;
    ExperimentConfig cfg = config_from_json({{"preset", "kite"}, {"Lambda", 40}, {"delta", 0.0}});
    const auto& g = cfg.grid;
    std::vector<Vec2> boundary;
    for (int i = 0; i < 4000; ++i) {
        const double t = 2 * std::numbers::pi * i / 4000;
        boundary.push_back({std::cos(t) - 13 * std::sin(t) * std::sin(t) / 15, std::sin(t)});
    }
    const auto& region = *cfg.scene.components[0].region;
    std::vector<int> cls(g.size(), 0);  // 1 interior, 2 exterior, 0 within 0.2 of the boundary
    for (size_t q = 0; q < g.Q; ++q)
        for (size_t p = 0; p < g.P; ++p) {
            const Vec2 z = g.z(p, q);
            double d = std::numeric_limits<double>::infinity();
            for (auto b : boundary) d = std::min(d, norm(z - b));
            if (d >= 0.2) cls[q * g.P + p] = region.contains(z) ? 1 : 2;
        }
    std::vector<std::pair<double, double>> med;
    for (int L : {16, 64}) {
        cfg.L = L;
        const auto ms = synthesize_far_field(cfg.scene, cfg.observation_set(), WaveBand(cfg.Lambda), cfg.quadrature);
        const auto f = eval_I_plus(ms, g, cfg.indicator_options);
        std::vector<double> in, out;
        for (size_t i = 0; i < g.size(); ++i) {
            if (cls[i] == 1) in.push_back(std::abs(f.values[i] - 1.0));
            if (cls[i] == 2) out.push_back(std::abs(f.values[i]));
        }
        med.push_back({median(in), median(out)});
    }
    const auto [in16, out16] = med[0];
    const auto [in64, out64] = med[1];
    const double t = clock.seconds();
    const bool pass = in64 <= 0.15 && out64 <= 0.15 && in16 > in64 && out16 > out64 && t <= 600.0;
    return {pass, "L=64 medians interior " + fmt("%.4f", in64) + ", exterior " + fmt("%.4f", out64) + "; L=16 " +
                      fmt("%.4f", in16) + ", " + fmt("%.4f", out16) + "; " + fmt("%.0f", t) + " s"};
}

Outcome epsilon_monotone() {
    ExperimentConfig cfg = load_config_file(std::string(SRCIMG_SOURCE_DIR) + "/configs/complex.json");
    std::vector<double> frac;
    for (int L : {31, 41, 51}) {
        cfg.L = L;
        const auto ms = simulate(cfg);
        frac.push_back(fraction_of_ones(eval_I_epsilon(cfg.scene, eval_I_plus(ms, cfg.grid, cfg.indicator_options),
                                                       cfg.epsilon)));
    }
    return {frac[0] > frac[1] && frac[1] > frac[2],
            "fraction of ones at L=31/41/51: " + fmt("%.4f", frac[0]) + " / " + fmt("%.4f", frac[1]) + " / " +
                fmt("%.4f", frac[2])};
}

Outcome systematic_correction() {
    ExperimentConfig cfg = load_config_file(std::string(SRCIMG_SOURCE_DIR) + "/configs/mixed_systematic.json");
    cfg.identify_edges = false;
    const auto ms = simulate(cfg);
    const auto truth = ground_truth(cfg.scene).corners;
    auto count = [&](const ReconstructionReport& rep) {
        int found = 0;
        for (auto p : truth) found += nearest(rep.corners, p) <= 0.05;
        return found;
    };
    const int corrected = count(run_recovery(cfg, recovery_input(cfg, ms), nullptr));
    const int plain = count(run_recovery(cfg, ms, nullptr));
    const int n = static_cast<int>(truth.size());
    return {corrected == n && plain < n, "polygon corners within 0.05: mu-corrected " + std::to_string(corrected) +
                                             "/" + std::to_string(n) + ", plain " + std::to_string(plain) + "/" +
                                             std::to_string(n)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "srcimg_acceptance_determinism";
    int files = 0, differing = 0;
    for (const auto& preset : preset_names()) {
        const auto cfg = config_from_json({{"preset", preset}, {"resolution", 300}, {"grid", {{"P", 201}, {"Q", 201}}}});
        const fs::path a = root / (preset + "_a"), b = root / (preset + "_b");
        fs::remove_all(a);
        fs::remove_all(b);
        const auto sa = run_experiment(cfg, a.string());
        const auto sb = run_experiment(cfg, b.string());
        std::set<std::string> names(sa.files.begin(), sa.files.end());
        names.insert(sb.files.begin(), sb.files.end());
        for (const auto& f : names) {
            ++files;
            differing += !(fs::exists(a / f) && fs::exists(b / f) && slurp(a / f) == slurp(b / f));
        }
    }
    fs::remove_all(root);
    return {differing == 0 && files > 0, std::to_string(files) + " bundle files over " +
                                             std::to_string(preset_names().size()) + " presets, " +
                                             std::to_string(differing) + " differ"};
}

Outcome sobel_contract() {
    const ExperimentConfig cfg = config_from_json({{"preset", "lshape"}, {"L", 15}});
    const auto ms = simulate(cfg);
    const auto& g = cfg.grid;
    int violations = 0;
    for (size_t l = 0; l < ms.obs.directions.size(); ++l) {
        const auto n = sobel_normalized(eval_I_minus_directional(ms, l, g), g);
        violations += *std::max_element(n.begin(), n.end()) != 1.0;
        for (double v : n) violations += !(v >= 0.0 && v <= 1.0);
        for (size_t p = 0; p < g.P; ++p) violations += n[p] != 0.0 || n[(g.Q - 1) * g.P + p] != 0.0;
        for (size_t q = 0; q < g.Q; ++q) violations += n[q * g.P] != 0.0 || n[q * g.P + g.P - 1] != 0.0;
    }
    const auto f = eval_I_minus_processed(ms, g);
    for (double v : f.values) violations += !(v >= 0.0 && v <= 1.0);
    return {violations == 0, std::to_string(ms.obs.directions.size()) + " directions on a " + std::to_string(g.P) +
                                 "x" + std::to_string(g.Q) + " grid, " + std::to_string(violations) + " violations"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"forward oracle equivalence", forward_oracle},
        {"Radon identity", radon_identity},
        {"tangent-line recovery", tangent_lines},
        {"corner recovery", corner_recovery},
        {"annulus assembly", annulus_assembly},
        {"I+ amplitude fidelity", amplitude_fidelity},
        {"I_epsilon monotonicity", epsilon_monotone},
        {"systematic-error correction", systematic_correction},
        {"determinism", determinism},
        {"Sobel field contract", sobel_contract},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2d %s: %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
