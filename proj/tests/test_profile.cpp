#include <cmath>
#include <numbers>

#include "doctest.h"
#include "srcimg/errors.hpp"
#include "srcimg/profile.hpp"

using namespace srcimg;

namespace {

MeasurementSet analytic_annulus(Vec2 c, double r, double R, const ObservationSet& obs, int Lambda) {
    MeasurementSet ms(obs, WaveBand(Lambda));
    for (size_t l = 0; l < obs.directions.size(); ++l)
        for (Sign sg : {Sign::Plus, Sign::Minus}) {
            const Vec2 x = sg == Sign::Plus ? obs.directions[l] : obs.directions[l] * -1.0;
            for (size_t m = 0; m < ms.M(); ++m) {
                cplx v = disk_far_field_analytic(c, R, 1.0, x, ms.band.k(m));
                if (r > 0) v -= disk_far_field_analytic(c, r, 1.0, x, ms.band.k(m));
                ms.at(l, sg, m) = v;
            }
        }
    return ms;
}

// k^2 u(+x) = sum A e^{-iks}, k^2 u(-x) = sum B e^{iks} for one direction.
MeasurementSet atom_data(const std::vector<Atom>& atoms, int Lambda) {
    MeasurementSet ms(ObservationSet::from_directions({{1, 0}}), WaveBand(Lambda));
    for (size_t m = 0; m < ms.M(); ++m) {
        const double k = ms.band.k(m);
        cplx p, q;
        for (const auto& a : atoms) {
            p += a.A * std::exp(cplx(0, -k * a.s));
            q += a.B * std::exp(cplx(0, k * a.s));
        }
        ms.at(0, Sign::Plus, m) = p / (k * k);
        ms.at(0, Sign::Minus, m) = q / (k * k);
    }
    return ms;
}

}  // namespace

TEST_CASE("s grid and trapezoid weights") {
    const auto g = SGrid::make(30.0, 1.0);
    CHECK(g.hs == doctest::Approx(std::numbers::pi / 60));
    CHECK(g.s.front() == doctest::Approx(-g.s.back()));
    CHECK(std::abs(g.s.back()) <= 1.0);
    const auto w = trapezoid_weights(WaveBand(30));
    REQUIRE(w.size() == 60);
    CHECK(w.front() == 0.25);
    CHECK(w.back() == 0.25);
    CHECK(w[7] == 0.5);
    double sum = 0;
    for (double x : w) sum += x;
    CHECK(sum == doctest::Approx(30.0 - 0.5));  // length of [k1, kmax]
}

TEST_CASE("radon oracle of simple shapes") {
    SourceScene sq{{{std::make_shared<Polygon>(std::vector<Vec2>{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}),
                     Amplitude::constant(1.0)}}};
    CHECK(radon_oracle(sq, {1, 0}, 0.3).real() == doctest::Approx(2.0));
    CHECK(radon_oracle(sq, {1, 0}, 1.3).real() == doctest::Approx(0.0));
    const double r2 = std::sqrt(0.5);
    CHECK(radon_oracle(sq, {r2, r2}, 0.0).real() == doctest::Approx(2 * std::sqrt(2.0)));
    SourceScene disk{{{std::make_shared<Annulus>(Vec2{0, 0}, 0.0, 1.0), Amplitude::constant(2.0)}}};
    CHECK(radon_oracle(disk, {0, 1}, 0.6).real() == doctest::Approx(2 * 2 * 0.8));
}

TEST_CASE("band-limited profile of the unit disk converges to 2 sqrt(1 - s^2)") {
    double prev = 1e9;
    for (int lam : {10, 20, 40}) {
        const auto ms = analytic_annulus({0, 0}, 0, 1, ObservationSet::from_directions({{1, 0}}), lam);
        const auto p = profile_from_far_field(ms, 0, SGrid::make(lam));
        double err = 0;
        for (size_t j = 0; j < p.s.size(); ++j)
            if (std::abs(p.s[j]) <= 0.9) err = std::max(err, std::abs(p.I[j] - 2 * std::sqrt(1 - p.s[j] * p.s[j])) / 2.0);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev <= 0.05);
}

TEST_CASE("profile is linear in the data and |I^-| matches the complex profile") {
    const auto ms = analytic_annulus({0.3, -0.2}, 0.4, 0.9, ObservationSet::make(3), 20);
    MeasurementSet twice = ms;
    for (auto& v : twice.values) v *= cplx(0, 2);
    const auto g = SGrid::make(20, 2.0);
    const auto a = profile_from_far_field(ms, 1, g), b = profile_from_far_field(twice, 1, g);
    for (size_t j = 0; j < g.size(); ++j) {
        CHECK(std::abs(b.I[j] - cplx(0, 2) * a.I[j]) < 1e-12 * (1 + std::abs(a.I[j])));
        CHECK(b.abs_deriv[j] == doctest::Approx(2 * a.abs_deriv[j]));
    }
    const auto im = iminus_profile(ms, 1, g.s);
    const auto d = derivative_profile(ms, 1, g.s);
    for (size_t j = 0; j < g.size(); ++j) CHECK(d[j] == doctest::Approx(std::abs(im[j])));
}

TEST_CASE("support strip brackets the disk projection") {
    const auto ms = analytic_annulus({0.5, 0}, 0, 0.7, ObservationSet::from_directions({{1, 0}}), 30);
    const auto p = profile_from_far_field(ms, 0, SGrid::make(30));
    const auto [lo, hi] = support_strip(p);
    const double hs = std::numbers::pi / 60;
    CHECK(std::abs(lo - (-0.2)) <= 3 * hs);
    CHECK(std::abs(hi - 1.2) <= 3 * hs);
}

TEST_CASE("annulus tangents are detected as blow-up jumps") {
    const Vec2 c{-1, -1};
    const Vec2 x{std::cos(-0.7 * std::numbers::pi), std::sin(-0.7 * std::numbers::pi)};
    const auto ms = analytic_annulus(c, 0.5, 1.0, ObservationSet::from_directions({x}), 30);
    const auto ev = detect_jumps(ms, 0);
    const double hs = std::numbers::pi / 60, p = dot(x, c);
    for (double t : {p - 1.0, p - 0.5, p + 0.5, p + 1.0}) {
        bool found = false;
        for (const auto& e : ev) found |= e.cls == JumpClass::Blowup && std::abs(e.s0 - t) <= hs;
        CHECK_MESSAGE(found, "tangent at " << t);
    }
    for (const auto& e : ev) CHECK(e.cls == JumpClass::Blowup);
}

TEST_CASE("atom fit recovers well separated atoms") {
    const std::vector<Atom> truth{{-1.1, {0.8, 0.1}, {0.8, -0.1}}, {0.2, {-0.5, 0}, {-0.5, 0}}, {1.37, {1.0, 0.3}, {0.9, 0}}};
    const auto ms = atom_data(truth, 30);
    const auto got = fit_atoms(ms, 0);
    REQUIRE(got.size() == truth.size());
    for (const auto& t : truth) {
        bool hit = false;
        for (const auto& a : got)
            if (std::abs(a.s - t.s) < 1e-6) {
                hit = true;
                CHECK(std::abs(a.A - t.A) < 1e-6);
                CHECK(std::abs(a.B - t.B) < 1e-6);
            }
        CHECK_MESSAGE(hit, "atom at " << t.s);
    }
}

TEST_CASE("atom fit splits neighbouring jumps of equal sign") {
    // Offsets of an L-shaped polygon's corners seen from one direction: runs of same-sign
    // atoms about 4 hs apart merge into single correlation peaks.
    const std::vector<Atom> truth{{-0.809, {-2.1, 0}, {-2.1, 0}}, {-0.588, {-2.1, 0}, {-2.1, 0}},
                                  {-0.221, {2.1, 0}, {2.1, 0}},   {0.0, {2.1, 0}, {2.1, 0}},
                                  {0.221, {2.1, 0}, {2.1, 0}},    {1.397, {-2.1, 0}, {-2.1, 0}}};
    const auto ms = atom_data(truth, 30);
    const auto got = fit_atoms(ms, 0);
    REQUIRE(got.size() == truth.size());
    for (size_t j = 0; j < truth.size(); ++j) {
        CHECK(got[j].s == doctest::Approx(truth[j].s).epsilon(1e-6));
        CHECK(std::abs(got[j].A - truth[j].A) < 1e-6);
    }
}

TEST_CASE("fit_amplitudes is exact for exact atoms") {
    const std::vector<Atom> truth{{-0.4, {1, 2}, {3, -1}}, {0.9, {-2, 0.5}, {0.25, 0}}};
    const auto ms = atom_data(truth, 20);
    std::vector<double> k;
    std::vector<cplx> yp, ym;
    for (size_t m = 0; m < ms.M(); ++m) {
        const double km = ms.band.k(m);
        k.push_back(km);
        yp.push_back(km * km * ms.at(0, Sign::Plus, m));
        ym.push_back(km * km * ms.at(0, Sign::Minus, m));
    }
    std::vector<Atom> guess{{-0.4, {}, {}}, {0.9, {}, {}}};
    CHECK(fit_amplitudes(k, yp, ym, guess) < 1e-18);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(std::abs(guess[i].A - truth[i].A) < 1e-10);
        CHECK(std::abs(guess[i].B - truth[i].B) < 1e-10);
    }
}

TEST_CASE("zero data gives no jumps and no atoms") {
    MeasurementSet ms(ObservationSet::from_directions({{0, 1}}), WaveBand(20));
    CHECK(detect_jumps(ms, 0).empty());
    CHECK(fit_atoms(ms, 0).empty());
    CHECK_THROWS_AS(detect_jumps(MeasurementSet(ObservationSet::from_directions({{0, 1}}), WaveBand(1)), 0),
                    ArgumentError);
}
