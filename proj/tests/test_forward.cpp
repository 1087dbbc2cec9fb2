#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "srcimg/bessel.hpp"
#include "srcimg/errors.hpp"
#include "srcimg/forward.hpp"
#include "srcimg/io.hpp"

using namespace srcimg;

namespace {

RegionPtr disk(Vec2 c, double R) { return std::make_shared<Annulus>(c, 0.0, R); }
RegionPtr square(double x0, double y0, double a) {
    return std::make_shared<Polygon>(std::vector<Vec2>{{x0, y0}, {x0 + a, y0}, {x0 + a, y0 + a}, {x0, y0 + a}});
}

double max_rel(const MeasurementSet& a, const MeasurementSet& b) {
    double num = 0, den = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        num = std::max(num, std::abs(a.values[i] - b.values[i]));
        den = std::max(den, std::abs(b.values[i]));
    }
    return num / den;
}

}  // namespace

TEST_CASE("bessel J1 against the standard library") {
    for (double x = 0.0; x <= 60.0; x += 0.0137)
        CHECK(std::abs(bessel_j1(x) - std::cyl_bessel_j(1.0, x)) < 1e-10);
    CHECK(bessel_j1(1.0) == doctest::Approx(0.4400505857449335).epsilon(1e-12));
    CHECK(bessel_j1(-2.5) == doctest::Approx(-std::cyl_bessel_j(1.0, 2.5)).epsilon(1e-12));
    // continuity across the series/asymptotic switch
    CHECK(std::abs(bessel_j1(12.0 - 1e-12) - bessel_j1(12.0 + 1e-12)) < 1e-10);
}

TEST_CASE("observation set and wave band") {
    auto o = ObservationSet::make(25);
    REQUIRE(o.directions.size() == 25);
    CHECK(std::atan2(o.directions[0].y, o.directions[0].x) == doctest::Approx(-0.7 * std::numbers::pi));
    for (size_t i = 0; i < 25; ++i)
        for (size_t j = 0; j < i; ++j) CHECK(std::abs(cross(o.directions[i], o.directions[j])) > 1e-6);
    WaveBand b(30);
    CHECK(b.size() == 60);
    CHECK(b.k(0) == 0.5);
    CHECK(b.k(59) == 30.0);
    CHECK_THROWS_AS(ObservationSet::make(0), ArgumentError);
    CHECK_THROWS_AS(ObservationSet::make(5, 2.5), ArgumentError);
    CHECK_THROWS_AS(ObservationSet::from_directions({{1, 0}, {-1, 0}}), ArgumentError);
}

TEST_CASE("disk_far_field_analytic") {
    // 2 pi J1(1) = 2.76491937...; the commonly quoted 2.76514 is off in the fourth digit
    const double ref = 2 * std::numbers::pi * std::cyl_bessel_j(1.0, 1.0);
    CHECK(std::abs(disk_far_field_analytic({0, 0}, 1, 1.0, {1, 0}, 1.0) - cplx(ref)) < 1e-12);
    CHECK(ref == doctest::Approx(2.76514).epsilon(1e-4));
    CHECK(disk_far_field_analytic({0, 0}, 1, 1.0, {1, 0}, 1e-9).real() == doctest::Approx(std::numbers::pi));
    cplx a = disk_far_field_analytic({0, 0}, 1, 1.0, {1, 0}, std::numbers::pi);
    cplx b = disk_far_field_analytic({1, 0}, 1, 1.0, {1, 0}, std::numbers::pi);
    CHECK(std::abs(b + a) < 1e-12);
    CHECK_THROWS_AS(disk_far_field_analytic({0, 0}, 1, 1.0, {1, 0}, 0.0), ArgumentError);
}

TEST_CASE("empty scene gives zero data") {
    auto ms = synthesize_far_field(SourceScene{}, ObservationSet::make(3), WaveBand(5));
    for (auto v : ms.values) CHECK(v == cplx(0.0));
}

TEST_CASE("quadrature converges to the disk oracle") {
    SourceScene sc{{{disk({0.3, -0.2}, 1.0), Amplitude::constant(1.0)}}};
    auto obs = ObservationSet::make(4);
    WaveBand band(10);
    double prev = 1e9;
    for (int res : {100, 200, 400}) {
        QuadratureOptions opt;
        opt.resolution = res;
        auto ms = synthesize_far_field(sc, obs, band, opt);
        MeasurementSet ref(obs, band);
        for (size_t l = 0; l < 4; ++l)
            for (size_t m = 0; m < band.size(); ++m) {
                ref.at(l, Sign::Plus, m) = disk_far_field_analytic({0.3, -0.2}, 1, 1.0, obs.directions[l], band.k(m));
                ref.at(l, Sign::Minus, m) = disk_far_field_analytic({0.3, -0.2}, 1, 1.0, -obs.directions[l], band.k(m));
            }
        double e = max_rel(ms, ref);
        CHECK(e < prev);
        prev = e;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("conjugate symmetry, linearity and translation") {
    auto A = disk({-1, -1}, 1.0);
    auto B = make_intersection({square(0, 0, 1.5), make_complement(square(0, 0, 0.75))});
    auto obs = ObservationSet::make(5);
    WaveBand band(8);
    QuadratureOptions opt;
    opt.resolution = 256;
    SourceScene both{{{A, Amplitude::constant(1.0)}, {B, Amplitude::radial_exponential(-0.25)}}};
    auto u = synthesize_far_field(both, obs, band, opt);
    for (size_t l = 0; l < 5; ++l)
        for (size_t m = 0; m < band.size(); ++m)
            CHECK(std::abs(u.at(l, Sign::Minus, m) - std::conj(u.at(l, Sign::Plus, m))) <=
                  1e-12 * std::abs(u.at(l, Sign::Plus, m)) + 1e-14);

    auto ua = synthesize_far_field(SourceScene{{{A, Amplitude::constant(1.0)}}}, obs, band, opt);
    auto ub = synthesize_far_field(SourceScene{{{B, Amplitude::radial_exponential(-0.25)}}}, obs, band, opt);
    for (size_t i = 0; i < u.values.size(); ++i)
        CHECK(std::abs(u.values[i] - (ua.values[i] + ub.values[i])) <= 1e-10 * std::abs(u.values[i]) + 1e-14);

    const Vec2 t{0.37, -0.21};
    auto moved = std::make_shared<Polygon>(std::vector<Vec2>{{0 + t.x, 0 + t.y}, {1.5 + t.x, 0 + t.y},
                                                             {1.5 + t.x, 1.5 + t.y}, {0 + t.x, 1.5 + t.y}});
    auto orig = square(0, 0, 1.5);
    auto u0 = synthesize_far_field(SourceScene{{{orig, Amplitude::constant(1.0)}}}, obs, band, opt);
    auto u1 = synthesize_far_field(SourceScene{{{moved, Amplitude::constant(1.0)}}}, obs, band, opt);
    for (size_t l = 0; l < 5; ++l)
        for (Sign s : {Sign::Plus, Sign::Minus})
            for (size_t m = 0; m < band.size(); ++m) {
                Vec2 xh = s == Sign::Plus ? obs.directions[l] : -obs.directions[l];
                cplx expect = u0.at(l, s, m) * std::polar(1.0, -band.k(m) * dot(xh, t));
                CHECK(std::abs(u1.at(l, s, m) - expect) < 1e-9 * std::max(1.0, std::abs(expect)));
            }
}

TEST_CASE("serial and OpenMP synthesis agree bitwise") {
    SourceScene sc{{{disk({0.2, 0.1}, 0.7), Amplitude::radial_affine(5.0)}}};
    auto obs = ObservationSet::make(6);
    WaveBand band(6);
    QuadratureOptions a, b;
    a.resolution = b.resolution = 128;
    a.parallel = false;
    auto ua = synthesize_far_field(sc, obs, band, a);
    auto ub = synthesize_far_field(sc, obs, band, b);
    CHECK(ua.values == ub.values);
}

TEST_CASE("coarse grids warn and bad inputs throw") {
    SourceScene sc{{{disk({0, 0}, 3), Amplitude::constant(1.0)}}};
    QuadratureOptions opt;
    opt.resolution = 64;
    QuadratureStats st;
    synthesize_far_field(sc, ObservationSet::make(1), WaveBand(40), opt, &st);
    CHECK_FALSE(st.warnings.empty());
    opt.resolution = 32;
    CHECK_THROWS_AS(synthesize_far_field(sc, ObservationSet::make(1), WaveBand(4), opt), ArgumentError);
    SourceScene unb{{{make_complement(disk({0, 0}, 1)), Amplitude::constant(1.0)}}};
    CHECK_THROWS_AS(synthesize_far_field(unb, ObservationSet::make(1), WaveBand(4)), ArgumentError);
}

TEST_CASE("noise model") {
    SourceScene sc{{{disk({0, 0}, 1), Amplitude::constant(1.0)}}};
    QuadratureOptions opt;
    opt.resolution = 96;
    auto clean = synthesize_far_field(sc, ObservationSet::make(4), WaveBand(10), opt);
    CHECK(apply_noise(clean, {0.0, std::nullopt, 3}).values == clean.values);
    NoiseModel nm{0.3, Systematic{0.1, 0.1}, 42};
    auto a = apply_noise(clean, nm), b = apply_noise(clean, nm);
    CHECK(a.values == b.values);
    nm.seed = 43;
    CHECK(apply_noise(clean, nm).values != a.values);
    CHECK_THROWS_AS(apply_noise(clean, {-1.0, std::nullopt, 0}), ArgumentError);

    // zero data plus systematic error: the values are N(mu, sigma^2) in both parts
    MeasurementSet zero(ObservationSet::make(50), WaveBand(50));
    auto z = apply_noise(zero, {0.3, Systematic{0.1, 0.2}, 9});
    double sr = 0, si = 0, qr = 0;
    for (auto v : z.values) {
        sr += v.real();
        si += v.imag();
        qr += (v.real() - 0.1) * (v.real() - 0.1);
    }
    const double n = static_cast<double>(z.values.size());
    CHECK(sr / n == doctest::Approx(0.1).epsilon(0.05));
    CHECK(si / n == doctest::Approx(0.1).epsilon(0.05));
    CHECK(std::sqrt(qr / n) == doctest::Approx(0.2).epsilon(0.03));
}

TEST_CASE("normal stream moments") {
    NormalStream g(1);
    double s = 0, s2 = 0, s4 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = g.next();
        s += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("measurement CSV round trip") {
    SourceScene sc{{{disk({0.1, 0}, 0.5), Amplitude::constant(1.0)}}};
    QuadratureOptions opt;
    opt.resolution = 64;
    auto obs = ObservationSet::make(3);
    auto ms = apply_noise(synthesize_far_field(sc, obs, WaveBand(4), opt), {0.3, std::nullopt, 5});
    auto path = (std::filesystem::temp_directory_path() / "srcimg_meas_test.csv").string();
    write_measurements_csv(ms, path);
    auto text = io::read_text(path);
    CHECK(text.rfind("l,sign,m,k,re,im\n0,+,1,0.5,", 0) == 0);
    auto back = read_measurements_csv(path, obs);
    CHECK(back.values == ms.values);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_measurements_csv("/nonexistent/x.csv", obs), IoError);
}
