#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "srcimg/errors.hpp"
#include "srcimg/expr.hpp"
#include "srcimg/geometry.hpp"

using namespace srcimg;

namespace {

RegionPtr disk(Vec2 c, double R) { return std::make_shared<Annulus>(c, 0.0, R); }
RegionPtr square(double x0, double y0, double a) {
    return std::make_shared<Polygon>(std::vector<Vec2>{{x0, y0}, {x0 + a, y0}, {x0 + a, y0 + a}, {x0, y0 + a}});
}
SourceScene single(RegionPtr r, Amplitude a = Amplitude::constant(1.0)) { return {{{std::move(r), a}}}; }

std::vector<Vec2> test_directions(int n) {
    std::vector<Vec2> d;
    for (int i = 0; i < n; ++i) d.push_back(unit_from_angle(2 * std::numbers::pi * (i + 0.123) / n));
    return d;
}

}  // namespace

TEST_CASE("contains on annulus and square") {
    Annulus a({0, 0}, 0.5, 1.0);
    CHECK(contains(a, {0.75, 0}));
    CHECK_FALSE(contains(a, {0, 0}));
    CHECK(contains(a, {1.0, 0}));  // boundary counts as inside
    CHECK_FALSE(contains(*square(0, 0, 1), {2, 2}));
    CHECK(contains(*square(0, 0, 1), {1, 0.5}));
}

TEST_CASE("evaluate_source") {
    SourceScene empty;
    CHECK(evaluate_source(empty, {0.3, 0.1}) == cplx(0.0));
    CHECK(evaluate_source(single(disk({0, 0}, 1)), {0.5, 0}) == cplx(1.0));
    auto s = single(disk({0, 0}, 1), Amplitude::radial_affine(5.0));
    CHECK(evaluate_source(s, {0.5, 0}).real() == doctest::Approx(5.5));
    CHECK(evaluate_source(s, {1.5, 0}) == cplx(0.0));
}

TEST_CASE("line_support_intersections") {
    for (Vec2 xh : test_directions(7)) {
        auto iv = line_support_intersections(single(disk({0, 0}, 1)), xh, 0.0);
        REQUIRE(iv.size() == 1);
        CHECK(iv[0].lo == doctest::Approx(-1.0));
        CHECK(iv[0].hi == doctest::Approx(1.0));
        auto ia = line_support_intersections(single(std::make_shared<Annulus>(Vec2{0, 0}, 0.5, 1.0)), xh, 0.0);
        REQUIRE(ia.size() == 2);
        CHECK(ia[0].lo == doctest::Approx(-1.0));
        CHECK(ia[0].hi == doctest::Approx(-0.5));
        CHECK(ia[1].lo == doctest::Approx(0.5));
        CHECK(ia[1].hi == doctest::Approx(1.0));
        CHECK(line_support_intersections(single(disk({0, 0}, 1)), xh, 2.0).empty());
    }
    CHECK_THROWS_AS(line_support_intersections(single(disk({0, 0}, 1)), {1.0, 1.0}, 0.0), ArgumentError);
}

TEST_CASE("tangent_offsets") {
    auto [a, b] = tangent_offsets({{1, 1}, 1}, {1, 0});
    CHECK(a == doctest::Approx(0));
    CHECK(b == doctest::Approx(2));
    auto [c, d] = tangent_offsets({{-1, -1}, 1}, {0, 1});
    CHECK(c == doctest::Approx(-2));
    CHECK(d == doctest::Approx(0));
    for (Vec2 xh : test_directions(32)) {
        auto [e, f] = tangent_offsets({{0, 0}, 0.5}, xh);
        CHECK(e == doctest::Approx(-0.5));
        CHECK(f == doctest::Approx(0.5));
        Circle cc{{0.3, -1.2}, 0.7};
        auto [g, h] = tangent_offsets(cc, xh);
        CHECK(0.5 * (g + h) == doctest::Approx(dot(xh, cc.center)));
        CHECK(0.5 * (h - g) == doctest::Approx(cc.radius));
    }
    CHECK_THROWS_AS(tangent_offsets({{0, 0}, 0.0}, {1, 0}), ArgumentError);
}

TEST_CASE("source vanishes off the chord intervals") {
    auto lshape = std::make_shared<Polygon>(
        std::vector<Vec2>{{-1, -1}, {1, -1}, {1, 0}, {0, 0}, {0, 1}, {-1, 1}});
    auto mixed = make_union({disk({-1, -1}, 1), make_intersection({square(0, 0, 1.5), make_complement(square(0, 0, 0.75))})});
    auto kite = std::make_shared<Implicit>(Expr::parse("(x + 13*y^2/15)^2 + y^2 - 1"), BBox{-2, 1.1, -1.1, 1.1, true});
    std::vector<SourceScene> scenes = {single(lshape), single(mixed), single(kite),
                                       single(std::make_shared<Annulus>(Vec2{-1, -1}, 0.5, 1.0))};
    for (const auto& sc : scenes) {
        for (Vec2 xh : test_directions(5)) {
            for (double s = -2.9; s < 2.9; s += 0.37) {
                auto iv = line_support_intersections(sc, xh, s);
                for (double tau = -4; tau <= 4; tau += 0.01) {
                    Vec2 p = xh * s + perp(xh) * tau;
                    bool inside_iv = false;
                    for (auto& i : iv) inside_iv = inside_iv || (tau >= i.lo - 1e-9 && tau <= i.hi + 1e-9);
                    if (std::abs(evaluate_source(sc, p)) > 0) CHECK(inside_iv);
                }
            }
        }
    }
}

TEST_CASE("set expressions obey De Morgan") {
    auto A = disk({0.2, 0.1}, 0.8), B = square(-0.5, -0.5, 1.0);
    auto lhs = make_complement(make_union({A, B}));
    auto rhs = make_intersection({make_complement(A), make_complement(B)});
    auto lhs2 = make_complement(make_intersection({A, B}));
    auto rhs2 = make_union({make_complement(A), make_complement(B)});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 2000; ++i) {
        Vec2 p{u(rng), u(rng)};
        CHECK(lhs->contains(p) == rhs->contains(p));
        CHECK(lhs2->contains(p) == rhs2->contains(p));
    }
}

TEST_CASE("polygon validation and orientation") {
    Polygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    CHECK(cw.area() > 0);
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}}), ArgumentError);
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 0}, {2, 0}}), ArgumentError);
    CHECK_THROWS_AS(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), ArgumentError);
    CHECK_THROWS_AS(Annulus({0, 0}, 1.0, 0.5), ArgumentError);
}

TEST_CASE("implicit chords match membership") {
    Implicit kite(Expr::parse("(x + 13*y^2/15)^2 + y^2 - 1"), {-2, 1.1, -1.1, 1.1, true});
    for (Vec2 xh : test_directions(6))
        for (double s = -1.5; s <= 1.5; s += 0.25)
            for (auto iv : kite.chord(xh, s)) {
                Vec2 a = xh * s + perp(xh) * (iv.lo + 1e-7), b = xh * s + perp(xh) * (iv.lo - 1e-7);
                CHECK(kite.contains(a));
                CHECK_FALSE(kite.contains(b));
            }
}

TEST_CASE("ground truth of presets") {
    auto lshape = std::make_shared<Polygon>(
        std::vector<Vec2>{{-1, -1}, {1, -1}, {1, 0}, {0, 0}, {0, 1}, {-1, 1}});
    auto gt = ground_truth(single(lshape));
    CHECK(gt.corners.size() == 6);
    CHECK(gt.edges.size() == 6);
    CHECK(gt.circles.empty());

    auto an = ground_truth(single(std::make_shared<Annulus>(Vec2{-1, -1}, 0.5, 1.0)));
    CHECK(an.corners.empty());
    CHECK(an.circles.size() == 2);

    auto mixed = make_union({disk({-1, -1}, 1), make_intersection({square(0, 0, 1.5), make_complement(square(0, 0, 0.75))})});
    auto gm = ground_truth(single(mixed));
    CHECK(gm.corners.size() == 6);
    CHECK(gm.circles.size() == 1);
    CHECK(gm.edges.size() == 6);
}

TEST_CASE("scene validation") {
    SourceScene overlap{{{disk({0, 0}, 1), Amplitude::constant(1.0)}, {disk({0.5, 0}, 1), Amplitude::constant(1.0)}}};
    CHECK_FALSE(validate_scene(overlap).empty());
    SourceScene ok{{{disk({-2, 0}, 1), Amplitude::constant(1.0)}, {disk({2, 0}, 1), Amplitude::constant(1.0)}}};
    CHECK(validate_scene(ok).empty());
    CHECK_THROWS_AS(validate_scene(single(disk({0, 0}, 1), Amplitude::radial_affine(-1.0))), ConfigError);
    CHECK_THROWS_AS(validate_scene(single(make_complement(disk({0, 0}, 1)))), ConfigError);
}

TEST_CASE("expression parser") {
    auto e = Expr::parse("sqrt(x^2 + y^2) + 5");
    CHECK(e(3, 4) == doctest::Approx(10));
    CHECK(Expr::parse("-2^2")(0, 0) == doctest::Approx(-4));
    CHECK(Expr::parse("exp(-0.25*r^2)")(1, 0) == doctest::Approx(std::exp(-0.25)));
    CHECK(Expr::parse("2*pi")(0, 0) == doctest::Approx(2 * std::numbers::pi));
    CHECK_THROWS_AS(Expr::parse("x +"), ArgumentError);
    CHECK_THROWS_AS(Expr::parse("foo(x)"), ArgumentError);
    CHECK_THROWS_AS(Expr::parse("(x"), ArgumentError);
}
