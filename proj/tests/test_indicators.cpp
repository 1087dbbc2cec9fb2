#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "srcimg/errors.hpp"
#include "srcimg/indicators.hpp"
#include "srcimg/profile.hpp"

using namespace srcimg;

namespace {

SamplingGrid small_grid(size_t n = 61) {
    SamplingGrid g;
    g.P = g.Q = n;
    return g;
}

MeasurementSet analytic_disk(Vec2 c, double R, const ObservationSet& obs, int Lambda, cplx amp = 1.0) {
    MeasurementSet ms(obs, WaveBand(Lambda));
    for (size_t l = 0; l < obs.directions.size(); ++l)
        for (Sign sg : {Sign::Plus, Sign::Minus}) {
            const Vec2 x = sg == Sign::Plus ? obs.directions[l] : obs.directions[l] * -1.0;
            for (size_t m = 0; m < ms.M(); ++m) ms.at(l, sg, m) = disk_far_field_analytic(c, R, amp, x, ms.band.k(m));
        }
    return ms;
}

// Literal two-dimensional convolution with the 3x3 Sobel masks, 1-based as written on paper:
// G(p,q) = sum_{k,l=1..3} I(p-k+2, q-l+2) S(k,l), zero on the border.
std::vector<double> sobel_oracle(const std::vector<double>& I, size_t P, size_t Q) {
    const double S1[4][4] = {{0, 0, 0, 0}, {0, -1, 0, 1}, {0, -2, 0, 2}, {0, -1, 0, 1}};
    const double S2[4][4] = {{0, 0, 0, 0}, {0, -1, -2, -1}, {0, 0, 0, 0}, {0, 1, 2, 1}};
    auto at = [&](long p, long q) { return I[static_cast<size_t>(q - 1) * P + static_cast<size_t>(p - 1)]; };
    std::vector<double> out(P * Q, 0.0);
    double mx = 0;
    for (long q = 2; q < static_cast<long>(Q); ++q)
        for (long p = 2; p < static_cast<long>(P); ++p) {
            double g1 = 0, g2 = 0;
            for (long k = 1; k <= 3; ++k)
                for (long l = 1; l <= 3; ++l) {
                    g1 += at(p - k + 2, q - l + 2) * S1[k][l];
                    g2 += at(p - k + 2, q - l + 2) * S2[k][l];
                }
            out[static_cast<size_t>(q - 1) * P + static_cast<size_t>(p - 1)] = std::hypot(g1, g2);
            mx = std::max(mx, std::hypot(g1, g2));
        }
    for (auto& v : out) v /= mx;
    return out;
}

}  // namespace

TEST_CASE("sampling grid") {
    SamplingGrid g;
    CHECK(g.P == 601);
    CHECK(g.x(0) == -3.0);
    CHECK(g.x(600) == 3.0);
    CHECK(g.y(300) == doctest::Approx(0.0));
    CHECK(g.spacing() == doctest::Approx(0.01));
    g.P = 2;
    CHECK_THROWS_AS(g.validate(), ArgumentError);
}

TEST_CASE("indicator names round-trip") {
    for (auto k : {IndicatorKind::Iminus, IndicatorKind::IminusProcessed, IndicatorKind::Iplus, IndicatorKind::ALHS,
                   IndicatorKind::IminusM, IndicatorKind::IplusM, IndicatorKind::Iepsilon})
        CHECK(indicator_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(indicator_from_string("Ifoo"), ArgumentError);
}

TEST_CASE("Sobel matches a literal convolution") {
    SamplingGrid g;
    g.P = 7;
    g.Q = 5;
    std::vector<cplx> m(g.size());
    std::vector<double> re(g.size());
    for (size_t q = 0; q < g.Q; ++q)
        for (size_t p = 0; p < g.P; ++p) {
            re[q * g.P + p] = std::sin(1.3 * p + 0.4 * q * q) + 0.1 * p * q;
            m[q * g.P + p] = re[q * g.P + p];
        }
    const auto got = sobel_normalized(m, g);
    const auto want = sobel_oracle(re, g.P, g.Q);
    for (size_t i = 0; i < g.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-13));
}

TEST_CASE("Sobel field contract: range, zero border, unit maximum") {
    const auto g = small_grid(41);
    const auto ms = analytic_disk({0.4, -0.3}, 0.8, ObservationSet::make(5), 15);
    for (size_t l = 0; l < 5; ++l) {
        const auto n = sobel_normalized(eval_I_minus_directional(ms, l, g), g);
        CHECK(*std::max_element(n.begin(), n.end()) == 1.0);
        CHECK(*std::min_element(n.begin(), n.end()) >= 0.0);
        for (size_t p = 0; p < g.P; ++p) CHECK((n[p] == 0.0 && n[(g.Q - 1) * g.P + p] == 0.0));
        for (size_t q = 0; q < g.Q; ++q) CHECK((n[q * g.P] == 0.0 && n[q * g.P + g.P - 1] == 0.0));
    }
    const auto f = eval_I_minus_processed(ms, g);
    for (double v : f.values) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(sobel_normalized(std::vector<cplx>(g.size()), g) == std::vector<double>(g.size(), 0.0));
}

TEST_CASE("directional I^- is constant along lines orthogonal to the direction") {
    const auto g = small_grid(31);
    const auto ms = analytic_disk({0.2, 0.1}, 0.6, ObservationSet::from_directions({{1, 0}, {0, 1}}), 12);
    const auto d0 = eval_I_minus_directional(ms, 0, g);  // x-hat = (1, 0): depends on x only
    for (size_t p = 0; p < g.P; ++p)
        for (size_t q = 1; q < g.Q; ++q) CHECK(d0[q * g.P + p] == d0[p]);
    const auto d1 = eval_I_minus_directional(ms, 1, g);
    for (size_t q = 0; q < g.Q; ++q)
        for (size_t p = 1; p < g.P; ++p) CHECK(d1[q * g.P + p] == d1[q * g.P]);
}

TEST_CASE("I^- agrees with direct summation") {
    const auto g = small_grid(21);
    const auto obs = ObservationSet::make(4);
    const auto ms = analytic_disk({-0.3, 0.5}, 0.7, obs, 10);
    IndicatorOptions fine;
    fine.oversample = 400;
    const auto f = eval_I_minus(ms, g, fine);
    const auto w = trapezoid_weights(ms.band);
    double mx = 0, err = 0;
    for (size_t q = 0; q < g.Q; q += 4)
        for (size_t p = 0; p < g.P; p += 3) {
            const Vec2 z = g.z(p, q);
            double sum = 0;
            for (size_t l = 0; l < 4; ++l) {
                cplx v;
                const double t = dot(obs.directions[l], z);
                for (size_t m = 0; m < ms.M(); ++m) {
                    const double k = ms.band.k(m);
                    v += w[m] * k * (ms.at(l, Sign::Plus, m) * std::exp(cplx(0, k * t)) -
                                     ms.at(l, Sign::Minus, m) * std::exp(cplx(0, -k * t)));
                }
                sum += std::abs(v);
            }
            sum /= 4.0;
            mx = std::max(mx, sum);
            err = std::max(err, std::abs(sum - f.at(p, q)));
        }
    CHECK(err <= 2e-3 * mx);
}

TEST_CASE("homogeneity in the data") {
    const auto g = small_grid(25);
    const auto ms = analytic_disk({0, 0}, 1, ObservationSet::make(6), 12);
    MeasurementSet scaled = ms;
    for (auto& v : scaled.values) v *= 3.0;
    const auto a = eval_I_minus(ms, g), b = eval_I_minus(scaled, g);
    const auto c = eval_I_plus(ms, g), d = eval_I_plus(scaled, g);
    const auto e = eval_I_alhs(ms, g), h = eval_I_alhs(scaled, g);
    for (size_t i = 0; i < g.size(); ++i) {
        CHECK(b.values[i] == doctest::Approx(3 * a.values[i]));
        CHECK(d.values[i] == doctest::Approx(3 * c.values[i]));
        CHECK(h.values[i] == doctest::Approx(3 * e.values[i]));
    }
    // The Sobel field is scale free.
    const auto s1 = eval_I_minus_processed(ms, g), s2 = eval_I_minus_processed(scaled, g);
    for (size_t i = 0; i < g.size(); ++i) CHECK(s2.values[i] == doctest::Approx(s1.values[i]));
}

TEST_CASE("ALHS peaks at a tiny disk") {
    const auto g = small_grid(61);
    const Vec2 c{0.6, -0.9};
    const auto ms = analytic_disk(c, 0.03, ObservationSet::make(10), 20);
    const auto f = eval_I_alhs(ms, g);
    const size_t i = static_cast<size_t>(std::max_element(f.values.begin(), f.values.end()) - f.values.begin());
    const Vec2 z = g.z(i % g.P, i / g.P);
    CHECK(norm(z - c) <= 2 * g.spacing());
}

TEST_CASE("I^+ approximates f for a disk") {
    const auto g = small_grid(31);
    const auto ms = analytic_disk({0, 0}, 1.2, ObservationSet::make(40), 30);
    const auto f = eval_I_plus(ms, g);
    CHECK(f.at(15, 15) == doctest::Approx(1.0).epsilon(0.1));  // centre
    CHECK(std::abs(f.at(25, 15)) < 0.1);                        // z = (2, 0)
    CHECK(f.meta.diagnostics.at("imag_over_real") < 0.05);
}

TEST_CASE("zero data gives zero fields") {
    const auto g = small_grid(11);
    MeasurementSet ms(ObservationSet::make(3), WaveBand(5));
    for (const auto& f : {eval_I_minus(ms, g), eval_I_minus_processed(ms, g), eval_I_plus(ms, g), eval_I_alhs(ms, g)})
        for (double v : f.values) CHECK(v == 0.0);
    MeasurementSet empty;
    CHECK_THROWS_AS(eval_I_minus(empty, g), ArgumentError);
}

TEST_CASE("mu subtraction and modified indicators") {
    const auto g = small_grid(21);
    auto ms = analytic_disk({0, 0}, 0.5, ObservationSet::make(4), 10);
    const auto clean = eval_I_plus(ms, g);
    for (auto& v : ms.values) v += cplx(0.1, 0.1);
    const auto back = subtract_mu(ms, 0.1);
    const auto mod = eval_modified(ms, g, 0.1);
    CHECK(mod.minus.kind == IndicatorKind::IminusM);
    CHECK(mod.plus.kind == IndicatorKind::IplusM);
    for (size_t i = 0; i < g.size(); ++i) CHECK(mod.plus.values[i] == doctest::Approx(clean.values[i]).epsilon(1e-9));
    const auto real_only = subtract_mu(ms, 0.1, MuMode::RealOnly);
    CHECK(real_only.values[3] == ms.values[3] - cplx(0.1, 0));
    CHECK(back.values[3] == ms.values[3] - cplx(0.1, 0.1));
}

TEST_CASE("I_epsilon marks points where I^+ misses f") {
    auto g = small_grid(41);
    SourceScene sc{{{std::make_shared<Annulus>(Vec2{0, 0}, 0.0, 1.0), Amplitude::constant(2.0)}}};
    IndicatorField zero{g, IndicatorKind::Iplus, std::vector<double>(g.size(), 0.0), {}};
    const auto e = eval_I_epsilon(sc, zero, 1.5);
    size_t inside = 0;
    for (size_t q = 0; q < g.Q; ++q)
        for (size_t p = 0; p < g.P; ++p) {
            const bool in = norm(g.z(p, q)) < 1.0;
            inside += in;
            if (std::abs(norm(g.z(p, q)) - 1.0) > 1e-9) CHECK(e.at(p, q) == (in ? 1.0 : 0.0));
        }
    CHECK(fraction_of_ones(e) == doctest::Approx(static_cast<double>(inside) / g.size()).epsilon(0.05));
    CHECK(fraction_of_ones(eval_I_epsilon(sc, zero, 2.5)) == 0.0);
    CHECK_THROWS_AS(eval_I_epsilon(sc, zero, 0.0), ArgumentError);
}
