#include "srcimg/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "srcimg/errors.hpp"
#include "srcimg/kernels.hpp"
#include "srcimg/profile.hpp"

namespace srcimg {

std::vector<double> SamplingGrid::xs() const {
    std::vector<double> v(P);
    for (size_t p = 0; p < P; ++p) v[p] = x(p);
    return v;
}

std::vector<double> SamplingGrid::ys() const {
    std::vector<double> v(Q);
    for (size_t q = 0; q < Q; ++q) v[q] = y(q);
    return v;
}

double SamplingGrid::spacing() const {
    return std::min((xhi - xlo) / static_cast<double>(P - 1), (yhi - ylo) / static_cast<double>(Q - 1));
}

void SamplingGrid::validate() const {
    if (P < 3 || Q < 3) throw ArgumentError("sampling grid needs at least 3x3 points");
    if (!(xhi > xlo) || !(yhi > ylo) || !std::isfinite(xlo + xhi + ylo + yhi))
        throw ArgumentError("sampling grid bounds must be finite with lo < hi");
}

std::string to_string(IndicatorKind k) {
    switch (k) {
        case IndicatorKind::Iminus: return "Iminus";
        case IndicatorKind::IminusProcessed: return "IminusProcessed";
        case IndicatorKind::Iplus: return "Iplus";
        case IndicatorKind::ALHS: return "ALHS";
        case IndicatorKind::IminusM: return "IminusM";
        case IndicatorKind::IplusM: return "IplusM";
        case IndicatorKind::Iepsilon: return "Iepsilon";
    }
    return "?";
}

IndicatorKind indicator_from_string(const std::string& s) {
    for (auto k : {IndicatorKind::Iminus, IndicatorKind::IminusProcessed, IndicatorKind::Iplus, IndicatorKind::ALHS,
                   IndicatorKind::IminusM, IndicatorKind::IplusM, IndicatorKind::Iepsilon})
        if (to_string(k) == s) return k;
    throw ArgumentError("unknown indicator '" + s + "'");
}

namespace {

// Uniform samples covering every projection x.z of the grid.
struct Line1D {
    double s0 = 0.0, hs = 0.0;
    std::vector<double> s;
};

Line1D line_samples(const SamplingGrid& g, int oversample) {
    if (oversample < 1) throw ArgumentError("oversample must be >= 1");
    double R = 0.0;
    for (double x : {g.xlo, g.xhi})
        for (double y : {g.ylo, g.yhi}) R = std::max(R, std::hypot(x, y));
    Line1D l;
    l.hs = g.spacing() / oversample;
    const size_t n = static_cast<size_t>(std::ceil(2.0 * R / l.hs)) + 1;
    l.s0 = -R;
    l.s.resize(n);
    for (size_t j = 0; j < n; ++j) l.s[j] = l.s0 + static_cast<double>(j) * l.hs;
    return l;
}

void require_data(const MeasurementSet& ms) {
    if (ms.obs.directions.empty()) throw ArgumentError("indicator needs at least one direction");
    if (ms.values.size() != ms.obs.directions.size() * 2 * ms.M())
        throw ArgumentError("measurement set lacks one of the signed directions");
}

// Rows l of sum_m w_m k_m^power u(sign x_l, k_m) e^{+-i k_m s}, for all directions at once.
std::vector<cplx> band_table(const MeasurementSet& ms, Sign sign, int power, const std::vector<double>& s,
                             bool parallel) {
    const size_t L = ms.obs.directions.size(), M = ms.M();
    const auto w = trapezoid_weights(ms.band);
    std::vector<cplx> c(L * M);
    for (size_t l = 0; l < L; ++l)
        for (size_t m = 0; m < M; ++m) c[l * M + m] = w[m] * std::pow(ms.band.k(m), power) * ms.at(l, sign, m);
    kernels::BandSumTask task{&c, L, M, ms.band.dk(), &s, sign == Sign::Plus ? 1.0 : -1.0};
    std::vector<cplx> out;
    if (parallel)
        kernels::omp::band_sum(task, out);
    else
        kernels::serial::band_sum(task, out);
    return out;
}

std::vector<double> broadcast(const std::vector<double>& table, size_t rows, const Line1D& line,
                              const std::vector<Vec2>& dirs, const SamplingGrid& g, bool parallel) {
    std::vector<double> dx, dy;
    for (auto d : dirs) {
        dx.push_back(d.x);
        dy.push_back(d.y);
    }
    const auto xs = g.xs(), ys = g.ys();
    kernels::BroadcastTask t{&table, rows, line.s.size(), line.s0, line.hs, &dx, &dy, &xs, &ys};
    std::vector<double> field(g.size(), 0.0);
    if (parallel)
        kernels::omp::broadcast_sum(t, field);
    else
        kernels::serial::broadcast_sum(t, field);
    return field;
}

FieldMeta meta_of(const MeasurementSet& ms) {
    FieldMeta m;
    m.L = static_cast<int>(ms.obs.directions.size());
    m.Lambda = ms.band.Lambda;
    m.gamma = ms.obs.gamma;
    return m;
}

}  // namespace

std::vector<cplx> eval_I_minus_directional(const MeasurementSet& ms, size_t l, const SamplingGrid& grid,
                                           const IndicatorOptions& opt) {
    grid.validate();
    require_data(ms);
    if (l >= ms.obs.directions.size()) throw ArgumentError("direction index out of range");
    const Line1D line = line_samples(grid, opt.oversample);
    const auto sub = ms.subset({l});
    const auto p = band_table(sub, Sign::Plus, 1, line.s, opt.parallel);
    const auto m = band_table(sub, Sign::Minus, 1, line.s, opt.parallel);
    std::vector<double> re(line.s.size()), im(line.s.size());
    for (size_t j = 0; j < line.s.size(); ++j) {
        const cplx v = p[j] - m[j];
        re[j] = v.real();
        im[j] = v.imag();
    }
    const std::vector<Vec2> d{ms.obs.directions[l]};
    const auto fr = broadcast(re, 1, line, d, grid, opt.parallel);
    const auto fi = broadcast(im, 1, line, d, grid, opt.parallel);
    std::vector<cplx> out(grid.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = {fr[i], fi[i]};
    return out;
}

IndicatorField eval_I_minus(const MeasurementSet& ms, const SamplingGrid& grid, const IndicatorOptions& opt) {
    grid.validate();
    require_data(ms);
    const Line1D line = line_samples(grid, opt.oversample);
    const size_t L = ms.obs.directions.size(), ns = line.s.size();
    const auto p = band_table(ms, Sign::Plus, 1, line.s, opt.parallel);
    const auto m = band_table(ms, Sign::Minus, 1, line.s, opt.parallel);
    std::vector<double> table(L * ns);
    for (size_t i = 0; i < table.size(); ++i) table[i] = std::abs(p[i] - m[i]);
    IndicatorField f{grid, IndicatorKind::Iminus, broadcast(table, L, line, ms.obs.directions, grid, opt.parallel),
                     meta_of(ms)};
    for (auto& v : f.values) v /= static_cast<double>(L);
    return f;
}

std::vector<double> sobel_normalized(const std::vector<cplx>& m, const SamplingGrid& g) {
    g.validate();
    if (m.size() != g.size()) throw ArgumentError("matrix does not match the grid");
    static constexpr int S1[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    static constexpr int S2[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    const size_t P = g.P, Q = g.Q;
    // Matrix entry (p, q) with p the first index: G(p,q) = sum_{k,l} I(p-k+2, q-l+2) S(k,l),
    // k, l = 1..3.
    auto I = [&](size_t p, size_t q) { return m[q * P + p]; };
    std::vector<double> out(g.size(), 0.0);
    double mx = 0.0;
    for (size_t q = 1; q + 1 < Q; ++q)
        for (size_t p = 1; p + 1 < P; ++p) {
            cplx g1 = 0.0, g2 = 0.0;
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    const cplx v = I(p + 1 - static_cast<size_t>(k), q + 1 - static_cast<size_t>(l));
                    g1 += static_cast<double>(S1[k][l]) * v;
                    g2 += static_cast<double>(S2[k][l]) * v;
                }
            const double mag = std::sqrt(std::norm(g1) + std::norm(g2));
            out[q * P + p] = mag;
            mx = std::max(mx, mag);
        }
    if (mx > 0)
        for (auto& v : out) v /= mx;
    return out;
}

IndicatorField sobel_process(const std::vector<std::vector<cplx>>& per_direction, const SamplingGrid& grid) {
    if (per_direction.empty()) throw ArgumentError("Sobel processing needs at least one direction");
    IndicatorField f{grid, IndicatorKind::IminusProcessed, std::vector<double>(grid.size(), 0.0), {}};
    for (const auto& m : per_direction) {
        const auto n = sobel_normalized(m, grid);
        for (size_t i = 0; i < n.size(); ++i) f.values[i] += n[i];
    }
    for (auto& v : f.values) v /= static_cast<double>(per_direction.size());
    return f;
}

IndicatorField eval_I_minus_processed(const MeasurementSet& ms, const SamplingGrid& grid, const IndicatorOptions& opt) {
    grid.validate();
    require_data(ms);
    const size_t L = ms.obs.directions.size();
    IndicatorField f{grid, IndicatorKind::IminusProcessed, std::vector<double>(grid.size(), 0.0), meta_of(ms)};
    // One direction at a time keeps a single complex matrix alive; the sum runs in l order.
    for (size_t l = 0; l < L; ++l) {
        const auto n = sobel_normalized(eval_I_minus_directional(ms, l, grid, opt), grid);
        for (size_t i = 0; i < n.size(); ++i) f.values[i] += n[i];
    }
    for (auto& v : f.values) v /= static_cast<double>(L);
    return f;
}

IndicatorField eval_I_plus(const MeasurementSet& ms, const SamplingGrid& grid, const IndicatorOptions& opt) {
    grid.validate();
    require_data(ms);
    const Line1D line = line_samples(grid, opt.oversample);
    const size_t L = ms.obs.directions.size();
    const auto p = band_table(ms, Sign::Plus, 1, line.s, opt.parallel);
    const auto m = band_table(ms, Sign::Minus, 1, line.s, opt.parallel);
    const double c = 1.0 / (4.0 * std::numbers::pi * static_cast<double>(L));
    std::vector<double> re(p.size()), im(p.size());
    for (size_t i = 0; i < p.size(); ++i) {
        const cplx v = c * (p[i] + m[i]);
        re[i] = v.real();
        im[i] = v.imag();
    }
    IndicatorField f{grid, IndicatorKind::Iplus, broadcast(re, L, line, ms.obs.directions, grid, opt.parallel),
                     meta_of(ms)};
    const auto fi = broadcast(im, L, line, ms.obs.directions, grid, opt.parallel);
    double nr = 0.0, ni = 0.0;
    for (size_t i = 0; i < fi.size(); ++i) {
        nr += f.values[i] * f.values[i];
        ni += fi[i] * fi[i];
    }
    f.meta.diagnostics["imag_over_real"] = nr > 0 ? std::sqrt(ni / nr) : 0.0;
    return f;
}

IndicatorField eval_I_alhs(const MeasurementSet& ms, const SamplingGrid& grid, const IndicatorOptions& opt) {
    grid.validate();
    require_data(ms);
    const Line1D line = line_samples(grid, opt.oversample);
    const size_t L = ms.obs.directions.size();
    const auto p = band_table(ms, Sign::Plus, 0, line.s, opt.parallel);
    std::vector<double> table(p.size());
    for (size_t i = 0; i < p.size(); ++i) table[i] = std::abs(p[i]);
    return {grid, IndicatorKind::ALHS, broadcast(table, L, line, ms.obs.directions, grid, opt.parallel), meta_of(ms)};
}

MeasurementSet subtract_mu(const MeasurementSet& ms, double mu, MuMode mode) {
    MeasurementSet out = ms;
    const cplx shift = mode == MuMode::Both ? cplx(mu, mu) : cplx(mu, 0.0);
    for (auto& v : out.values) v -= shift;
    return out;
}

ModifiedFields eval_modified(const MeasurementSet& ms, const SamplingGrid& grid, double mu, MuMode mode,
                             const IndicatorOptions& opt) {
    const MeasurementSet c = subtract_mu(ms, mu, mode);
    ModifiedFields f{eval_I_minus(c, grid, opt), eval_I_plus(c, grid, opt)};
    f.minus.kind = IndicatorKind::IminusM;
    f.plus.kind = IndicatorKind::IplusM;
    for (auto* x : {&f.minus, &f.plus}) {
        x->meta.diagnostics["mu"] = mu;
        x->meta.notes["mu_subtraction"] = mode == MuMode::Both ? "mu(1+i)" : "mu (real part only)";
    }
    return f;
}

IndicatorField eval_I_epsilon(const SourceScene& scene, const IndicatorField& iplus, double epsilon) {
    if (!(epsilon > 0)) throw ArgumentError("epsilon must be positive");
    const auto& g = iplus.grid;
    if (iplus.values.size() != g.size()) throw ArgumentError("field does not match its grid");
    IndicatorField f{g, IndicatorKind::Iepsilon, std::vector<double>(g.size(), 0.0), iplus.meta};
    for (size_t q = 0; q < g.Q; ++q)
        for (size_t p = 0; p < g.P; ++p) {
            const cplx fz = evaluate_source(scene, g.z(p, q));
            f.values[q * g.P + p] = std::abs(fz - iplus.at(p, q)) > epsilon ? 1.0 : 0.0;
        }
    f.meta.diagnostics["epsilon"] = epsilon;
    f.meta.diagnostics["fraction_ones"] = fraction_of_ones(f);
    return f;
}

double fraction_of_ones(const IndicatorField& f) {
    if (f.values.empty()) return 0.0;
    double n = 0.0;
    for (double v : f.values) n += v;
    return n / static_cast<double>(f.values.size());
}

}  // namespace srcimg
