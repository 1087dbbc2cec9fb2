#include "srcimg/forward.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "srcimg/bessel.hpp"
#include "srcimg/errors.hpp"
#include "srcimg/io.hpp"

namespace srcimg {

ObservationSet ObservationSet::make(int L, double gamma) {
    if (L <= 0) throw ArgumentError("number of directions L must be positive");
    if (!(gamma > 0.0 && gamma <= 2.0)) throw ArgumentError("aperture gamma must lie in (0, 2]");
    ObservationSet o;
    o.L = L;
    o.gamma = gamma;
    for (int l = 0; l < L; ++l)
        o.directions.push_back(unit_from_angle((gamma * l - 0.7 * L) * std::numbers::pi / L));
    return o;
}

ObservationSet ObservationSet::from_directions(std::vector<Vec2> dirs) {
    for (size_t i = 0; i < dirs.size(); ++i) {
        require_unit(dirs[i]);
        for (size_t j = 0; j < i; ++j)
            if (std::fabs(cross(dirs[i], dirs[j])) < 1e-12)
                throw ArgumentError("observation directions " + std::to_string(j) + " and " +
                                    std::to_string(i) + " are collinear");
    }
    ObservationSet o;
    o.L = static_cast<int>(dirs.size());
    o.gamma = 0.0;  // not generated by the angle rule
    o.directions = std::move(dirs);
    return o;
}

WaveBand::WaveBand(int lambda) : Lambda(lambda) {
    if (lambda <= 0) throw ArgumentError("Lambda must be positive");
}

MeasurementSet::MeasurementSet(ObservationSet o, WaveBand b)
    : obs(std::move(o)), band(b), values(obs.directions.size() * 2 * band.size()) {}

MeasurementSet MeasurementSet::subset(const std::vector<size_t>& dirs) const {
    std::vector<Vec2> d;
    for (size_t l : dirs) d.push_back(obs.directions.at(l));
    ObservationSet o;
    o.L = static_cast<int>(d.size());
    o.gamma = obs.gamma;
    o.directions = d;
    MeasurementSet out(o, band);
    for (size_t i = 0; i < dirs.size(); ++i)
        for (Sign s : {Sign::Plus, Sign::Minus})
            for (size_t m = 0; m < M(); ++m) out.at(i, s, m) = at(dirs[i], s, m);
    return out;
}

double NormalStream::next() {
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = static_cast<double>((eng_() >> 11) + 1) * scale;
    const double u2 = static_cast<double>(eng_() >> 11) * scale;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

struct CellSum {
    double area = 0.0, mx = 0.0, my = 0.0;
    void add_box(double x0, double y0, double w, double h) {
        const double a = w * h;
        area += a;
        mx += a * (x0 + 0.5 * w);
        my += a * (y0 + 0.5 * h);
    }
};

// in[0..3]: corners (x0,y0),(x1,y0),(x0,y1),(x1,y1) of the box.
void refine(const Region& reg, double x0, double y0, double w, double h, const bool in[4], int depth,
            CellSum& acc) {
    const double xm = x0 + 0.5 * w, ym = y0 + 0.5 * h;
    const bool c = reg.contains({xm, ym});
    if (depth == 0) {
        if (c) acc.add_box(x0, y0, w, h);
        return;
    }
    const bool e_bottom = reg.contains({xm, y0}), e_top = reg.contains({xm, y0 + h});
    const bool e_left = reg.contains({x0, ym}), e_right = reg.contains({x0 + w, ym});
    const bool sub[4][4] = {{in[0], e_bottom, e_left, c},
                            {e_bottom, in[1], c, e_right},
                            {e_left, c, in[2], e_top},
                            {c, e_right, e_top, in[3]}};
    const double hw = 0.5 * w, hh = 0.5 * h;
    const double ox[4] = {x0, xm, x0, xm}, oy[4] = {y0, y0, ym, ym};
    for (int q = 0; q < 4; ++q) {
        const bool* s = sub[q];
        const bool sc = reg.contains({ox[q] + 0.5 * hw, oy[q] + 0.5 * hh});
        const bool all_in = s[0] && s[1] && s[2] && s[3] && sc;
        const bool all_out = !s[0] && !s[1] && !s[2] && !s[3] && !sc;
        if (all_in) acc.add_box(ox[q], oy[q], hw, hh);
        else if (!all_out) refine(reg, ox[q], oy[q], hw, hh, s, depth - 1, acc);
    }
}

}  // namespace

kernels::Nodes component_nodes(const Component& comp, const QuadratureOptions& opt, QuadratureStats* stats) {
    if (opt.resolution < 64) throw ArgumentError("source grid resolution must be at least 64 per axis");
    const Region& reg = *comp.region;
    const BBox b = reg.bbox();
    if (!b.bounded) throw ArgumentError("scene component is unbounded: " + reg.describe());
    const int N = opt.resolution;
    const double hx = b.width() / N, hy = b.height() / N;
    if (!(hx > 0 && hy > 0)) throw ArgumentError("scene component has an empty bounding box");
    const int C = N + 2;                // cells per axis after inflating by one cell
    const double x0 = b.xlo - hx, y0 = b.ylo - hy;
    std::vector<char> corner(static_cast<size_t>(C + 1) * (C + 1));
    for (int j = 0; j <= C; ++j)
        for (int i = 0; i <= C; ++i)
            corner[static_cast<size_t>(j) * (C + 1) + i] = reg.contains({x0 + i * hx, y0 + j * hy});

    kernels::Nodes nodes;
    size_t nboundary = 0;
    for (int j = 0; j < C; ++j) {
        for (int i = 0; i < C; ++i) {
            const size_t k = static_cast<size_t>(j) * (C + 1) + i;
            const bool in[4] = {corner[k] != 0, corner[k + 1] != 0, corner[k + C + 1] != 0,
                                corner[k + C + 2] != 0};
            const double cx = x0 + (i + 0.5) * hx, cy = y0 + (j + 0.5) * hy;
            const bool c = reg.contains({cx, cy});
            const bool all_in = in[0] && in[1] && in[2] && in[3] && c;
            const bool all_out = !in[0] && !in[1] && !in[2] && !in[3] && !c;
            if (all_out) continue;
            if (all_in) {
                nodes.x.push_back(cx);
                nodes.y.push_back(cy);
                nodes.w.push_back(comp.amplitude({cx, cy}) * (hx * hy));
                continue;
            }
            ++nboundary;
            CellSum acc;
            refine(reg, x0 + i * hx, y0 + j * hy, hx, hy, in, opt.refine_depth, acc);
            if (acc.area <= 0.0) continue;
            const Vec2 g{acc.mx / acc.area, acc.my / acc.area};
            nodes.x.push_back(g.x);
            nodes.y.push_back(g.y);
            nodes.w.push_back(comp.amplitude(g) * acc.area);
        }
    }
    if (stats) {
        stats->nodes += nodes.size();
        stats->boundary_cells += nboundary;
    }
    return nodes;
}

MeasurementSet synthesize_far_field(const SourceScene& scene, const ObservationSet& obs, const WaveBand& band,
                                    const QuadratureOptions& opt, QuadratureStats* stats) {
    if (!scene.bbox().bounded) throw ArgumentError("scene is unbounded");
    MeasurementSet ms(obs, band);
    const size_t L = obs.directions.size(), M = band.size();
    std::vector<double> dx(2 * L), dy(2 * L);
    for (size_t l = 0; l < L; ++l) {
        dx[2 * l] = obs.directions[l].x;
        dy[2 * l] = obs.directions[l].y;
        dx[2 * l + 1] = -obs.directions[l].x;
        dy[2 * l + 1] = -obs.directions[l].y;
    }
    QuadratureStats local;
    for (const auto& comp : scene.components) {
        const BBox b = comp.region->bbox();
        if (!b.bounded) throw ArgumentError("scene component is unbounded: " + comp.region->describe());
        const double h = std::max(b.width(), b.height()) / opt.resolution;
        const double per_wavelength = 2.0 * std::numbers::pi / band.kmax() / h;
        if (per_wavelength < 4.0) {
            std::ostringstream os;
            os << "source grid has " << per_wavelength << " nodes per wavelength at k=" << band.kmax()
               << " for " << comp.region->describe() << " (fewer than 4)";
            local.warnings.push_back(os.str());
        }
        const kernels::Nodes nodes = component_nodes(comp, opt, &local);
        kernels::SynthesisTask task{&nodes, &dx, &dy, M, band.dk()};
        // (l, sign) rows are laid out exactly as the kernel's direction index d = 2l + sign.
        if (opt.parallel) kernels::omp::synthesize(task, ms.values);
        else kernels::serial::synthesize(task, ms.values);
    }
    if (stats) *stats = local;
    return ms;
}

cplx disk_far_field_analytic(Vec2 center, double radius, cplx c, Vec2 xhat, double k) {
    if (!(k > 0)) throw ArgumentError("disk far field needs k > 0");
    if (!(radius > 0)) throw ArgumentError("disk far field needs a positive radius");
    const double kr = k * radius;
    // 2 pi R J1(kR)/k, written as pi R^2 * 2 J1(kR)/(kR) so that small k stays accurate
    const double shape = kr < 1e-8 ? 1.0 : 2.0 * bessel_j1(kr) / kr;
    return c * std::polar(1.0, -k * dot(xhat, center)) * (std::numbers::pi * radius * radius * shape);
}

MeasurementSet apply_noise(const MeasurementSet& clean, const NoiseModel& model) {
    if (!std::isfinite(model.delta) || model.delta < 0) throw ArgumentError("noise level delta must be finite and >= 0");
    if (model.systematic && (!std::isfinite(model.systematic->sigma) || model.systematic->sigma < 0 ||
                             !std::isfinite(model.systematic->mu)))
        throw ArgumentError("systematic noise needs finite mu and sigma >= 0");
    MeasurementSet out = clean;
    if (model.delta == 0.0 && !model.systematic) return out;
    NormalStream rng(model.seed);
    for (cplx& v : out.values) {  // storage order is the draw order
        const double X = rng.next(), Y = rng.next();
        v *= cplx(1.0 + model.delta * X, model.delta * Y);
        if (model.systematic) {
            const double a = rng.next(), b = rng.next();
            const auto& s = *model.systematic;
            v += cplx(s.mu + s.sigma * a, s.mu + s.sigma * b);
        }
    }
    return out;
}

std::string measurements_csv_text(const MeasurementSet& ms) {
    std::ostringstream os;
    os << "l,sign,m,k,re,im\n";
    for (size_t l = 0; l < ms.obs.directions.size(); ++l)
        for (Sign s : {Sign::Plus, Sign::Minus})
            for (size_t m = 0; m < ms.M(); ++m) {
                const cplx v = ms.at(l, s, m);
                os << l << ',' << (s == Sign::Plus ? '+' : '-') << ',' << (m + 1) << ',' << io::fmt17(ms.band.k(m))
                   << ',' << io::fmt17(v.real()) << ',' << io::fmt17(v.imag()) << '\n';
            }
    return os.str();
}

void write_measurements_csv(const MeasurementSet& ms, const std::string& path) {
    io::write_text(path, measurements_csv_text(ms));
}

MeasurementSet read_measurements_csv(const std::string& path, const ObservationSet& obs) {
    std::istringstream is(io::read_text(path));
    std::string line;
    if (!std::getline(is, line) || line != "l,sign,m,k,re,im") throw IoError(path + ": bad measurement header");
    std::vector<std::tuple<size_t, Sign, size_t, cplx>> rows;
    size_t maxm = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = io::split(line, ',');
        if (f.size() != 6 || (f[1] != "+" && f[1] != "-")) throw IoError(path + ": malformed row '" + line + "'");
        size_t l = std::stoul(f[0]), m = std::stoul(f[2]);
        if (m == 0 || l >= obs.directions.size()) throw IoError(path + ": index out of range in '" + line + "'");
        rows.emplace_back(l, f[1] == "+" ? Sign::Plus : Sign::Minus, m - 1, cplx(std::stod(f[4]), std::stod(f[5])));
        maxm = std::max(maxm, m);
    }
    if (maxm % 2 != 0) throw IoError(path + ": wavenumber count must be even (k_m = m/2 up to Lambda)");
    MeasurementSet ms(obs, WaveBand(static_cast<int>(maxm / 2)));
    if (rows.size() != ms.values.size()) throw IoError(path + ": expected " + std::to_string(ms.values.size()) + " rows");
    for (auto& [l, s, m, v] : rows) ms.at(l, s, m) = v;
    return ms;
}

}  // namespace srcimg
