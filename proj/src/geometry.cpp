#include "srcimg/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "srcimg/errors.hpp"

namespace srcimg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IntervalList normalize(IntervalList v) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    IntervalList out;
    for (const auto& iv : v) {
        if (!(iv.hi >= iv.lo)) continue;
        if (!out.empty() && iv.lo <= out.back().hi) out.back().hi = std::max(out.back().hi, iv.hi);
        else out.push_back(iv);
    }
    return out;
}

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
           d4 != 0;
}

std::string fmt_pt(Vec2 p) {
    std::ostringstream os;
    os << "(" << p.x << "," << p.y << ")";
    return os.str();
}

}  // namespace

void require_unit(Vec2 xhat) {
    if (std::abs(norm(xhat) - 1.0) > 1e-9)
        throw ArgumentError("direction " + fmt_pt(xhat) + " is not unit-norm");
}

IntervalList unite(const IntervalList& a, const IntervalList& b) {
    IntervalList v = a;
    v.insert(v.end(), b.begin(), b.end());
    return normalize(std::move(v));
}

IntervalList intersect(const IntervalList& a, const IntervalList& b) {
    IntervalList out;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double lo = std::max(a[i].lo, b[j].lo), hi = std::min(a[i].hi, b[j].hi);
        if (lo <= hi) out.push_back({lo, hi});
        if (a[i].hi < b[j].hi) ++i;
        else ++j;
    }
    return out;
}

IntervalList complement(const IntervalList& a) {
    IntervalList out;
    double cur = -kInf;
    for (const auto& iv : a) {
        if (iv.lo > cur) out.push_back({cur, iv.lo});
        cur = std::max(cur, iv.hi);
    }
    if (cur < kInf) out.push_back({cur, kInf});
    return out;
}

// ---------------------------------------------------------------- Polygon

Polygon::Polygon(std::vector<Vec2> vertices) : v_(std::move(vertices)) {
    if (v_.size() >= 2 && v_.front() == v_.back()) v_.pop_back();
    if (v_.size() < 3) throw ArgumentError("polygon needs at least 3 vertices");
    double a = area();
    if (!(std::abs(a) > 1e-14)) throw ArgumentError("polygon has zero area");
    if (a < 0) std::reverse(v_.begin(), v_.end());
    const size_t n = v_.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_cross(v_[i], v_[(i + 1) % n], v_[j], v_[(j + 1) % n]))
                throw ArgumentError("polygon is self-intersecting");
        }
}

double Polygon::area() const {
    double s = 0.0;
    for (size_t i = 0; i < v_.size(); ++i) s += cross(v_[i], v_[(i + 1) % v_.size()]);
    return 0.5 * s;
}

bool Polygon::contains(Vec2 p) const {
    const size_t n = v_.size();
    bool in = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        Vec2 a = v_[j], b = v_[i];
        // on-edge test first: boundary counts as inside
        Vec2 ab = b - a, ap = p - a;
        double cr = cross(ab, ap);
        if (std::abs(cr) <= 1e-12 * (norm(ab) + 1.0)) {
            double t = dot(ap, ab);
            if (t >= 0 && t <= dot(ab, ab)) return true;
        }
        if ((a.y > p.y) != (b.y > p.y)) {
            double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xc) in = !in;
        }
    }
    return in;
}

BBox Polygon::bbox() const {
    BBox b{kInf, -kInf, kInf, -kInf, true};
    for (auto p : v_) {
        b.xlo = std::min(b.xlo, p.x);
        b.xhi = std::max(b.xhi, p.x);
        b.ylo = std::min(b.ylo, p.y);
        b.yhi = std::max(b.yhi, p.y);
    }
    return b;
}

IntervalList Polygon::chord(Vec2 xhat, double s) const {
    const Vec2 t = perp(xhat);
    std::vector<double> cuts;
    const size_t n = v_.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 a = v_[i], b = v_[(i + 1) % n];
        double da = dot(xhat, a) - s, db = dot(xhat, b) - s;
        if ((da < 0) != (db < 0)) {
            double w = da / (da - db);
            cuts.push_back(dot(t, a) + w * (dot(t, b) - dot(t, a)));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    IntervalList out;
    for (size_t i = 0; i + 1 < cuts.size(); i += 2) out.push_back({cuts[i], cuts[i + 1]});
    return normalize(std::move(out));
}

std::vector<Segment> Polygon::edge_candidates() const {
    std::vector<Segment> e;
    for (size_t i = 0; i < v_.size(); ++i) e.push_back({v_[i], v_[(i + 1) % v_.size()]});
    return e;
}

std::string Polygon::describe() const {
    std::string s = "polygon[";
    for (size_t i = 0; i < v_.size(); ++i) s += (i ? "," : "") + fmt_pt(v_[i]);
    return s + "]";
}

// ---------------------------------------------------------------- Annulus

Annulus::Annulus(Vec2 center, double r, double R) : c_(center), r_(r), R_(R) {
    if (!(r >= 0.0) || !(R > r)) throw ArgumentError("annulus needs 0 <= r < R");
}

bool Annulus::contains(Vec2 p) const {
    double d = norm(p - c_);
    return d <= R_ && d >= r_;
}

BBox Annulus::bbox() const { return {c_.x - R_, c_.x + R_, c_.y - R_, c_.y + R_, true}; }

IntervalList Annulus::chord(Vec2 xhat, double s) const {
    double d = s - dot(xhat, c_);
    if (std::abs(d) > R_) return {};
    double t0 = dot(perp(xhat), c_);
    double hR = std::sqrt(R_ * R_ - d * d);
    if (std::abs(d) < r_) {
        double hr = std::sqrt(r_ * r_ - d * d);
        return {{t0 - hR, t0 - hr}, {t0 + hr, t0 + hR}};
    }
    return {{t0 - hR, t0 + hR}};
}

std::vector<Circle> Annulus::circle_candidates() const {
    std::vector<Circle> c;
    if (r_ > 0) c.push_back({c_, r_});
    c.push_back({c_, R_});
    return c;
}

std::string Annulus::describe() const {
    std::ostringstream os;
    os << "annulus[c=" << fmt_pt(c_) << ",r=" << r_ << ",R=" << R_ << "]";
    return os.str();
}

// ---------------------------------------------------------------- SetExpression

SetExpression::SetExpression(Op op, std::vector<RegionPtr> children) : op_(op), kids_(std::move(children)) {
    if (kids_.empty()) throw ArgumentError("set expression without operands");
    if (op_ == Op::Complement && kids_.size() != 1) throw ArgumentError("complement takes one operand");
}

bool SetExpression::contains(Vec2 p) const {
    switch (op_) {
        case Op::Union:
            return std::any_of(kids_.begin(), kids_.end(), [&](const RegionPtr& r) { return r->contains(p); });
        case Op::Intersection:
            return std::all_of(kids_.begin(), kids_.end(), [&](const RegionPtr& r) { return r->contains(p); });
        case Op::Complement:
            return !kids_[0]->contains(p);
    }
    return false;
}

BBox SetExpression::bbox() const {
    if (op_ == Op::Complement) return BBox::unbounded();
    if (op_ == Op::Union) {
        BBox b{kInf, -kInf, kInf, -kInf, true};
        for (const auto& k : kids_) {
            BBox c = k->bbox();
            if (!c.bounded) return BBox::unbounded();
            b = {std::min(b.xlo, c.xlo), std::max(b.xhi, c.xhi), std::min(b.ylo, c.ylo),
                 std::max(b.yhi, c.yhi), true};
        }
        return b;
    }
    BBox b{-kInf, kInf, -kInf, kInf, false};
    for (const auto& k : kids_) {
        BBox c = k->bbox();
        if (!c.bounded) continue;
        b = {std::max(b.xlo, c.xlo), std::min(b.xhi, c.xhi), std::max(b.ylo, c.ylo),
             std::min(b.yhi, c.yhi), true};
    }
    if (b.bounded && (b.xlo > b.xhi || b.ylo > b.yhi)) b = {0, 0, 0, 0, true};
    return b;
}

IntervalList SetExpression::chord(Vec2 xhat, double s) const {
    switch (op_) {
        case Op::Union: {
            IntervalList acc;
            for (const auto& k : kids_) acc = unite(acc, k->chord(xhat, s));
            return acc;
        }
        case Op::Intersection: {
            IntervalList acc = kids_[0]->chord(xhat, s);
            for (size_t i = 1; i < kids_.size(); ++i) acc = intersect(acc, kids_[i]->chord(xhat, s));
            // drop zero-length pieces left by touching boundaries
            IntervalList out;
            for (auto iv : acc)
                if (iv.hi > iv.lo) out.push_back(iv);
            return out;
        }
        case Op::Complement:
            return complement(kids_[0]->chord(xhat, s));
    }
    return {};
}

std::vector<Vec2> SetExpression::corner_candidates() const {
    std::vector<Vec2> pts;
    for (const auto& k : kids_) {
        auto c = k->corner_candidates();
        pts.insert(pts.end(), c.begin(), c.end());
    }
    // crossings between edges of different operands
    for (size_t i = 0; i < kids_.size(); ++i)
        for (size_t j = i + 1; j < kids_.size(); ++j)
            for (const auto& e : kids_[i]->edge_candidates())
                for (const auto& f : kids_[j]->edge_candidates()) {
                    Vec2 r = e.b - e.a, q = f.b - f.a;
                    double den = cross(r, q);
                    if (std::abs(den) < 1e-14) continue;
                    double t = cross(f.a - e.a, q) / den, u = cross(f.a - e.a, r) / den;
                    if (t >= 0 && t <= 1 && u >= 0 && u <= 1) pts.push_back(e.a + r * t);
                }
    return pts;
}

std::vector<Segment> SetExpression::edge_candidates() const {
    std::vector<Segment> e;
    for (const auto& k : kids_) {
        auto c = k->edge_candidates();
        e.insert(e.end(), c.begin(), c.end());
    }
    return e;
}

std::vector<Circle> SetExpression::circle_candidates() const {
    std::vector<Circle> e;
    for (const auto& k : kids_) {
        auto c = k->circle_candidates();
        e.insert(e.end(), c.begin(), c.end());
    }
    return e;
}

std::string SetExpression::describe() const {
    std::string s = op_ == Op::Union ? "union(" : op_ == Op::Intersection ? "intersection(" : "complement(";
    for (size_t i = 0; i < kids_.size(); ++i) s += (i ? "," : "") + kids_[i]->describe();
    return s + ")";
}

RegionPtr make_union(std::vector<RegionPtr> r) {
    return std::make_shared<SetExpression>(SetExpression::Op::Union, std::move(r));
}
RegionPtr make_intersection(std::vector<RegionPtr> r) {
    return std::make_shared<SetExpression>(SetExpression::Op::Intersection, std::move(r));
}
RegionPtr make_complement(RegionPtr r) {
    return std::make_shared<SetExpression>(SetExpression::Op::Complement, std::vector<RegionPtr>{std::move(r)});
}

// ---------------------------------------------------------------- Implicit

Implicit::Implicit(Expr g, BBox box) : g_(std::move(g)), box_(box) {
    if (g_.empty()) throw ArgumentError("implicit region needs an expression");
    if (!box_.bounded || !(box_.xhi > box_.xlo) || !(box_.yhi > box_.ylo))
        throw ArgumentError("implicit region needs a non-empty bounding box");
}

bool Implicit::contains(Vec2 p) const {
    if (p.x < box_.xlo || p.x > box_.xhi || p.y < box_.ylo || p.y > box_.yhi) return false;
    return g_(p.x, p.y) <= 0.0;
}

IntervalList Implicit::chord(Vec2 xhat, double s) const {
    // clip the line to the box, then bracket sign changes of g
    const Vec2 t = perp(xhat), o = xhat * s;
    double lo = -kInf, hi = kInf;
    auto clip = [&](double o1, double d1, double a, double b) {
        if (std::abs(d1) < 1e-300) {
            if (o1 < a || o1 > b) {
                lo = 1;
                hi = 0;
            }
            return;
        }
        double u = (a - o1) / d1, v = (b - o1) / d1;
        if (u > v) std::swap(u, v);
        lo = std::max(lo, u);
        hi = std::min(hi, v);
    };
    clip(o.x, t.x, box_.xlo, box_.xhi);
    clip(o.y, t.y, box_.ylo, box_.yhi);
    if (!(hi > lo)) return {};
    auto inside = [&](double tau) {
        Vec2 p = o + t * tau;
        return g_(p.x, p.y) <= 0.0;
    };
    auto refine = [&](double a, double b) {
        bool ia = inside(a);
        while (b - a > 1e-10) {
            double m = 0.5 * (a + b);
            if (inside(m) == ia) a = m;
            else b = m;
        }
        return 0.5 * (a + b);
    };
    const int n = 512;
    IntervalList out;
    double prev = lo;
    bool pin = inside(lo);
    double start = pin ? lo : 0.0;
    for (int i = 1; i <= n; ++i) {
        double cur = lo + (hi - lo) * i / n;
        bool cin = inside(cur);
        if (cin != pin) {
            double c = refine(prev, cur);
            if (cin) start = c;
            else out.push_back({start, c});
        }
        prev = cur;
        pin = cin;
    }
    if (pin) out.push_back({start, hi});
    return out;
}

std::string Implicit::describe() const { return "implicit[" + g_.text() + " <= 0]"; }

// ---------------------------------------------------------------- Amplitude / scene

cplx Amplitude::operator()(Vec2 y) const {
    switch (kind) {
        case Kind::Constant: return c;
        case Kind::RadialExponential: return std::exp(a * dot(y, y));
        case Kind::RadialAffine: return norm(y) + c;
        case Kind::Expression: return expr(y.x, y.y);
    }
    return 0.0;
}

std::string Amplitude::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Constant: os << "constant(" << c.real() << "," << c.imag() << ")"; break;
        case Kind::RadialExponential: os << "exp(" << a << "*|y|^2)"; break;
        case Kind::RadialAffine: os << "|y|+" << c.real(); break;
        case Kind::Expression: os << "expr(" << expr.text() << ")"; break;
    }
    return os.str();
}

BBox SourceScene::bbox() const {
    BBox b{kInf, -kInf, kInf, -kInf, true};
    if (components.empty()) return {0, 0, 0, 0, true};
    for (const auto& c : components) {
        BBox r = c.region->bbox();
        if (!r.bounded) return BBox::unbounded();
        b = {std::min(b.xlo, r.xlo), std::max(b.xhi, r.xhi), std::min(b.ylo, r.ylo), std::max(b.yhi, r.yhi),
             true};
    }
    return b;
}

bool SourceScene::real_valued() const {
    for (const auto& c : components)
        if (c.amplitude.kind == Amplitude::Kind::Constant && c.amplitude.c.imag() != 0.0) return false;
    return true;
}

bool contains(const Region& region, Vec2 p) { return region.contains(p); }

cplx evaluate_source(const SourceScene& scene, Vec2 p) {
    cplx v = 0.0;
    for (const auto& c : scene.components)
        if (c.region->contains(p)) v += c.amplitude(p);
    return v;
}

IntervalList line_support_intersections(const SourceScene& scene, Vec2 xhat, double s) {
    require_unit(xhat);
    IntervalList acc;
    for (const auto& c : scene.components) acc = unite(acc, c.region->chord(xhat, s));
    return acc;
}

std::pair<double, double> tangent_offsets(const Circle& c, Vec2 xhat) {
    if (!(c.radius > 0)) throw ArgumentError("tangent_offsets needs a positive radius");
    double m = dot(xhat, c.center);
    return {m - c.radius, m + c.radius};
}

double local_inside_fraction(const SourceScene& scene, Vec2 p, double radius, int samples) {
    int in = 0;
    for (int i = 0; i < samples; ++i) {
        double t = 2.0 * std::numbers::pi * (i + 0.5) / samples;
        Vec2 q = p + unit_from_angle(t) * radius;
        for (const auto& c : scene.components)
            if (c.region->contains(q)) {
                ++in;
                break;
            }
    }
    return static_cast<double>(in) / samples;
}

GroundTruth ground_truth(const SourceScene& scene) {
    GroundTruth gt;
    auto scale = [&] {
        BBox b = scene.bbox();
        return b.bounded ? std::max({1.0, b.width(), b.height()}) : 1.0;
    }();
    const double rho = 1e-7 * scale;
    for (const auto& comp : scene.components) {
        for (Vec2 p : comp.region->corner_candidates()) {
            double fr = local_inside_fraction(scene, p, rho);
            if (fr <= 0.0 || fr >= 1.0 || std::abs(fr - 0.5) < 0.01) continue;
            bool dup = false;
            for (auto q : gt.corners)
                if (norm(p - q) < 1e-9 * scale) dup = true;
            if (!dup) gt.corners.push_back(p);
        }
        for (const Circle& c : comp.region->circle_candidates()) {
            int on = 0;
            for (int i = 0; i < 16; ++i) {
                Vec2 p = c.center + unit_from_angle(2.0 * std::numbers::pi * (i + 0.5) / 16) * c.radius;
                double fr = local_inside_fraction(scene, p, rho, 64);
                if (fr > 0.0 && fr < 1.0) ++on;
            }
            if (on >= 8) gt.circles.push_back(c);
        }
    }
    // edges: corner pairs whose connecting segment is boundary and passes no other corner
    const auto& P = gt.corners;
    for (size_t i = 0; i < P.size(); ++i)
        for (size_t j = i + 1; j < P.size(); ++j) {
            Vec2 d = P[j] - P[i];
            double len = norm(d);
            bool ok = true;
            for (size_t k = 0; k < P.size() && ok; ++k) {
                if (k == i || k == j) continue;
                Vec2 q = P[k] - P[i];
                double t = dot(q, d) / (len * len);
                if (t > 0 && t < 1 && std::abs(cross(d, q)) / len < 1e-9 * scale) ok = false;
            }
            for (int m = 1; m <= 7 && ok; ++m) {
                Vec2 p = P[i] + d * (m / 8.0);
                double fr = local_inside_fraction(scene, p, rho, 64);
                if (fr <= 0.0 || fr >= 1.0) ok = false;
                else {
                    // boundary point: a straight edge along d has inside samples on one side only
                    Vec2 nrm = perp(d) * (rho / len);
                    bool a = false, b = false;
                    for (const auto& c : scene.components) {
                        a = a || c.region->contains(p + nrm);
                        b = b || c.region->contains(p - nrm);
                    }
                    if (a == b) ok = false;
                }
            }
            if (ok) gt.edges.push_back({P[i], P[j]});
        }
    return gt;
}

std::vector<std::string> validate_scene(const SourceScene& scene, std::uint64_t seed, int samples) {
    std::vector<std::string> warnings;
    BBox b = scene.bbox();
    if (!b.bounded) throw ConfigError("scene", "unbounded scene (complement at top level?)");
    if (scene.components.size() > 1) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> ux(b.xlo, b.xhi), uy(b.ylo, b.yhi);
        int overlaps = 0;
        for (int i = 0; i < samples; ++i) {
            Vec2 p{ux(rng), uy(rng)};
            int n = 0;
            for (const auto& c : scene.components) n += c.region->contains(p) ? 1 : 0;
            if (n > 1) ++overlaps;
        }
        if (overlaps > 0)
            warnings.push_back("components overlap at " + std::to_string(overlaps) + " of " +
                               std::to_string(samples) + " sample points");
    }
    // boundary amplitude check at chord endpoints along a fan of lines
    for (size_t ci = 0; ci < scene.components.size(); ++ci) {
        const auto& c = scene.components[ci];
        BBox r = c.region->bbox();
        Vec2 mid{0.5 * (r.xlo + r.xhi), 0.5 * (r.ylo + r.yhi)};
        double rad = 0.5 * std::hypot(r.width(), r.height());
        for (int d = 0; d < 12; ++d) {
            Vec2 xh = unit_from_angle(std::numbers::pi * (d + 0.37) / 12);
            for (int j = 1; j < 12; ++j) {
                double s = dot(xh, mid) + rad * (2.0 * j / 12 - 1.0);
                for (const auto& iv : c.region->chord(xh, s))
                    for (double tau : {iv.lo, iv.hi}) {
                        Vec2 p = xh * s + perp(xh) * tau;
                        if (std::abs(c.amplitude(p)) < 1e-12)
                            throw ConfigError("scene.components[" + std::to_string(ci) + "]",
                                              "amplitude vanishes on the boundary at " + fmt_pt(p));
                    }
            }
        }
    }
    return warnings;
}

}  // namespace srcimg
