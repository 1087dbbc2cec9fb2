#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "srcimg/expr.hpp"

namespace srcimg {

using cplx = std::complex<double>;

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double a) const { return {x * a, y * a}; }
    Vec2 operator-() const { return {-x, -y}; }
    bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
// Counter-clockwise rotation by 90 degrees; the tau axis of a line s*xhat + tau*perp(xhat).
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 unit_from_angle(double t) { return {std::cos(t), std::sin(t)}; }

struct Interval {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
};
using IntervalList = std::vector<Interval>;

IntervalList unite(const IntervalList& a, const IntervalList& b);
IntervalList intersect(const IntervalList& a, const IntervalList& b);
IntervalList complement(const IntervalList& a);

struct BBox {
    double xlo = 0.0, xhi = 0.0, ylo = 0.0, yhi = 0.0;
    bool bounded = true;

    static BBox unbounded() { return {0, 0, 0, 0, false}; }
    double width() const { return xhi - xlo; }
    double height() const { return yhi - ylo; }
};

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

struct Segment {
    Vec2 a, b;
};

class Region {
public:
    virtual ~Region() = default;
    // Boundary points count as inside.
    virtual bool contains(Vec2 p) const = 0;
    virtual BBox bbox() const = 0;
    // Sorted disjoint tau-intervals of the line {s*xhat + tau*perp(xhat)} inside the region.
    virtual IntervalList chord(Vec2 xhat, double s) const = 0;
    // Points that may be corners of the region boundary (polygon vertices, edge crossings).
    virtual std::vector<Vec2> corner_candidates() const { return {}; }
    virtual std::vector<Segment> edge_candidates() const { return {}; }
    virtual std::vector<Circle> circle_candidates() const { return {}; }
    virtual std::string describe() const = 0;
};

using RegionPtr = std::shared_ptr<const Region>;

class Polygon final : public Region {
public:
    // Vertices are reordered to counter-clockwise if given clockwise.
    explicit Polygon(std::vector<Vec2> vertices);
    bool contains(Vec2 p) const override;
    BBox bbox() const override;
    IntervalList chord(Vec2 xhat, double s) const override;
    std::vector<Vec2> corner_candidates() const override { return v_; }
    std::vector<Segment> edge_candidates() const override;
    std::string describe() const override;
    const std::vector<Vec2>& vertices() const { return v_; }
    double area() const;

private:
    std::vector<Vec2> v_;
};

class Annulus final : public Region {
public:
    Annulus(Vec2 center, double r, double R);
    bool contains(Vec2 p) const override;
    BBox bbox() const override;
    IntervalList chord(Vec2 xhat, double s) const override;
    std::vector<Circle> circle_candidates() const override;
    std::string describe() const override;
    Vec2 center() const { return c_; }
    double inner() const { return r_; }
    double outer() const { return R_; }

private:
    Vec2 c_;
    double r_, R_;
};

class SetExpression final : public Region {
public:
    enum class Op { Union, Intersection, Complement };
    SetExpression(Op op, std::vector<RegionPtr> children);
    bool contains(Vec2 p) const override;
    BBox bbox() const override;
    IntervalList chord(Vec2 xhat, double s) const override;
    std::vector<Vec2> corner_candidates() const override;
    std::vector<Segment> edge_candidates() const override;
    std::vector<Circle> circle_candidates() const override;
    std::string describe() const override;

private:
    Op op_;
    std::vector<RegionPtr> kids_;
};

// {y : g(y) <= 0} restricted to a caller-supplied bounding box.
class Implicit final : public Region {
public:
    Implicit(Expr g, BBox box);
    bool contains(Vec2 p) const override;
    BBox bbox() const override { return box_; }
    IntervalList chord(Vec2 xhat, double s) const override;
    std::string describe() const override;

private:
    Expr g_;
    BBox box_;
};

RegionPtr make_union(std::vector<RegionPtr> r);
RegionPtr make_intersection(std::vector<RegionPtr> r);
RegionPtr make_complement(RegionPtr r);

struct Amplitude {
    enum class Kind { Constant, RadialExponential, RadialAffine, Expression } kind = Kind::Constant;
    cplx c{1.0, 0.0};  // constant value, or additive constant for RadialAffine
    double a = 0.0;    // exponent scale for RadialExponential
    Expr expr;

    static Amplitude constant(cplx v) { return {Kind::Constant, v, 0.0, {}}; }
    static Amplitude radial_exponential(double a) { return {Kind::RadialExponential, 1.0, a, {}}; }
    static Amplitude radial_affine(double c) { return {Kind::RadialAffine, c, 0.0, {}}; }
    static Amplitude expression(Expr e) { return {Kind::Expression, 1.0, 0.0, std::move(e)}; }

    cplx operator()(Vec2 y) const;
    bool is_constant() const { return kind == Kind::Constant; }
    std::string describe() const;
};

struct Component {
    RegionPtr region;
    Amplitude amplitude;
};

struct SourceScene {
    std::vector<Component> components;

    BBox bbox() const;
    bool real_valued() const;
};

struct GroundTruth {
    std::vector<Vec2> corners;
    std::vector<Circle> circles;
    std::vector<Segment> edges;
};

bool contains(const Region& region, Vec2 p);
cplx evaluate_source(const SourceScene& scene, Vec2 p);
IntervalList line_support_intersections(const SourceScene& scene, Vec2 xhat, double s);
std::pair<double, double> tangent_offsets(const Circle& c, Vec2 xhat);

// Fraction of a tiny circle around p that lies inside the scene support.
double local_inside_fraction(const SourceScene& scene, Vec2 p, double radius = 1e-7, int samples = 720);
GroundTruth ground_truth(const SourceScene& scene);

// Non-fatal problems found by rejection sampling (overlaps, vanishing boundary amplitude).
std::vector<std::string> validate_scene(const SourceScene& scene, std::uint64_t seed = 12345,
                                        int samples = 10000);

void require_unit(Vec2 xhat);

}  // namespace srcimg
