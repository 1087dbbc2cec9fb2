#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "srcimg/geometry.hpp"
#include "srcimg/kernels.hpp"

namespace srcimg {

struct ObservationSet {
    int L = 0;
    double gamma = 2.0;
    std::vector<Vec2> directions;

    // Direction l has angle (gamma*l - 0.7L)*pi/L.
    static ObservationSet make(int L, double gamma = 2.0);
    // Arbitrary directions (used for single test directions); checked for unit norm and
    // pairwise non-collinearity.
    static ObservationSet from_directions(std::vector<Vec2> dirs);
};

struct WaveBand {
    int Lambda = 0;

    explicit WaveBand(int lambda = 30);
    size_t size() const { return static_cast<size_t>(2 * Lambda); }
    double k(size_t m) const { return 0.5 * static_cast<double>(m + 1); }  // m is 0-based
    double dk() const { return 0.5; }
    double kmax() const { return static_cast<double>(Lambda); }
};

enum class Sign { Plus = 0, Minus = 1 };

struct MeasurementSet {
    ObservationSet obs;
    WaveBand band;
    std::vector<cplx> values;  // index ((l*2 + sign)*M + m)

    MeasurementSet() = default;
    MeasurementSet(ObservationSet o, WaveBand b);

    size_t M() const { return band.size(); }
    size_t index(size_t l, Sign s, size_t m) const {
        return (l * 2 + static_cast<size_t>(s)) * M() + m;
    }
    cplx& at(size_t l, Sign s, size_t m) { return values[index(l, s, m)]; }
    const cplx& at(size_t l, Sign s, size_t m) const { return values[index(l, s, m)]; }
    // Contiguous row of M values for one signed direction.
    const cplx* row(size_t l, Sign s) const { return values.data() + index(l, s, 0); }

    MeasurementSet subset(const std::vector<size_t>& dirs) const;
};

struct Systematic {
    double mu = 0.0;
    double sigma = 0.0;
};

struct NoiseModel {
    double delta = 0.0;
    std::optional<Systematic> systematic;
    std::uint64_t seed = 0;
};

// Standard normal draws from mt19937_64 through the basic Box-Muller transform. Each draw
// consumes two engine outputs u1 = (a>>11 + 1)/2^53 in (0,1], u2 = (b>>11)/2^53 and
// returns sqrt(-2 ln u1) cos(2 pi u2). The second Box-Muller variate is discarded, which
// keeps the stream position a simple function of the number of draws.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : eng_(seed) {}
    double next();

private:
    std::mt19937_64 eng_;
};

struct QuadratureOptions {
    int resolution = 1200;  // cells per axis over each component's bounding box
    int refine_depth = 6;   // quadtree levels below a boundary cell
    bool parallel = true;
};

struct QuadratureStats {
    size_t nodes = 0;
    size_t boundary_cells = 0;
    std::vector<std::string> warnings;
};

// Quadrature nodes of one component: cell-centred midpoint rule over the component box
// inflated by one cell; cells cut by the boundary are replaced by a single node at the
// centroid of the inside part found by quadtree refinement, weighted by its area.
kernels::Nodes component_nodes(const Component& c, const QuadratureOptions& opt,
                               QuadratureStats* stats = nullptr);

MeasurementSet synthesize_far_field(const SourceScene& scene, const ObservationSet& obs,
                                    const WaveBand& band, const QuadratureOptions& opt = {},
                                    QuadratureStats* stats = nullptr);

cplx disk_far_field_analytic(Vec2 center, double radius, cplx c, Vec2 xhat, double k);

// Sequential in draw order (l ascending, + before -, m ascending); per entry X, Y then
// the systematic pair.
MeasurementSet apply_noise(const MeasurementSet& clean, const NoiseModel& model);

std::string measurements_csv_text(const MeasurementSet& ms);
void write_measurements_csv(const MeasurementSet& ms, const std::string& path);
// Directions are not stored in the CSV; the caller supplies the observation set.
MeasurementSet read_measurements_csv(const std::string& path, const ObservationSet& obs);

}  // namespace srcimg
