#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srcimg/forward.hpp"
#include "srcimg/indicators.hpp"
#include "srcimg/profile.hpp"

namespace srcimg {

struct DetectedLine {
    size_t dir = 0;  // index into the observation set
    Vec2 xhat;
    double s0 = 0.0;
    JumpClass cls = JumpClass::Finite;
    double magnitude = 0.0;
};

struct Corner {
    Vec2 p;
    int votes = 0;
};

struct FittedCircle {
    Vec2 center;
    double radius = 0.0;
    int support = 0;
};

struct AnnulusEstimate {
    Vec2 center;
    double r = 0.0, R = 0.0;  // r == 0 for a disk
};

enum class EdgeVerdict { Accepted, Rejected, Undecided };

struct EdgeResult {
    size_t a = 0, b = 0;  // corner indices
    EdgeVerdict verdict = EdgeVerdict::Undecided;
    std::string reason;
    double measured = 0.0;   // |[[I']]| at the test direction
    double threshold = 0.0;  // fake-edge bound
    double test_angle = 0.0;
    int test_lambda = 0;
};

enum class ValueFlag { Signed, MagnitudeOnly, Indeterminate };

struct CornerValue {
    size_t corner = 0;
    cplx value;
    ValueFlag flag = ValueFlag::Indeterminate;
};

enum class LineEstimator { Atoms, Peaks };

struct RecoverOptions {
    LineEstimator estimator = LineEstimator::Atoms;
    DetectOptions detect;
    AtomFitOptions atoms;
    double tangent_exclusion = 2.0;  // finite lines within this many h_s of a fitted circle's tangent are dropped
    SamplingGrid grid;  // vote accumulator
    double eps_d = 0.02;
    double rho = 0.6;
    double eps_r = 0.05;
    double eps_c = 0.05;
    int min_support = 3;
    // Fit the assembled disks and annuluses (constant amplitude) to the data and look for
    // corners in what remains.
    bool peel_annuluses = true;
};

// One DetectedLine per jump event (per-direction lists indexed like the observation set).
std::vector<DetectedLine> extract_lines(const std::vector<std::vector<JumpEvent>>& jumps,
                                        const ObservationSet& obs);
// Detection from data: Blowup lines from detect_jumps, Finite lines from the configured
// estimator.
std::vector<DetectedLine> extract_lines(const MeasurementSet& ms, const RecoverOptions& opt);

struct VoteResult {
    std::vector<Corner> corners;
    std::vector<int> counts;  // per cell, q*P + p
    int quorum = 0;
    std::vector<std::string> warnings;
};

// Uses only Finite lines.
VoteResult vote_corners(const std::vector<DetectedLine>& lines, size_t L, const SamplingGrid& grid, double rho,
                        double eps_d, bool parallel = true);

// Uses only Blowup lines; each line supports at most one circle.
std::vector<FittedCircle> assemble_circles(const std::vector<DetectedLine>& lines, double eps_r, double eps_c,
                                           int min_support = 3);

// Removes Finite lines lying within tol of a tangent line of any circle.
std::vector<DetectedLine> drop_tangent_lines(const std::vector<DetectedLine>& lines,
                                             const std::vector<FittedCircle>& circles, double tol);

std::vector<AnnulusEstimate> pair_annuluses(const std::vector<FittedCircle>& circles, double eps_c);

struct PeelResult {
    MeasurementSet residual;
    std::vector<AnnulusEstimate> refined;
    std::vector<cplx> amplitudes;
};

// Least-squares fit of constant-amplitude annuluses (disks when r == 0) to the data,
// starting from the given estimates; the residual is the data minus the fitted far fields.
PeelResult peel_annuluses(const MeasurementSet& ms, const std::vector<AnnulusEstimate>& start);

// Jump [[I']](x.P) per unit amplitude for a corner whose interior is the sector swept
// counter-clockwise from direction e1 to direction e2.
double corner_factor(Vec2 e1, Vec2 e2, Vec2 xhat);

// Complex jumps of I' at the given offsets of direction l: atoms at the offsets (plus any
// nuisance offsets) fitted by least squares, jump = -(A + B)/2.
std::vector<cplx> jumps_at(const MeasurementSet& ms, size_t l, const std::vector<double>& offsets,
                           const std::vector<double>& nuisance = {});

// Smallest pairwise gap of the corner projections onto xhat.
double projection_gap(const std::vector<Vec2>& corners, Vec2 xhat);

// Seeded sequence of angles; the first direction whose corner projections are pairwise at
// least min_gap apart.
std::optional<Vec2> generic_direction(const std::vector<Vec2>& corners, double min_gap, std::uint64_t seed,
                                      int max_draws = 1000);

// Counter-clockwise boundary cycles formed by accepted edges (each corner of degree two).
std::vector<std::vector<size_t>> edge_cycles(size_t ncorners, const std::vector<EdgeResult>& edges);

// f at each corner from the data of a generic direction l0 of ms.
std::vector<CornerValue> corner_values(const std::vector<Vec2>& corners, const std::vector<EdgeResult>& edges,
                                       const MeasurementSet& ms, size_t l0);

// Synthesizes far-field data for the requested directions and band (simulation only).
using MeasurementOracle = std::function<MeasurementSet(const ObservationSet&, const WaveBand&)>;

struct EdgeOptions {
    int lambda = 30;         // band of the first test direction
    int lambda_cap = 120;    // largest band tried for separation
    double min_sep_steps = 3.0;
    int budget = 0;          // 0: 1 + N(N-1)/2
    std::uint64_t seed = 1;
};

std::vector<EdgeResult> identify_edges(const std::vector<Vec2>& corners, const MeasurementOracle* oracle,
                                       const EdgeOptions& opt = {});

struct ReconstructionReport {
    std::vector<DetectedLine> lines;
    std::vector<Corner> corners;
    std::vector<FittedCircle> circles;
    std::vector<AnnulusEstimate> annuluses;
    std::vector<EdgeResult> edges;
    std::vector<CornerValue> corner_values;
    int quorum = 0;
    std::vector<std::string> warnings;
};

// Full pipeline: lines, circles and annuluses, corner voting on the lines not explained by
// circles, then edges and corner values. Without an oracle the edges stay undecided and
// corner values come from the best-separating measured direction.
ReconstructionReport reconstruct(const MeasurementSet& ms, const RecoverOptions& opt,
                                 const MeasurementOracle* oracle = nullptr, const EdgeOptions& eopt = {});

}  // namespace srcimg
