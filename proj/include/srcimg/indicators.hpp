#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "srcimg/forward.hpp"

namespace srcimg {

// Rectangle of probe points; p indexes x, q indexes y, both 0-based and ascending.
struct SamplingGrid {
    double xlo = -3, xhi = 3, ylo = -3, yhi = 3;
    size_t P = 601, Q = 601;

    double x(size_t p) const { return xlo + (xhi - xlo) * static_cast<double>(p) / static_cast<double>(P - 1); }
    double y(size_t q) const { return ylo + (yhi - ylo) * static_cast<double>(q) / static_cast<double>(Q - 1); }
    Vec2 z(size_t p, size_t q) const { return {x(p), y(q)}; }
    size_t size() const { return P * Q; }
    std::vector<double> xs() const;
    std::vector<double> ys() const;
    double spacing() const;  // smaller of the two cell sizes
    void validate() const;   // throws ArgumentError
};

enum class IndicatorKind { Iminus, IminusProcessed, Iplus, ALHS, IminusM, IplusM, Iepsilon };

std::string to_string(IndicatorKind k);
IndicatorKind indicator_from_string(const std::string& s);

struct FieldMeta {
    int L = 0;
    int Lambda = 0;
    double gamma = 0.0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::map<std::string, double> diagnostics;
    std::map<std::string, std::string> notes;
};

struct IndicatorField {
    SamplingGrid grid;
    IndicatorKind kind = IndicatorKind::Iminus;
    std::vector<double> values;  // q*P + p
    FieldMeta meta;

    double at(size_t p, size_t q) const { return values[q * grid.P + p]; }
};

struct IndicatorOptions {
    bool parallel = true;
    // Samples of the 1D directional functions per grid spacing; grid values take the
    // nearest sample.
    int oversample = 4;
};

// Per-direction I^-(z) = sum_m w_m k_m [u(x,k_m) e^{i k_m x.z} - u(-x,k_m) e^{-i k_m x.z}],
// row-major like the fields.
std::vector<cplx> eval_I_minus_directional(const MeasurementSet& ms, size_t l, const SamplingGrid& grid,
                                           const IndicatorOptions& opt = {});

IndicatorField eval_I_minus(const MeasurementSet& ms, const SamplingGrid& grid, const IndicatorOptions& opt = {});

// Sobel magnitude of one direction's matrix, zero on the border, divided by its maximum
// (all zero when the maximum is zero).
std::vector<double> sobel_normalized(const std::vector<cplx>& m, const SamplingGrid& grid);

IndicatorField sobel_process(const std::vector<std::vector<cplx>>& per_direction, const SamplingGrid& grid);
IndicatorField eval_I_minus_processed(const MeasurementSet& ms, const SamplingGrid& grid,
                                      const IndicatorOptions& opt = {});

// Real part of (1/(4 pi L)) sum_x sum_m w_m k_m [u(x) e^{ik x.z} + u(-x) e^{-ik x.z}]; the
// diagnostics hold the ratio of the imaginary to the real part in the 2-norm.
IndicatorField eval_I_plus(const MeasurementSet& ms, const SamplingGrid& grid, const IndicatorOptions& opt = {});

// sum_x |sum_m w_m u(x,k_m) e^{i k_m x.z}|
IndicatorField eval_I_alhs(const MeasurementSet& ms, const SamplingGrid& grid, const IndicatorOptions& opt = {});

enum class MuMode { Both, RealOnly };

MeasurementSet subtract_mu(const MeasurementSet& ms, double mu, MuMode mode = MuMode::Both);

struct ModifiedFields {
    IndicatorField minus, plus;
};
ModifiedFields eval_modified(const MeasurementSet& ms, const SamplingGrid& grid, double mu,
                             MuMode mode = MuMode::Both, const IndicatorOptions& opt = {});

// 1 where |f(z) - I^+(z)| > epsilon, else 0.
IndicatorField eval_I_epsilon(const SourceScene& scene, const IndicatorField& iplus, double epsilon);

double fraction_of_ones(const IndicatorField& f);

}  // namespace srcimg
