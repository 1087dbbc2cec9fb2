#pragma once

#include <string>
#include <utility>
#include <vector>

#include "srcimg/forward.hpp"

namespace srcimg {

// Uniform offsets s_j = j*hs, |s_j| <= span, with hs = pi/(2 kmax * oversample).
struct SGrid {
    double hs = 0.0;
    std::vector<double> s;

    static SGrid make(double kmax, double span = 3.0 * std::sqrt(2.0), int oversample = 1);
    size_t size() const { return s.size(); }
};

struct Profile {
    Vec2 xhat;
    std::vector<double> s;
    std::vector<cplx> I;          // band-limited Radon profile
    std::vector<double> abs_deriv;  // |I^-|
    double k1 = 0.0, kmax = 0.0;
};

struct ProfileOptions {
    // Extends the trapezoid rule down to k = 0 with an extrapolated u(x, 0).
    bool low_frequency_completion = true;
};

// Trapezoidal weights for the first mcount k nodes (spacing dk, halved at both ends).
std::vector<double> trapezoid_weights(const WaveBand& band, size_t mcount = 0);

// sum_m w_m t_m k_m^power u(sign x, k_m) e^{+i k_m s} for Sign::Plus and e^{-i k_m s} for
// Sign::Minus, over the first mcount nodes (0 = all). Weights are the trapezoid weights of
// that sub-band; t_m = cos^2(pi k_m / (2 k_top)) when hann_taper is set, else 1.
std::vector<cplx> one_sided_sum(const MeasurementSet& ms, size_t l, Sign sign, const std::vector<double>& s,
                                int power, size_t mcount = 0, bool hann_taper = false);

cplx radon_oracle(const SourceScene& scene, Vec2 xhat, double s);

Profile profile_from_far_field(const MeasurementSet& ms, size_t l, const SGrid& grid,
                               const ProfileOptions& opt = {});
// Complex I^-(s) = sum k [u(+) e^{iks} - u(-) e^{-iks}] and its modulus.
std::vector<cplx> iminus_profile(const MeasurementSet& ms, size_t l, const std::vector<double>& s,
                                 size_t mcount = 0);
std::vector<double> derivative_profile(const MeasurementSet& ms, size_t l, const std::vector<double>& s);

enum class JumpClass { Finite, Blowup };

struct JumpEvent {
    double s0 = 0.0;
    double magnitude = 0.0;  // peak of |D| at the detection sample
    JumpClass cls = JumpClass::Finite;
    cplx jump;               // complex D = i * (k^2-weighted sum) at the peak
    double growth = 0.0;     // peak |I^-| at Lambda over peak at Lambda/2
};

struct DetectOptions {
    double tau_rel = 0.3;
    int window = 5;        // non-maximum suppression half-width in grid steps
    double g_min = 1.2;
    int class_window = 3;  // steps around a peak searched for the growth ratio
    bool refine_blowup = true;
};

// Everything detect_jumps needs, sampled on one s grid.
struct JumpInputs {
    std::vector<double> s;
    double hs = 0.0;
    double kmax = 0.0, kmax_half = 0.0;
    std::vector<cplx> D;            // i * sum w k^2 [u+ e^{iks} + u- e^{-iks}]
    std::vector<double> tapered;    // (|A+| + |A-|)/2 with a cos^2 taper in k
    std::vector<double> im_full;    // |I^-| over the whole band
    std::vector<double> im_half;    // |I^-| over the lower half band
};

JumpInputs jump_inputs(const MeasurementSet& ms, size_t l, double span = 3.0 * std::sqrt(2.0));
std::vector<JumpEvent> detect_jumps(const JumpInputs& in, const DetectOptions& opt = {});
std::vector<JumpEvent> detect_jumps(const MeasurementSet& ms, size_t l, const DetectOptions& opt = {});

struct StripOptions {
    double rel_floor = 0.05;   // fraction of max |I|
    double noise_factor = 4.0; // multiple of the RMS of |I| in the outer tenth of the grid
};
std::pair<double, double> support_strip(const Profile& p, const StripOptions& opt = {});

// Sparse model of the k^2-weighted data of one direction pair:
// k^2 u(+x, k) ~ sum_j A_j e^{-i k s_j}, k^2 u(-x, k) ~ sum_j B_j e^{+i k s_j}.
// Finite jumps of I' at s_j produce such atoms; greedy selection with bounded joint refinement.
struct Atom {
    double s = 0.0;
    cplx A, B;
    double amplitude() const { return 0.5 * (std::abs(A) + std::abs(B)); }
};

struct AtomFitOptions {
    double tau = 0.15;     // stop when a new atom is weaker than tau * strongest
    int max_atoms = 24;
    int fine = 4;          // candidate grid is hs / fine
    double min_sep = 1.0;  // atoms closer than min_sep * hs are rejected as a dipole
    int max_rejections = 3;
    double exact_rel = 1e-3;  // accept a pencil model whose relative residual is below this; 0 disables
    double span = 3.0 * std::sqrt(2.0);
};

std::vector<Atom> fit_atoms(const MeasurementSet& ms, size_t l, const AtomFitOptions& opt = {});

// Amplitudes of fixed atoms by linear least squares; returns the residual norm squared.
double fit_amplitudes(const std::vector<double>& k, const std::vector<cplx>& yp, const std::vector<cplx>& ym,
                      std::vector<Atom>& atoms);

}  // namespace srcimg
