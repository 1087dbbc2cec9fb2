#include "srcimg/profile.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "srcimg/errors.hpp"
#include "srcimg/kernels.hpp"
#include "srcimg/lsq.hpp"

namespace srcimg {

namespace {

constexpr int kGaussOrder = 64;

struct GaussRule {
    std::array<double, kGaussOrder> x{}, w{};
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
const GaussRule& gauss_legendre() {
    static const GaussRule rule = [] {
        GaussRule g;
        const int n = kGaussOrder;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 1.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            g.x[i] = x;
            g.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return g;
    }();
    return rule;
}

void require_pair(const MeasurementSet& ms, size_t l) {
    if (l >= ms.obs.directions.size())
        throw ArgumentError("direction index " + std::to_string(l) + " is not in the measurement set");
    if (ms.values.size() != ms.obs.directions.size() * 2 * ms.M())
        throw ArgumentError("measurement set lacks one of the signed directions");
}

// Completes the trapezoid sum to the full-line rule on the nodes k = 0, +-k1, +-k2, ...:
// the k1 node gets its full weight and a k = 0 node is added. u(x,k) and u(-x,-k) agree, so
// the even part (u(x,k) + u(-x,k))/2 is even in k and u(0) is extrapolated from it
// quadratically. For data from a source of bounded support the full-line rule is exact
// apart from the truncation at the top of the band.
cplx low_panel(const MeasurementSet& ms, size_t l, double s) {
    const double dk = ms.band.dk(), k1 = ms.band.k(0);
    const cplx p1 = ms.at(l, Sign::Plus, 0), m1 = ms.at(l, Sign::Minus, 0);
    const cplx e1 = 0.5 * (p1 + m1);
    const cplx e2 = 0.5 * (ms.at(l, Sign::Plus, 1) + ms.at(l, Sign::Minus, 1));
    const cplx u0 = (4.0 * e1 - e2) / 3.0;
    const cplx g1 = p1 * std::polar(1.0, k1 * s) + m1 * std::polar(1.0, -k1 * s);
    return 0.5 * dk * g1 + dk * u0;
}

}  // namespace

SGrid SGrid::make(double kmax, double span, int oversample) {
    if (!(kmax > 0) || oversample < 1) throw ArgumentError("s grid needs kmax > 0 and oversample >= 1");
    SGrid g;
    g.hs = std::numbers::pi / (2.0 * kmax * oversample);
    const long n = static_cast<long>(std::floor(span / g.hs + 1e-9));
    for (long j = -n; j <= n; ++j) g.s.push_back(static_cast<double>(j) * g.hs);
    return g;
}

std::vector<double> trapezoid_weights(const WaveBand& band, size_t mcount) {
    const size_t M = mcount ? mcount : band.size();
    std::vector<double> w(M, band.dk());
    if (M == 1) return w;
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

std::vector<cplx> one_sided_sum(const MeasurementSet& ms, size_t l, Sign sign, const std::vector<double>& s,
                                int power, size_t mcount, bool hann_taper) {
    require_pair(ms, l);
    const size_t M = mcount ? std::min(mcount, ms.M()) : ms.M();
    const auto w = trapezoid_weights(ms.band, M);
    const double ktop = ms.band.k(M - 1);
    std::vector<cplx> c(M);
    const cplx* u = ms.row(l, sign);
    for (size_t m = 0; m < M; ++m) {
        const double k = ms.band.k(m);
        double f = w[m] * std::pow(k, power);
        if (hann_taper) {
            const double t = std::cos(0.5 * std::numbers::pi * k / ktop);
            f *= t * t;
        }
        c[m] = f * u[m];
    }
    kernels::BandSumTask task{&c, 1, M, ms.band.dk(), &s, sign == Sign::Plus ? 1.0 : -1.0};
    std::vector<cplx> out;
    kernels::serial::band_sum(task, out);
    return out;
}

cplx radon_oracle(const SourceScene& scene, Vec2 xhat, double s) {
    require_unit(xhat);
    const auto& g = gauss_legendre();
    const Vec2 t = perp(xhat);
    cplx total = 0.0;
    for (const auto& comp : scene.components) {
        for (const auto& iv : comp.region->chord(xhat, s)) {
            const double half = 0.5 * (iv.hi - iv.lo), mid = 0.5 * (iv.hi + iv.lo);
            if (!(half > 0)) continue;
            cplx acc = 0.0;
            for (int i = 0; i < kGaussOrder; ++i) acc += g.w[i] * comp.amplitude(xhat * s + t * (mid + half * g.x[i]));
            total += half * acc;
        }
    }
    return total;
}

Profile profile_from_far_field(const MeasurementSet& ms, size_t l, const SGrid& grid, const ProfileOptions& opt) {
    require_pair(ms, l);
    Profile p;
    p.xhat = ms.obs.directions[l];
    p.s = grid.s;
    p.k1 = ms.band.k(0);
    p.kmax = ms.band.kmax();
    auto plus = one_sided_sum(ms, l, Sign::Plus, grid.s, 0);
    auto minus = one_sided_sum(ms, l, Sign::Minus, grid.s, 0);
    p.I.resize(grid.size());
    const bool complete = opt.low_frequency_completion && ms.M() >= 2;
    for (size_t j = 0; j < grid.size(); ++j) {
        cplx v = plus[j] + minus[j];
        if (complete) v += low_panel(ms, l, grid.s[j]);
        p.I[j] = v / (2.0 * std::numbers::pi);
    }
    p.abs_deriv = derivative_profile(ms, l, grid.s);
    return p;
}

std::vector<cplx> iminus_profile(const MeasurementSet& ms, size_t l, const std::vector<double>& s, size_t mcount) {
    auto plus = one_sided_sum(ms, l, Sign::Plus, s, 1, mcount);
    auto minus = one_sided_sum(ms, l, Sign::Minus, s, 1, mcount);
    for (size_t j = 0; j < s.size(); ++j) plus[j] -= minus[j];
    return plus;
}

std::vector<double> derivative_profile(const MeasurementSet& ms, size_t l, const std::vector<double>& s) {
    auto v = iminus_profile(ms, l, s);
    std::vector<double> out(v.size());
    for (size_t j = 0; j < v.size(); ++j) out[j] = std::abs(v[j]);
    return out;
}

JumpInputs jump_inputs(const MeasurementSet& ms, size_t l, double span) {
    require_pair(ms, l);
    if (ms.M() < 4) throw ArgumentError("jump detection needs at least 4 wavenumbers");
    JumpInputs in;
    const SGrid g = SGrid::make(ms.band.kmax(), span);
    in.s = g.s;
    in.hs = g.hs;
    in.kmax = ms.band.kmax();
    const size_t half = ms.M() / 2;
    in.kmax_half = ms.band.k(half - 1);
    const auto dp = one_sided_sum(ms, l, Sign::Plus, g.s, 2);
    const auto dm = one_sided_sum(ms, l, Sign::Minus, g.s, 2);
    const auto tp = one_sided_sum(ms, l, Sign::Plus, g.s, 2, 0, true);
    const auto tm = one_sided_sum(ms, l, Sign::Minus, g.s, 2, 0, true);
    const auto full = iminus_profile(ms, l, g.s);
    const auto low = iminus_profile(ms, l, g.s, half);
    const size_t n = g.size();
    in.D.resize(n);
    in.tapered.resize(n);
    in.im_full.resize(n);
    in.im_half.resize(n);
    for (size_t j = 0; j < n; ++j) {
        in.D[j] = cplx(0.0, 1.0) * (dp[j] + dm[j]);
        in.tapered[j] = 0.5 * (std::abs(tp[j]) + std::abs(tm[j]));
        in.im_full[j] = std::abs(full[j]);
        in.im_half[j] = std::abs(low[j]);
    }
    return in;
}

std::vector<JumpEvent> detect_jumps(const JumpInputs& in, const DetectOptions& opt) {
    const size_t n = in.s.size();
    if (in.D.size() != n || in.tapered.size() != n || in.im_full.size() != n || in.im_half.size() != n)
        throw ArgumentError("jump detection inputs are not sampled on one s grid");
    if (!(in.kmax_half > 0) || in.kmax_half >= in.kmax) throw ArgumentError("jump detection bands are not nested");
    if (opt.window < 1 || opt.class_window < 0 || !(opt.tau_rel >= 0)) throw ArgumentError("bad jump detection options");
    std::vector<double> a(n);
    for (size_t j = 0; j < n; ++j) a[j] = std::abs(in.D[j]);

    std::vector<size_t> cand;
    for (size_t j = 1; j + 1 < n; ++j)
        if (a[j] >= a[j - 1] && a[j] > a[j + 1]) cand.push_back(j);
    std::stable_sort(cand.begin(), cand.end(), [&](size_t x, size_t y) { return a[x] > a[y]; });
    std::vector<size_t> keep;
    const long win = opt.window;
    for (size_t j : cand) {
        bool ok = true;
        for (size_t q : keep)
            if (std::labs(static_cast<long>(j) - static_cast<long>(q)) <= win) ok = false;
        if (ok) keep.push_back(j);
    }
    if (keep.empty()) return {};
    const double amax = a[keep.front()];
    if (!(amax > 0)) return {};

    std::vector<JumpEvent> out;
    for (size_t j : keep) {
        if (a[j] < opt.tau_rel * amax) continue;
        const size_t lo = j >= static_cast<size_t>(opt.class_window) ? j - opt.class_window : 0;
        const size_t hi = std::min(n, j + opt.class_window + 1);
        double pf = 0.0, ph = 0.0;
        for (size_t i = lo; i < hi; ++i) {
            pf = std::max(pf, in.im_full[i]);
            ph = std::max(ph, in.im_half[i]);
        }
        JumpEvent e;
        e.magnitude = a[j];
        e.jump = in.D[j];
        e.growth = ph > 0 ? pf / ph : std::numeric_limits<double>::infinity();
        e.cls = e.growth >= opt.g_min ? JumpClass::Blowup : JumpClass::Finite;
        // Tangencies: the untapered peak is biased by ringing from the other side of the
        // singularity, so re-locate on the tapered one-sided strength.
        const std::vector<double>* arr = &a;
        size_t jj = j;
        if (e.cls == JumpClass::Blowup && opt.refine_blowup) {
            const size_t lo2 = std::max<size_t>(1, j >= static_cast<size_t>(win) ? j - win : 0);
            const size_t hi2 = std::min(n - 1, j + win + 1);
            jj = lo2;
            for (size_t i = lo2; i < hi2; ++i)
                if (in.tapered[i] > in.tapered[jj]) jj = i;
            arr = &in.tapered;
        }
        double off = 0.0;
        if (jj >= 1 && jj + 1 < n) {
            const double y0 = (*arr)[jj - 1], y1 = (*arr)[jj], y2 = (*arr)[jj + 1];
            const double den = y0 - 2.0 * y1 + y2;
            if (den != 0.0) off = std::clamp(0.5 * (y0 - y2) / den, -1.0, 1.0);
        }
        e.s0 = in.s[jj] + off * in.hs;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const JumpEvent& x, const JumpEvent& y) { return x.s0 < y.s0; });
    return out;
}

std::vector<JumpEvent> detect_jumps(const MeasurementSet& ms, size_t l, const DetectOptions& opt) {
    return detect_jumps(jump_inputs(ms, l), opt);
}

std::pair<double, double> support_strip(const Profile& p, const StripOptions& opt) {
    const size_t n = p.I.size();
    if (n < 10) throw ArgumentError("profile too short for a support strip");
    double mx = 0.0;
    for (auto v : p.I) mx = std::max(mx, std::abs(v));
    const size_t tail = std::max<size_t>(1, n / 10);
    double ss = 0.0;
    for (size_t j = 0; j < tail; ++j) ss += std::norm(p.I[j]) + std::norm(p.I[n - 1 - j]);
    const double noise = std::sqrt(ss / (2.0 * tail));
    const double floor = std::max(opt.rel_floor * mx, opt.noise_factor * noise);
    size_t lo = n, hi = 0;
    for (size_t j = 0; j < n; ++j)
        if (std::abs(p.I[j]) > floor) {
            lo = std::min(lo, j);
            hi = j;
        }
    if (!(mx > 0) || lo == n) throw NoSupportDetected("no profile samples above the noise floor");
    return {p.s[lo], p.s[hi]};
}

// ------------------------------------------------------------------ atom fit

namespace {

struct AtomProblem {
    std::vector<double> k;
    Eigen::VectorXcd yp, ym;

    // Amplitudes and stacked real residual for offsets x.
    Eigen::VectorXd residual(const Eigen::VectorXd& x, Eigen::VectorXcd* A = nullptr, Eigen::VectorXcd* B = nullptr) const {
        const Eigen::Index M = static_cast<Eigen::Index>(k.size()), J = x.size();
        Eigen::MatrixXcd P(M, J), Q(M, J);
        for (Eigen::Index m = 0; m < M; ++m)
            for (Eigen::Index j = 0; j < J; ++j) {
                P(m, j) = std::polar(1.0, -k[m] * x[j]);
                Q(m, j) = std::conj(P(m, j));
            }
        Eigen::VectorXcd a = Eigen::VectorXcd::Zero(J), b = Eigen::VectorXcd::Zero(J);
        if (J > 0) {
            a = P.colPivHouseholderQr().solve(yp);
            b = Q.colPivHouseholderQr().solve(ym);
        }
        const Eigen::VectorXcd rp = yp - P * a, rm = ym - Q * b;
        if (A) *A = a;
        if (B) *B = b;
        Eigen::VectorXd r(4 * M);
        r << rp.real(), rp.imag(), rm.real(), rm.imag();
        return r;
    }
};

// Matrix pencil on the stacked Hankel matrix of k^2 u(+x) and conj(k^2 u(-x)); both share
// the poles exp(-i dk s).
struct Pencil {
    Eigen::VectorXd sv;
    Eigen::MatrixXcd V;
    Eigen::Index P = 0;

    explicit Pencil(const AtomProblem& pb) {
        const Eigen::Index M = pb.yp.size(), R = M - M / 2;
        P = M / 2;
        Eigen::MatrixXcd Y(2 * R, P + 1);
        for (Eigen::Index i = 0; i < R; ++i)
            for (Eigen::Index j = 0; j <= P; ++j) {
                Y(i, j) = pb.yp[i + j];
                Y(R + i, j) = std::conj(pb.ym[i + j]);
            }
        const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Y, Eigen::ComputeThinV);
        sv = svd.singularValues();
        V = svd.matrixV();
    }

    // Offsets of the J-term model inside [-span, span].
    std::vector<double> offsets(int J, double dk, double span) const {
        if (J < 1 || J > P) return {};
        const Eigen::MatrixXcd W = V.leftCols(J).adjoint();
        const Eigen::MatrixXcd G = W.rightCols(P) * W.leftCols(P).completeOrthogonalDecomposition().pseudoInverse();
        const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(G, false);
        std::vector<double> out;
        for (Eigen::Index j = 0; j < J; ++j) {
            const double sj = -std::arg(es.eigenvalues()[j]) / dk;
            if (std::abs(sj) <= span) out.push_back(sj);
        }
        return out;
    }
};

double min_gap(const Eigen::VectorXd& x) {
    std::vector<double> sorted(x.data(), x.data() + x.size());
    std::sort(sorted.begin(), sorted.end());
    double gap = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < sorted.size(); ++i) gap = std::min(gap, sorted[i] - sorted[i - 1]);
    return gap;
}

}  // namespace

double fit_amplitudes(const std::vector<double>& k, const std::vector<cplx>& yp, const std::vector<cplx>& ym,
                      std::vector<Atom>& atoms) {
    AtomProblem pb{k, Eigen::Map<const Eigen::VectorXcd>(yp.data(), static_cast<Eigen::Index>(yp.size())),
                   Eigen::Map<const Eigen::VectorXcd>(ym.data(), static_cast<Eigen::Index>(ym.size()))};
    Eigen::VectorXd x(static_cast<Eigen::Index>(atoms.size()));
    for (size_t j = 0; j < atoms.size(); ++j) x[static_cast<Eigen::Index>(j)] = atoms[j].s;
    Eigen::VectorXcd A, B;
    const Eigen::VectorXd r = pb.residual(x, &A, &B);
    for (size_t j = 0; j < atoms.size(); ++j) {
        atoms[j].A = A[static_cast<Eigen::Index>(j)];
        atoms[j].B = B[static_cast<Eigen::Index>(j)];
    }
    return r.squaredNorm();
}

std::vector<Atom> fit_atoms(const MeasurementSet& ms, size_t l, const AtomFitOptions& opt) {
    require_pair(ms, l);
    if (opt.max_atoms < 1 || opt.fine < 1 || !(opt.tau >= 0)) throw ArgumentError("bad atom fit options");
    const size_t M = ms.M();
    const double K = ms.band.kmax();
    AtomProblem pb;
    pb.k.resize(M);
    pb.yp.resize(static_cast<Eigen::Index>(M));
    pb.ym.resize(static_cast<Eigen::Index>(M));
    for (size_t m = 0; m < M; ++m) {
        const double k = ms.band.k(m);
        pb.k[m] = k;
        pb.yp[static_cast<Eigen::Index>(m)] = k * k * ms.at(l, Sign::Plus, m);
        pb.ym[static_cast<Eigen::Index>(m)] = k * k * ms.at(l, Sign::Minus, m);
    }
    const SGrid grid = SGrid::make(K, opt.span, opt.fine);
    const double excl = std::numbers::pi / (2.0 * K);  // one coarse grid step
    const double box = excl;

    auto fn = [&](const Eigen::VectorXd& x) { return pb.residual(x); };
    auto finish = [&](const Eigen::VectorXd& s) {
        std::vector<Atom> atoms(static_cast<size_t>(s.size()));
        for (Eigen::Index j = 0; j < s.size(); ++j) atoms[static_cast<size_t>(j)].s = s[j];
        std::vector<cplx> yp(pb.yp.data(), pb.yp.data() + M), ym(pb.ym.data(), pb.ym.data() + M);
        fit_amplitudes(pb.k, yp, ym, atoms);
        std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.s < b.s; });
        return atoms;
    };

    // Near-exact data: the smallest pencil model that explains it wins. Neighbouring same-sign
    // jumps merge into one correlation peak, which the greedy search below cannot split.
    const double ynorm = std::sqrt(pb.yp.squaredNorm() + pb.ym.squaredNorm());
    if (!(ynorm > 0)) return {};
    const Pencil pencil(pb);
    int tries = 0;
    for (int J = 1; opt.exact_rel > 0 && J <= opt.max_atoms && J < pencil.sv.size() && tries < 3; ++J) {
        // The (J+1)-th singular value bounds what a J-term model leaves unexplained.
        if (pencil.sv[J] > opt.exact_rel * pencil.sv.norm()) continue;
        ++tries;
        const auto init = pencil.offsets(J, ms.band.dk(), opt.span);
        if (static_cast<int>(init.size()) < J) continue;
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(init.data(), J);
        x = bounded_lm(fn, x, x.array() - excl, x.array() + excl).x;
        if (J > 1 && min_gap(x) < opt.min_sep * excl) continue;
        Eigen::VectorXcd A, B;
        const double res = pb.residual(x, &A, &B).norm();
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (Eigen::Index j = 0; j < J; ++j) {
            const double amp = 0.5 * (std::abs(A[j]) + std::abs(B[j]));
            lo = std::min(lo, amp);
            hi = std::max(hi, amp);
        }
        if (lo >= opt.tau * hi && res <= opt.exact_rel * ynorm) return finish(x);
    }

    // Correlation of the residual with a unit atom at every candidate offset.
    std::vector<double> banned;
    auto pick = [&](const Eigen::VectorXd& s, const Eigen::VectorXd& r) {
        const Eigen::Index Mi = static_cast<Eigen::Index>(M);
        double best = -1.0, arg = 0.0;
        for (double c : grid.s) {
            bool blocked = false;
            for (Eigen::Index j = 0; j < s.size(); ++j)
                if (std::abs(c - s[j]) < excl) blocked = true;
            for (double b : banned)
                if (std::abs(c - b) < excl) blocked = true;
            if (blocked) continue;
            cplx ap = 0.0, am = 0.0;
            for (Eigen::Index m = 0; m < Mi; ++m) {
                const cplx e = std::polar(1.0, pb.k[static_cast<size_t>(m)] * c);
                ap += cplx(r[m], r[Mi + m]) * e;
                am += cplx(r[2 * Mi + m], r[3 * Mi + m]) * std::conj(e);
            }
            const double st = std::abs(ap) + std::abs(am);
            if (st > best) {
                best = st;
                arg = c;
            }
        }
        return best < 0 ? std::numeric_limits<double>::quiet_NaN() : arg;
    };

    Eigen::VectorXd s(0);
    Eigen::VectorXd r = pb.residual(s);
    double amax = 0.0;
    int rejected = 0;
    while (s.size() < opt.max_atoms && rejected <= opt.max_rejections) {
        const double c = pick(s, r);
        if (std::isnan(c)) break;
        Eigen::VectorXd trial(s.size() + 1);
        trial << s, c;
        const Eigen::VectorXd lo = trial.array() - box, hi = trial.array() + box;
        trial = bounded_lm(fn, trial, lo, hi).x;
        if (trial.size() > 1) {
            // Two atoms closer than this model one jump as a dipole; skip the candidate.
            if (min_gap(trial) < opt.min_sep * excl) {
                banned.push_back(c);
                ++rejected;
                continue;
            }
        }
        Eigen::VectorXcd A, B;
        const Eigen::VectorXd rn = pb.residual(trial, &A, &B);
        double newest = 0.0, top = 0.0;
        for (Eigen::Index j = 0; j < trial.size(); ++j) {
            const double amp = 0.5 * (std::abs(A[j]) + std::abs(B[j]));
            top = std::max(top, amp);
            if (j == trial.size() - 1) newest = amp;
        }
        if (!(top > 0) || newest < opt.tau * std::max(amax, top)) break;
        amax = std::max(amax, top);
        s = trial;
        r = rn;
    }
    return finish(s);
}

}  // namespace srcimg
