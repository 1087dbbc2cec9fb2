#include "srcimg/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace srcimg::kernels {

namespace {

// One direction of the synthesis sum. Complex products are spelled out in reals so the
// compiler does not route them through the C99 NaN-recovery helpers.
void synth_direction(const SynthesisTask& t, size_t d, cplx* out) {
    const Nodes& nd = *t.nodes;
    const double dx = (*t.dx)[d], dy = (*t.dy)[d];
    const size_t M = t.M;
    std::vector<double> re(M, 0.0), im(M, 0.0);
    for (size_t n = 0; n < nd.size(); ++n) {
        const double ph = -t.dk * (dx * nd.x[n] + dy * nd.y[n]);
        const double zr = std::cos(ph), zi = std::sin(ph);
        const double wr = nd.w[n].real(), wi = nd.w[n].imag();
        double pr = zr, pi = zi;
        for (size_t m = 0; m < M; ++m) {
            re[m] += wr * pr - wi * pi;
            im[m] += wr * pi + wi * pr;
            const double nr = pr * zr - pi * zi;
            pi = pr * zi + pi * zr;
            pr = nr;
        }
    }
    for (size_t m = 0; m < M; ++m) out[m] += cplx(re[m], im[m]);
}

cplx band_point(const BandSumTask& t, size_t r, double s) {
    const cplx* c = t.coeffs->data() + r * t.M;
    const double ph = t.sigma * t.dk * s;
    const double zr = std::cos(ph), zi = std::sin(ph);
    double pr = zr, pi = zi, ar = 0.0, ai = 0.0;
    for (size_t m = 0; m < t.M; ++m) {
        const double cr = c[m].real(), ci = c[m].imag();
        ar += cr * pr - ci * pi;
        ai += cr * pi + ci * pr;
        const double nr = pr * zr - pi * zi;
        pi = pr * zi + pi * zr;
        pr = nr;
    }
    return {ar, ai};
}

void broadcast_row(const BroadcastTask& t, size_t q, double* row) {
    const auto& xs = *t.xs;
    const double y = (*t.ys)[q];
    const double last = static_cast<double>(t.ns - 1);
    for (size_t p = 0; p < xs.size(); ++p) {
        double acc = row[p];
        for (size_t r = 0; r < t.rows; ++r) {
            const double s = (*t.dx)[r] * xs[p] + (*t.dy)[r] * y;
            const double j = std::clamp(std::nearbyint((s - t.s0) / t.hs), 0.0, last);
            acc += (*t.table)[r * t.ns + static_cast<size_t>(j)];
        }
        row[p] = acc;
    }
}

}  // namespace

namespace serial {

void synthesize(const SynthesisTask& t, std::vector<cplx>& out) {
    const size_t D = t.dx->size();
    out.resize(D * t.M);
    for (size_t d = 0; d < D; ++d) synth_direction(t, d, out.data() + d * t.M);
}

void band_sum(const BandSumTask& t, std::vector<cplx>& out) {
    const size_t ns = t.s->size();
    out.assign(t.rows * ns, cplx{});
    for (size_t r = 0; r < t.rows; ++r)
        for (size_t j = 0; j < ns; ++j) out[r * ns + j] = band_point(t, r, (*t.s)[j]);
}

void broadcast_sum(const BroadcastTask& t, std::vector<double>& field) {
    const size_t P = t.xs->size(), Q = t.ys->size();
    field.resize(P * Q, 0.0);
    for (size_t q = 0; q < Q; ++q) broadcast_row(t, q, field.data() + q * P);
}

}  // namespace serial

namespace omp {

void synthesize(const SynthesisTask& t, std::vector<cplx>& out) {
    const long D = static_cast<long>(t.dx->size());
    out.resize(static_cast<size_t>(D) * t.M);
#pragma omp parallel for schedule(dynamic, 1)
    for (long d = 0; d < D; ++d) synth_direction(t, static_cast<size_t>(d), out.data() + d * t.M);
}

void band_sum(const BandSumTask& t, std::vector<cplx>& out) {
    const size_t ns = t.s->size();
    out.assign(t.rows * ns, cplx{});
    const long total = static_cast<long>(t.rows * ns);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < total; ++i) {
        const size_t r = static_cast<size_t>(i) / ns, j = static_cast<size_t>(i) % ns;
        out[static_cast<size_t>(i)] = band_point(t, r, (*t.s)[j]);
    }
}

void broadcast_sum(const BroadcastTask& t, std::vector<double>& field) {
    const size_t P = t.xs->size();
    const long Q = static_cast<long>(t.ys->size());
    field.resize(P * static_cast<size_t>(Q), 0.0);
#pragma omp parallel for schedule(static)
    for (long q = 0; q < Q; ++q) broadcast_row(t, static_cast<size_t>(q), field.data() + q * P);
}

}  // namespace omp

bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace srcimg::kernels
