#pragma once

#include <complex>
#include <cstddef>
#include <vector>

// Data-parallel inner loops. Every kernel exists twice: a serial reference and an
// OpenMP version. Both evaluate each output with the same operation order, so their
// results are bitwise identical; tests assert this.
namespace srcimg::kernels {

using cplx = std::complex<double>;

struct Nodes {
    std::vector<double> x, y;
    std::vector<cplx> w;  // quadrature weight times amplitude
    size_t size() const { return x.size(); }
};

// out[d*M + m] += sum_n w_n exp(-i k_m (dx_d x_n + dy_d y_n)), k_m = (m+1)*dk.
// Wavenumber recurrence e^{-i k_m t} = (e^{-i dk t})^{m+1}.
struct SynthesisTask {
    const Nodes* nodes;
    const std::vector<double>* dx;
    const std::vector<double>* dy;
    size_t M;
    double dk;
};

// Evaluates f(s_j) = sum_m c_m exp(i sigma k_m s_j) for uniform k_m = (m+1)*dk and
// each coefficient row (one per direction); sigma = +1 or -1.
struct BandSumTask {
    const std::vector<cplx>* coeffs;  // rows * M
    size_t rows;
    size_t M;
    double dk;
    const std::vector<double>* s;
    double sigma;
};

// field[q*P + p] += sum_r table[r*ns + j(r,p,q)] where j is the nearest sample of the uniform
// table s_j = s0 + j*hs to s = dx_r*xs[p] + dy_r*ys[q]. Rows are summed in index order.
struct BroadcastTask {
    const std::vector<double>* table;
    size_t rows;
    size_t ns;
    double s0;
    double hs;
    const std::vector<double>* dx;
    const std::vector<double>* dy;
    const std::vector<double>* xs;
    const std::vector<double>* ys;
};

namespace serial {
void synthesize(const SynthesisTask& t, std::vector<cplx>& out);
void band_sum(const BandSumTask& t, std::vector<cplx>& out);  // out: rows * s.size()
void broadcast_sum(const BroadcastTask& t, std::vector<double>& field);
}  // namespace serial

namespace omp {
void synthesize(const SynthesisTask& t, std::vector<cplx>& out);
void band_sum(const BandSumTask& t, std::vector<cplx>& out);
void broadcast_sum(const BroadcastTask& t, std::vector<double>& field);
}  // namespace omp

bool openmp_enabled();
int max_threads();

}  // namespace srcimg::kernels
