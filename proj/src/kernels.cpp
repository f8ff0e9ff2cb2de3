#include "ctlab/kernels.hpp"

#include <atomic>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ctlab::kernels {

namespace {

std::atomic<int> g_max_threads{
#ifdef _OPENMP
    0  // resolved lazily from the runtime
#else
    1
#endif
};

int resolve_threads() {
    int t = g_max_threads.load(std::memory_order_relaxed);
    if (t > 0) return t;
#ifdef _OPENMP
    t = omp_get_max_threads();
#else
    t = 1;
#endif
    g_max_threads.store(t, std::memory_order_relaxed);
    return t;
}

// Minimum per-kernel work (output elements times inner length) before the
// parallel path pays for its fork/join overhead.
constexpr std::size_t kParallelThreshold = 1u << 16;

bool go_parallel(std::size_t work) {
#ifdef _OPENMP
    return resolve_threads() > 1 && work >= kParallelThreshold && !omp_in_parallel();
#else
    (void)work;
    return false;
#endif
}

inline void matmul_nn_row(double* crow, const double* arow, const double* B,
                          std::size_t k, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
        const double a = arow[p];
        const double* brow = B + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
    }
}

inline void matmul_nt_row(double* crow, const double* arow, const double* B,
                          std::size_t k, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double* brow = B + j * k;
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
        crow[j] = acc;
    }
}

inline void matmul_tn_row(double* crow, const double* A, const double* B,
                          std::size_t i, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
        const double a = A[p * m + i];
        const double* brow = B + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
    }
}

inline void cost_row(double* mrow, const double* zi, const double* x,
                     std::size_t n, std::size_t d) {
    for (std::size_t j = 0; j < n; ++j) {
        const double* xj = x + j * d;
        double acc = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = zi[c] - xj[c];
            acc += diff * diff;
        }
        mrow[j] = acc;
    }
}

}  // namespace

void set_max_threads(int n) {
    g_max_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed);
}

int max_threads() { return resolve_threads(); }

namespace serial {

void matmul_nn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_nn_row(C + i * n, A + i * k, B, k, n);
}

void matmul_nt(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_nt_row(C + i * n, A + i * k, B, k, n);
}

void matmul_tn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_tn_row(C + i * n, A, B, i, m, k, n);
}

void add(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void div(double* out, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}

void axpy(double* out, const double* a, double s, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + s * b[i];
}

void cost_matrix(double* M, const double* z, const double* x,
                 std::size_t n, std::size_t d) {
    for (std::size_t i = 0; i < n; ++i) cost_row(M + i * n, z + i * d, x, n, d);
}

}  // namespace serial

namespace par {

void matmul_nn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)m; ++i)
        matmul_nn_row(C + i * n, A + i * k, B, k, n);
}

void matmul_nt(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)m; ++i)
        matmul_nt_row(C + i * n, A + i * k, B, k, n);
}

void matmul_tn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)m; ++i)
        matmul_tn_row(C + i * n, A, B, (std::size_t)i, m, k, n);
}

void add(double* out, const double* a, const double* b, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i) out[i] = a[i] + b[i];
}

void sub(double* out, const double* a, const double* b, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i) out[i] = a[i] - b[i];
}

void mul(double* out, const double* a, const double* b, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i) out[i] = a[i] * b[i];
}

void div(double* out, const double* a, const double* b, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i) out[i] = a[i] / b[i];
}

void axpy(double* out, const double* a, double s, const double* b, std::size_t n) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i) out[i] = a[i] + s * b[i];
}

void cost_matrix(double* M, const double* z, const double* x,
                 std::size_t n, std::size_t d) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < (long long)n; ++i)
        cost_row(M + i * n, z + i * d, x, n, d);
}

}  // namespace par

void matmul_nn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
    if (go_parallel(m * k * n)) par::matmul_nn(C, A, B, m, k, n);
    else serial::matmul_nn(C, A, B, m, k, n);
}

void matmul_nt(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
    if (go_parallel(m * k * n)) par::matmul_nt(C, A, B, m, k, n);
    else serial::matmul_nt(C, A, B, m, k, n);
}

void matmul_tn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n) {
    if (go_parallel(m * k * n)) par::matmul_tn(C, A, B, m, k, n);
    else serial::matmul_tn(C, A, B, m, k, n);
}

void add(double* out, const double* a, const double* b, std::size_t n) {
    if (go_parallel(n)) par::add(out, a, b, n);
    else serial::add(out, a, b, n);
}

void sub(double* out, const double* a, const double* b, std::size_t n) {
    if (go_parallel(n)) par::sub(out, a, b, n);
    else serial::sub(out, a, b, n);
}

void mul(double* out, const double* a, const double* b, std::size_t n) {
    if (go_parallel(n)) par::mul(out, a, b, n);
    else serial::mul(out, a, b, n);
}

void div(double* out, const double* a, const double* b, std::size_t n) {
    if (go_parallel(n)) par::div(out, a, b, n);
    else serial::div(out, a, b, n);
}

void axpy(double* out, const double* a, double s, const double* b, std::size_t n) {
    if (go_parallel(n)) par::axpy(out, a, s, b, n);
    else serial::axpy(out, a, s, b, n);
}

void cost_matrix(double* M, const double* z, const double* x,
                 std::size_t n, std::size_t d) {
    if (go_parallel(n * n * d)) par::cost_matrix(M, z, x, n, d);
    else serial::cost_matrix(M, z, x, n, d);
}

}  // namespace ctlab::kernels
