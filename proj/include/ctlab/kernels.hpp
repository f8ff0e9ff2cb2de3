#pragma once

#include <cstddef>

// Dense numeric kernels used by the tensor core and the coupling module.
// Every kernel has a serial reference implementation and an OpenMP variant
// that writes each output element exactly once, so both paths produce
// bit-identical results. Dispatch picks the parallel path only when the
// thread budget and problem size justify it.

namespace ctlab::kernels {

// Thread budget for the parallel path. n <= 1 forces the serial reference.
void set_max_threads(int n);
int max_threads();

namespace serial {

// C (m x n) = A (m x k) * B (k x n)
void matmul_nn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);
// C (m x n) = A (m x k) * B^T, B stored (n x k)
void matmul_nt(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);
// C (m x n) = A^T * B, A stored (k x m), B stored (k x n)
void matmul_tn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);

void add(double* out, const double* a, const double* b, std::size_t n);
void sub(double* out, const double* a, const double* b, std::size_t n);
void mul(double* out, const double* a, const double* b, std::size_t n);
void div(double* out, const double* a, const double* b, std::size_t n);

// out[i] = a[i] + s * b[i]
void axpy(double* out, const double* a, double s, const double* b, std::size_t n);

// M[i*n + j] = squared Euclidean distance between rows z_i (n x d) and x_j (n x d)
void cost_matrix(double* M, const double* z, const double* x,
                 std::size_t n, std::size_t d);

}  // namespace serial

namespace par {

void matmul_nn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);

void add(double* out, const double* a, const double* b, std::size_t n);
void sub(double* out, const double* a, const double* b, std::size_t n);
void mul(double* out, const double* a, const double* b, std::size_t n);
void div(double* out, const double* a, const double* b, std::size_t n);
void axpy(double* out, const double* a, double s, const double* b, std::size_t n);

void cost_matrix(double* M, const double* z, const double* x,
                 std::size_t n, std::size_t d);

}  // namespace par

// Dispatching entry points: serial below the work threshold, parallel above.
void matmul_nn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_nt(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);
void matmul_tn(double* C, const double* A, const double* B,
               std::size_t m, std::size_t k, std::size_t n);

void add(double* out, const double* a, const double* b, std::size_t n);
void sub(double* out, const double* a, const double* b, std::size_t n);
void mul(double* out, const double* a, const double* b, std::size_t n);
void div(double* out, const double* a, const double* b, std::size_t n);
void axpy(double* out, const double* a, double s, const double* b, std::size_t n);

void cost_matrix(double* M, const double* z, const double* x,
                 std::size_t n, std::size_t d);

}  // namespace ctlab::kernels
