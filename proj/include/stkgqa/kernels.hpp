#pragma once

#include <cstddef>
#include <cstdint>

// Dense numeric kernels shared by the embedding trainer, the question
// encoder, and evaluation. Each kernel has an OpenMP version and a serial
// reference (`*_ref`). The parallel versions only ever split work across
// independent output slots; every reduction runs serially inside one output
// in a fixed order, so the two variants produce bitwise-identical results
// for any thread count. The test suite asserts exactly that, and
// tools/bench_kernels compares their throughput.

namespace stkgqa::kernels {

// y[r] = dot(a[r, :], x)          a: rows x cols, row-major
void matvec(const double* a, size_t rows, size_t cols, const double* x, double* y);
void matvec_ref(const double* a, size_t rows, size_t cols, const double* x, double* y);

// y[c] = sum_r a[r, c] * g[r]     (transposed product; gradient reduction)
void matvec_t(const double* a, size_t rows, size_t cols, const double* g, double* y);
void matvec_t_ref(const double* a, size_t rows, size_t cols, const double* g, double* y);

// a[r, c] += g[r] * x[c]          (rank-1 accumulation into a gradient table)
void rank1_update(double* a, size_t rows, size_t cols, const double* g, const double* x);
void rank1_update_ref(double* a, size_t rows, size_t cols, const double* g, const double* x);

// c = a * b                       a: m x k, b: k x n, c: m x n
void matmul(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
void matmul_ref(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);

// c = a^T * b                     a: k x m, b: k x n, c: m x n
void matmul_at_b(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
void matmul_at_b_ref(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);

// c = a * b^T                     a: m x k, b: n x k, c: m x n
void matmul_a_bt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);
void matmul_a_bt_ref(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);

// Numerically-stable softmax in place; returns log(sum(exp(s - max))) + max.
// Serial on purpose: it is O(n) next to the O(n*d) scoring kernels and a
// fixed summation order keeps results independent of thread count.
double softmax_inplace(double* s, size_t n);

// Adagrad: accum += g^2; p -= lr * g / (sqrt(accum) + eps)
void adagrad_step(double* param, double* accum, const double* grad, size_t n, double lr,
                  double eps);
void adagrad_step_ref(double* param, double* accum, const double* grad, size_t n, double lr,
                      double eps);

// Adam with bias correction; `t` is the 1-based step count.
void adam_step(double* param, double* m, double* v, const double* grad, size_t n, double lr,
               double beta1, double beta2, double eps, uint64_t t);
void adam_step_ref(double* param, double* m, double* v, const double* grad, size_t n, double lr,
                   double beta1, double beta2, double eps, uint64_t t);

}  // namespace stkgqa::kernels
