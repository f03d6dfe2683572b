#include "stkgqa/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace stkgqa::kernels {

void matvec_ref(const double* a, size_t rows, size_t cols, const double* x, double* y) {
    for (size_t r = 0; r < rows; ++r) {
        const double* row = a + r * cols;
        double sum = 0.0;
        for (size_t c = 0; c < cols; ++c) sum += row[c] * x[c];
        y[r] = sum;
    }
}

void matvec(const double* a, size_t rows, size_t cols, const double* x, double* y) {
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < static_cast<int64_t>(rows); ++r) {
        const double* row = a + static_cast<size_t>(r) * cols;
        double sum = 0.0;
        for (size_t c = 0; c < cols; ++c) sum += row[c] * x[c];
        y[r] = sum;
    }
}

void matvec_t_ref(const double* a, size_t rows, size_t cols, const double* g, double* y) {
    for (size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (size_t r = 0; r < rows; ++r) sum += a[r * cols + c] * g[r];
        y[c] = sum;
    }
}

void matvec_t(const double* a, size_t rows, size_t cols, const double* g, double* y) {
    // Each output column owns its full reduction over rows, in row order.
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < static_cast<int64_t>(cols); ++c) {
        double sum = 0.0;
        for (size_t r = 0; r < rows; ++r) sum += a[r * cols + static_cast<size_t>(c)] * g[r];
        y[c] = sum;
    }
}

void rank1_update_ref(double* a, size_t rows, size_t cols, const double* g, const double* x) {
    for (size_t r = 0; r < rows; ++r) {
        double* row = a + r * cols;
        const double gr = g[r];
        for (size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
    }
}

void rank1_update(double* a, size_t rows, size_t cols, const double* g, const double* x) {
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < static_cast<int64_t>(rows); ++r) {
        double* row = a + static_cast<size_t>(r) * cols;
        const double gr = g[r];
        for (size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
    }
}

void matmul_ref(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        double* out = c + i * n;
        std::fill(out, out + n, 0.0);
        const double* arow = a + i * k;
        for (size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (size_t j = 0; j < n; ++j) out[j] += av * brow[j];
        }
    }
}

void matmul(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(m); ++i) {
        double* out = c + static_cast<size_t>(i) * n;
        std::fill(out, out + n, 0.0);
        const double* arow = a + static_cast<size_t>(i) * k;
        for (size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + p * n;
            for (size_t j = 0; j < n; ++j) out[j] += av * brow[j];
        }
    }
}

void matmul_at_b_ref(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        double* out = c + i * n;
        std::fill(out, out + n, 0.0);
        for (size_t p = 0; p < k; ++p) {
            const double av = a[p * m + i];
            const double* brow = b + p * n;
            for (size_t j = 0; j < n; ++j) out[j] += av * brow[j];
        }
    }
}

void matmul_at_b(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(m); ++i) {
        double* out = c + static_cast<size_t>(i) * n;
        std::fill(out, out + n, 0.0);
        for (size_t p = 0; p < k; ++p) {
            const double av = a[p * m + static_cast<size_t>(i)];
            const double* brow = b + p * n;
            for (size_t j = 0; j < n; ++j) out[j] += av * brow[j];
        }
    }
}

void matmul_a_bt_ref(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
    for (size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* out = c + i * n;
        for (size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double sum = 0.0;
            for (size_t p = 0; p < k; ++p) sum += arow[p] * brow[p];
            out[j] = sum;
        }
    }
}

void matmul_a_bt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(m); ++i) {
        const double* arow = a + static_cast<size_t>(i) * k;
        double* out = c + static_cast<size_t>(i) * n;
        for (size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double sum = 0.0;
            for (size_t p = 0; p < k; ++p) sum += arow[p] * brow[p];
            out[j] = sum;
        }
    }
}

double softmax_inplace(double* s, size_t n) {
    double mx = s[0];
    for (size_t i = 1; i < n; ++i) mx = std::max(mx, s[i]);
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        s[i] = std::exp(s[i] - mx);
        sum += s[i];
    }
    const double inv = 1.0 / sum;
    for (size_t i = 0; i < n; ++i) s[i] *= inv;
    return std::log(sum) + mx;
}

void adagrad_step_ref(double* param, double* accum, const double* grad, size_t n, double lr,
                      double eps) {
    for (size_t i = 0; i < n; ++i) {
        accum[i] += grad[i] * grad[i];
        param[i] -= lr * grad[i] / (std::sqrt(accum[i]) + eps);
    }
}

void adagrad_step(double* param, double* accum, const double* grad, size_t n, double lr,
                  double eps) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i) {
        accum[i] += grad[i] * grad[i];
        param[i] -= lr * grad[i] / (std::sqrt(accum[i]) + eps);
    }
}

void adam_step_ref(double* param, double* m, double* v, const double* grad, size_t n, double lr,
                   double beta1, double beta2, double eps, uint64_t t) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

void adam_step(double* param, double* m, double* v, const double* grad, size_t n, double lr,
               double beta1, double beta2, double eps, uint64_t t) {
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

}  // namespace stkgqa::kernels
