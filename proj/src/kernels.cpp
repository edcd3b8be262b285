#include "dancer/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dancer::kernels {

namespace serial {

void matvec(real_t* y, const real_t* A, const real_t* x, int64_t m, int64_t n, bool acc) {
    for (int64_t i = 0; i < m; ++i) {
        real_t s = 0.0;
        const real_t* row = A + i * n;
        for (int64_t j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] = acc ? y[i] + s : s;
    }
}

void matvec_t(real_t* y, const real_t* A, const real_t* x, int64_t m, int64_t n, bool acc) {
    for (int64_t j = 0; j < n; ++j) {
        real_t s = 0.0;
        for (int64_t i = 0; i < m; ++i) s += A[i * n + j] * x[i];
        y[j] = acc ? y[j] + s : s;
    }
}

void matmul_nt(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc) {
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            real_t s = 0.0;
            const real_t* a = A + i * k;
            const real_t* b = B + j * k;
            for (int64_t t = 0; t < k; ++t) s += a[t] * b[t];
            C[i * n + j] = acc ? C[i * n + j] + s : s;
        }
    }
}

void matmul_tn(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc) {
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            real_t s = 0.0;
            for (int64_t t = 0; t < k; ++t) s += A[t * m + i] * B[t * n + j];
            C[i * n + j] = acc ? C[i * n + j] + s : s;
        }
    }
}

void matmul_nn(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc) {
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            real_t s = 0.0;
            for (int64_t t = 0; t < k; ++t) s += A[i * k + t] * B[t * n + j];
            C[i * n + j] = acc ? C[i * n + j] + s : s;
        }
    }
}

void outer_acc(real_t* A, const real_t* u, const real_t* v, int64_t m, int64_t n) {
    for (int64_t i = 0; i < m; ++i) {
        real_t ui = u[i];
        real_t* row = A + i * n;
        for (int64_t j = 0; j < n; ++j) row[j] += ui * v[j];
    }
}

}  // namespace serial

// The parallel versions split the output index space across threads; each
// output element is still the same serial dot product, so values match the
// reference bit for bit. Small shapes fall through to the serial code to
// skip the fork/join cost entirely (thresholds measured with dancer-bench).

namespace {
constexpr int64_t kMatvecGrain = 512 * 1024;
constexpr int64_t kMatmulGrain = 1024 * 1024;
}

void matvec(real_t* y, const real_t* A, const real_t* x, int64_t m, int64_t n, bool acc) {
    if (m * n <= kMatvecGrain) return serial::matvec(y, A, x, m, n, acc);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        real_t s = 0.0;
        const real_t* row = A + i * n;
        for (int64_t j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] = acc ? y[i] + s : s;
    }
}

void matvec_t(real_t* y, const real_t* A, const real_t* x, int64_t m, int64_t n, bool acc) {
    if (m * n <= kMatvecGrain) return serial::matvec_t(y, A, x, m, n, acc);
#pragma omp parallel for schedule(static)
    for (int64_t j = 0; j < n; ++j) {
        real_t s = 0.0;
        for (int64_t i = 0; i < m; ++i) s += A[i * n + j] * x[i];
        y[j] = acc ? y[j] + s : s;
    }
}

void matmul_nt(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc) {
    if (m * n * k <= kMatmulGrain) return serial::matmul_nt(C, A, B, m, n, k, acc);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            real_t s = 0.0;
            const real_t* a = A + i * k;
            const real_t* b = B + j * k;
            for (int64_t t = 0; t < k; ++t) s += a[t] * b[t];
            C[i * n + j] = acc ? C[i * n + j] + s : s;
        }
    }
}

void matmul_tn(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc) {
    if (m * n * k <= kMatmulGrain) return serial::matmul_tn(C, A, B, m, n, k, acc);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            real_t s = 0.0;
            for (int64_t t = 0; t < k; ++t) s += A[t * m + i] * B[t * n + j];
            C[i * n + j] = acc ? C[i * n + j] + s : s;
        }
    }
}

void matmul_nn(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc) {
    if (m * n * k <= kMatmulGrain) return serial::matmul_nn(C, A, B, m, n, k, acc);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            real_t s = 0.0;
            for (int64_t t = 0; t < k; ++t) s += A[i * k + t] * B[t * n + j];
            C[i * n + j] = acc ? C[i * n + j] + s : s;
        }
    }
}

void outer_acc(real_t* A, const real_t* u, const real_t* v, int64_t m, int64_t n) {
    if (m * n <= kMatvecGrain) return serial::outer_acc(A, u, v, m, n);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < m; ++i) {
        real_t ui = u[i];
        real_t* row = A + i * n;
        for (int64_t j = 0; j < n; ++j) row[j] += ui * v[j];
    }
}

void softmax(real_t* out, const real_t* logits, int64_t n) {
    real_t mx = logits[0];
    for (int64_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    real_t sum = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (int64_t i = 0; i < n; ++i) out[i] /= sum;
}

void log_softmax(real_t* out, const real_t* logits, int64_t n) {
    real_t mx = logits[0];
    for (int64_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    real_t sum = 0.0;
    for (int64_t i = 0; i < n; ++i) sum += std::exp(logits[i] - mx);
    real_t lse = mx + std::log(sum);
    for (int64_t i = 0; i < n; ++i) out[i] = logits[i] - lse;
}

}  // namespace dancer::kernels
