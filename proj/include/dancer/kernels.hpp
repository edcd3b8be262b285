#pragma once

#include <cstdint>

#include "dancer/common.hpp"

namespace dancer::kernels {

// Dense kernels used by the tape ops. Each has a serial reference version
// under kernels::serial; the default versions parallelize over independent
// output elements with OpenMP, so results are bitwise identical to the
// serial reference for any thread count.

namespace serial {

// y = A x (A: m x n), or y += A x when acc.
void matvec(real_t* y, const real_t* A, const real_t* x, int64_t m, int64_t n, bool acc);

// y = A^T x (A: m x n, x: m, y: n), or += when acc.
void matvec_t(real_t* y, const real_t* A, const real_t* x, int64_t m, int64_t n, bool acc);

// C = A B^T (A: m x k, B: n x k, C: m x n), or += when acc.
void matmul_nt(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc);

// C = A^T B (A: k x m, B: k x n, C: m x n), or += when acc.
void matmul_tn(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc);

// C = A B (A: m x k, B: k x n, C: m x n), or += when acc.
void matmul_nn(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc);

// A += u v^T (A: m x n).
void outer_acc(real_t* A, const real_t* u, const real_t* v, int64_t m, int64_t n);

}  // namespace serial

void matvec(real_t* y, const real_t* A, const real_t* x, int64_t m, int64_t n, bool acc);
void matvec_t(real_t* y, const real_t* A, const real_t* x, int64_t m, int64_t n, bool acc);
void matmul_nt(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc);
void matmul_tn(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc);
void matmul_nn(real_t* C, const real_t* A, const real_t* B, int64_t m, int64_t n, int64_t k,
               bool acc);
void outer_acc(real_t* A, const real_t* u, const real_t* v, int64_t m, int64_t n);

// softmax/log-softmax with max subtraction; safe for any finite logits.
void softmax(real_t* out, const real_t* logits, int64_t n);
void log_softmax(real_t* out, const real_t* logits, int64_t n);

}  // namespace dancer::kernels
