#pragma once

#include <cstddef>

namespace dtrn {

// Row-major dense matrix kernels. C is overwritten unless accumulate is set.
// Register-tiled enough to keep the convolution and LSTM paths compute-bound;
// no threading, fixed summation order, deterministic.

// C[M,N] = A[M,K] * B[K,N]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate = false);

// C[M,N] = A[M,K] * B[N,K]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate = false);

// C[M,N] = A[K,M]^T * B[K,N]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate = false);

// y[M] = A[M,N] * x[N]
void matvec(std::size_t m, std::size_t n, const double* a, const double* x, double* y,
            bool accumulate = false);

// y[N] = A[M,N]^T * x[M]
void matvec_t(std::size_t m, std::size_t n, const double* a, const double* x, double* y,
              bool accumulate = false);

}  // namespace dtrn
