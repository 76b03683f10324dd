#include "dtrn/gemm.hpp"

#include <algorithm>
#include <cstring>

namespace dtrn {

namespace {

// K/N blocking keeps the streamed panel of B inside L2 while four rows of C
// stay in registers.
constexpr std::size_t kBlockK = 256;
constexpr std::size_t kBlockN = 512;

void zero(double* c, std::size_t count) { std::memset(c, 0, count * sizeof(double)); }

}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  if (!accumulate) zero(c, m * n);
  for (std::size_t k0 = 0; k0 < k; k0 += kBlockK) {
    const std::size_t kmax = std::min(k0 + kBlockK, k);
    for (std::size_t j0 = 0; j0 < n; j0 += kBlockN) {
      const std::size_t jmax = std::min(j0 + kBlockN, n);
      std::size_t i = 0;
      for (; i + 4 <= m; i += 4) {
        const double* a0 = a + i * k;
        const double* a1 = a0 + k;
        const double* a2 = a1 + k;
        const double* a3 = a2 + k;
        double* c0 = c + i * n;
        double* c1 = c0 + n;
        double* c2 = c1 + n;
        double* c3 = c2 + n;
        for (std::size_t kk = k0; kk < kmax; ++kk) {
          const double v0 = a0[kk], v1 = a1[kk], v2 = a2[kk], v3 = a3[kk];
          const double* brow = b + kk * n;
          for (std::size_t j = j0; j < jmax; ++j) {
            const double bj = brow[j];
            c0[j] += v0 * bj;
            c1[j] += v1 * bj;
            c2[j] += v2 * bj;
            c3[j] += v3 * bj;
          }
        }
      }
      for (; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t kk = k0; kk < kmax; ++kk) {
          const double v = ai[kk];
          const double* brow = b + kk * n;
          for (std::size_t j = j0; j < jmax; ++j) ci[j] += v * brow[j];
        }
      }
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  // Dot products over contiguous rows of both A and B; 2x2 output tile.
  std::size_t i = 0;
  for (; i + 2 <= m; i += 2) {
    const double* a0 = a + i * k;
    const double* a1 = a0 + k;
    double* c0 = c + i * n;
    double* c1 = c0 + n;
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      double s00 = 0, s01 = 0, s10 = 0, s11 = 0;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double x0 = a0[kk], x1 = a1[kk];
        const double y0 = b0[kk], y1 = b1[kk];
        s00 += x0 * y0;
        s01 += x0 * y1;
        s10 += x1 * y0;
        s11 += x1 * y1;
      }
      if (accumulate) {
        c0[j] += s00;
        c0[j + 1] += s01;
        c1[j] += s10;
        c1[j + 1] += s11;
      } else {
        c0[j] = s00;
        c0[j + 1] = s01;
        c1[j] = s10;
        c1[j + 1] = s11;
      }
    }
    for (; j < n; ++j) {
      const double* bj = b + j * k;
      double s0 = 0, s1 = 0;
      for (std::size_t kk = 0; kk < k; ++kk) {
        s0 += a0[kk] * bj[kk];
        s1 += a1[kk] * bj[kk];
      }
      if (accumulate) {
        c0[j] += s0;
        c1[j] += s1;
      } else {
        c0[j] = s0;
        c1[j] = s1;
      }
    }
  }
  for (; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s = 0;
      for (std::size_t kk = 0; kk < k; ++kk) s += ai[kk] * bj[kk];
      if (accumulate) {
        ci[j] += s;
      } else {
        ci[j] = s;
      }
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  if (!accumulate) zero(c, m * n);
  // kij order: A[kk,i] broadcast against contiguous B and C rows.
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double* arow = a + kk * m;
    const double* brow = b + kk * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = arow[i];
      double* ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += v * brow[j];
    }
  }
}

void matvec(std::size_t m, std::size_t n, const double* a, const double* x, double* y,
            bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + i * n;
    const double* a1 = a0 + n;
    const double* a2 = a1 + n;
    const double* a3 = a2 + n;
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = x[j];
      s0 += a0[j] * xj;
      s1 += a1[j] * xj;
      s2 += a2[j] * xj;
      s3 += a3[j] * xj;
    }
    if (accumulate) {
      y[i] += s0;
      y[i + 1] += s1;
      y[i + 2] += s2;
      y[i + 3] += s3;
    } else {
      y[i] = s0;
      y[i + 1] = s1;
      y[i + 2] = s2;
      y[i + 3] = s3;
    }
  }
  for (; i < m; ++i) {
    const double* ai = a + i * n;
    double s = 0;
    for (std::size_t j = 0; j < n; ++j) s += ai[j] * x[j];
    if (accumulate) {
      y[i] += s;
    } else {
      y[i] = s;
    }
  }
}

void matvec_t(std::size_t m, std::size_t n, const double* a, const double* x, double* y,
              bool accumulate) {
  if (!accumulate) zero(y, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = x[i];
    const double* ai = a + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += v * ai[j];
  }
}

}  // namespace dtrn
