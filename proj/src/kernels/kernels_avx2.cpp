#include "sgnet/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define SGNET_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#else
#define SGNET_HAVE_AVX2_KERNELS 0
#endif

namespace sgnet::kernels {

#if SGNET_HAVE_AVX2_KERNELS

#define SGNET_AVX2 __attribute__((target("avx2,fma")))

namespace {

SGNET_AVX2 inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// row += alpha * src over n entries
SGNET_AVX2 inline void row_axpy(std::size_t n, double alpha, const double* src, double* row) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        __m256d c0 = _mm256_loadu_pd(row + j);
        __m256d c1 = _mm256_loadu_pd(row + j + 4);
        c0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(src + j), c0);
        c1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(src + j + 4), c1);
        _mm256_storeu_pd(row + j, c0);
        _mm256_storeu_pd(row + j + 4, c1);
    }
    for (; j + 4 <= n; j += 4) {
        _mm256_storeu_pd(row + j,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(src + j), _mm256_loadu_pd(row + j)));
    }
    for (; j < n; ++j) row[j] += alpha * src[j];
}

SGNET_AVX2 double dot(std::size_t n, const double* x, const double* y) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

SGNET_AVX2 double sum(std::size_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

SGNET_AVX2 void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
                        const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a[i * k + p];
            if (aip != 0.0) row_axpy(n, aip, b + p * n, crow);
        }
    }
}

SGNET_AVX2 void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
                        const double* b, double* c) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            if (arow[i] != 0.0) row_axpy(n, arow[i], brow, c + i * n);
        }
    }
}

SGNET_AVX2 void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a,
                        const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(k, a + i * k, b + j * k);
    }
}

SGNET_AVX2 void add(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] + y[i];
}

SGNET_AVX2 void sub(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] - y[i];
}

SGNET_AVX2 void mul(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

SGNET_AVX2 void scale(std::size_t n, double alpha, const double* x, double* out) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = alpha * x[i];
}

SGNET_AVX2 void axpy(std::size_t n, double alpha, const double* x, double* y) {
    row_axpy(n, alpha, x, y);
}

SGNET_AVX2 void fma_acc(std::size_t n, const double* x, const double* y, double* acc) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                                                  _mm256_loadu_pd(acc + i)));
    }
    for (; i < n; ++i) acc[i] += x[i] * y[i];
}

SGNET_AVX2 void adamw(std::size_t n, double* param, const double* grad, double* m, double* v,
                      const AdamWScalars& s) {
    const __m256d b1 = _mm256_set1_pd(s.beta1);
    const __m256d b2 = _mm256_set1_pd(s.beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - s.beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - s.beta2);
    const __m256d inv_bc1 = _mm256_set1_pd(1.0 / s.bias_correction1);
    const __m256d inv_bc2 = _mm256_set1_pd(1.0 / s.bias_correction2);
    const __m256d eps = _mm256_set1_pd(s.eps);
    const __m256d lr = _mm256_set1_pd(s.lr);
    const __m256d decay = _mm256_set1_pd(1.0 - s.lr * s.weight_decay);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_add_pd(_mm256_mul_pd(b1, mv), _mm256_mul_pd(omb1, g));
        vv = _mm256_add_pd(_mm256_mul_pd(b2, vv), _mm256_mul_pd(_mm256_mul_pd(omb2, g), g));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_mul_pd(mv, inv_bc1);
        const __m256d vhat = _mm256_mul_pd(vv, inv_bc2);
        const __m256d step =
            _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(param + i), decay);
        _mm256_storeu_pd(param + i, _mm256_sub_pd(p, step));
    }
    if (i < n) {
        AdamWScalars tail = s;
        scalar_table().adamw(n - i, param + i, grad + i, m + i, v + i, tail);
    }
}

}  // namespace

const KernelTable* avx2_table() {
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    static const KernelTable table{Backend::Avx2, "avx2", gemm_nn, gemm_tn, gemm_nt, add,
                                   sub,   mul,       scale,  axpy,    fma_acc, sum, dot, adamw};
    return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace sgnet::kernels
