#pragma once

// Dense double-precision inner loops used by the matrix engine.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA variant. The active table is chosen once at startup from CPUID
// (overridable with SGNET_SIMD=scalar|avx2) and can be switched explicitly for
// equivalence testing. All matrices are row-major and densely packed.

#include <cstddef>
#include <string_view>
#include <vector>

namespace sgnet::kernels {

enum class Backend { Scalar, Avx2 };

struct AdamWScalars {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double weight_decay;
    double bias_correction1;  // 1 - beta1^t
    double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
    Backend backend;
    const char* name;

    // C(m x n) += A(m x k) * B(k x n)
    void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c);
    // C(m x n) += A(k x m)^T * B(k x n)
    void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c);
    // C(m x n) += A(m x k) * B(n x k)^T
    void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c);

    void (*add)(std::size_t n, const double* x, const double* y, double* out);
    void (*sub)(std::size_t n, const double* x, const double* y, double* out);
    void (*mul)(std::size_t n, const double* x, const double* y, double* out);
    void (*scale)(std::size_t n, double alpha, const double* x, double* out);
    // y += alpha * x
    void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
    // acc += x * y
    void (*fma_acc)(std::size_t n, const double* x, const double* y, double* acc);
    double (*sum)(std::size_t n, const double* x);
    double (*dot)(std::size_t n, const double* x, const double* y);

    // One decoupled-weight-decay Adam step over a flat parameter block.
    void (*adamw)(std::size_t n, double* param, const double* grad, double* m, double* v,
                  const AdamWScalars& s);
};

const KernelTable& scalar_table();
// nullptr when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table currently used by the matrix engine.
const KernelTable& active();

void set_backend(Backend backend);
std::vector<Backend> available_backends();
std::string_view backend_name(Backend backend);

}  // namespace sgnet::kernels
