#pragma once

#include <cstddef>
#include <string>

namespace scto::simd {

// Data-parallel inner loops used by the operator and solver code.
//
// Every reduction accumulates into four lanes (lane j takes elements
// 4*i + j), combines them as ((l0+l1)+(l2+l3)) and then folds the tail
// sequentially. The scalar reference and the AVX2 variant follow the
// same order, so their results are bitwise identical; the equivalence
// suite asserts exactly that.
struct Kernels {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    double (*abs_sum)(const double* a, std::size_t n);
    double (*abs_diff_sum)(const double* a, const double* b, std::size_t n);
    // y = alpha*x + y
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*scale)(double alpha, double* x, std::size_t n);
    // dense row-major n x n matrix times vector
    void (*matvec)(const double* m, const double* x, double* y, std::size_t n);
};

const Kernels& scalar_kernels();
const Kernels& avx2_kernels();

// Runtime-selected backend: AVX2 when the CPU supports it, unless
// overridden by force_backend() or the SCTO_SIMD environment variable
// ("scalar" or "avx2").
const Kernels& active();
const char* active_name();
void force_backend(const std::string& name);  // "auto", "scalar", "avx2"

}  // namespace scto::simd
