#include "scto/simd.hpp"

#include <cmath>

// Scalar reference kernels. The 4-lane accumulation mirrors the AVX2
// register layout so both backends produce bitwise-equal results.

namespace scto::simd {
namespace {

inline double combine4(const double acc[4]) {
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    double s = combine4(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_scalar(const double* a, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += a[i];
        acc[1] += a[i + 1];
        acc[2] += a[i + 2];
        acc[3] += a[i + 3];
    }
    double s = combine4(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double abs_sum_scalar(const double* a, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += std::fabs(a[i]);
        acc[1] += std::fabs(a[i + 1]);
        acc[2] += std::fabs(a[i + 2]);
        acc[3] += std::fabs(a[i + 3]);
    }
    double s = combine4(acc);
    for (; i < n; ++i) s += std::fabs(a[i]);
    return s;
}

double abs_diff_sum_scalar(const double* a, const double* b, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += std::fabs(a[i] - b[i]);
        acc[1] += std::fabs(a[i + 1] - b[i + 1]);
        acc[2] += std::fabs(a[i + 2] - b[i + 2]);
        acc[3] += std::fabs(a[i + 3] - b[i + 3]);
    }
    double s = combine4(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void matvec_scalar(const double* m, const double* x, double* y, std::size_t n) {
    for (std::size_t r = 0; r < n; ++r) y[r] = dot_scalar(m + r * n, x, n);
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{dot_scalar,      sum_scalar,   abs_sum_scalar,
                           abs_diff_sum_scalar, axpy_scalar, scale_scalar,
                           matvec_scalar};
    return k;
}

}  // namespace scto::simd
