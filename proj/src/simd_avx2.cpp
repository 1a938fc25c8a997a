#include "scto/simd.hpp"

#include <cmath>
#include <immintrin.h>

// AVX2 kernels. Multiplies and adds are kept separate (no FMA) so that
// each lane performs exactly the operations of the scalar reference.

namespace scto::simd {
namespace {

inline double combine4(__m256d acc) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

inline __m256d abs_pd(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(v, mask);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    double s = combine4(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = combine4(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double abs_sum_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, abs_pd(_mm256_loadu_pd(a + i)));
    double s = combine4(acc);
    for (; i < n; ++i) s += std::fabs(a[i]);
    return s;
}

double abs_diff_sum_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, abs_pd(d));
    }
    double s = combine4(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

void matvec_avx2(const double* m, const double* x, double* y, std::size_t n) {
    for (std::size_t r = 0; r < n; ++r) y[r] = dot_avx2(m + r * n, x, n);
}

}  // namespace

const Kernels& avx2_kernels() {
    static const Kernels k{dot_avx2,      sum_avx2,   abs_sum_avx2,
                           abs_diff_sum_avx2, axpy_avx2, scale_avx2,
                           matvec_avx2};
    return k;
}

}  // namespace scto::simd
