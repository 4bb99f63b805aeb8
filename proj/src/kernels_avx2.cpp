#include "nucpol/kernels.hpp"

#if defined(NUCPOL_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <cstring>

// Complex doubles are stored interleaved (re, im); one 256-bit lane holds two
// of them. A complex axpy column update vectorizes as
//   c += a * b  ==  re(c) += re(a)re(b) - im(a)im(b)
//                   im(c) += re(a)im(b) + im(a)re(b)
// using a broadcast of re(b)/im(b) and an addsub on the swapped lane.

namespace nucpol::kernels::avx2 {

namespace {

inline void axpy(const Complex* a, Complex* c, std::size_t m, Complex b) {
  const __m256d br = _mm256_set1_pd(b.real());
  const __m256d bi = _mm256_set1_pd(b.imag());
  const double* ap = reinterpret_cast<const double*>(a);
  double* cp = reinterpret_cast<double*>(c);
  std::size_t i = 0;
  const std::size_t m2 = (m / 2) * 2;
  for (; i < m2; i += 2) {
    const __m256d av = _mm256_loadu_pd(ap + 2 * i);
    const __m256d sw = _mm256_permute_pd(av, 0x5);  // swap re/im within each pair
    const __m256d prod = _mm256_addsub_pd(_mm256_mul_pd(av, br), _mm256_mul_pd(sw, bi));
    _mm256_storeu_pd(cp + 2 * i, _mm256_add_pd(_mm256_loadu_pd(cp + 2 * i), prod));
  }
  for (; i < m; ++i) c[i] += a[i] * b;
}

}  // namespace

void zgemm_nn(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n) {
  std::memset(C, 0, sizeof(Complex) * m * n);
  for (std::size_t j = 0; j < n; ++j) {
    Complex* cj = C + j * m;
    for (std::size_t l = 0; l < k; ++l) {
      const Complex b = B[l + j * k];
      if (b == Complex(0.0, 0.0)) continue;
      axpy(A + l * m, cj, m, b);
    }
  }
}

void zgemm_nh(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n) {
  std::memset(C, 0, sizeof(Complex) * m * n);
  for (std::size_t j = 0; j < n; ++j) {
    Complex* cj = C + j * m;
    for (std::size_t l = 0; l < k; ++l) {
      const Complex b = std::conj(B[j + l * n]);
      if (b == Complex(0.0, 0.0)) continue;
      axpy(A + l * m, cj, m, b);
    }
  }
}

double fro2(const Complex* a, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(a);
  const std::size_t len = 2 * n;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t len4 = (len / 4) * 4;
  for (; i < len4; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < len; ++i) s += p[i] * p[i];
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n4 = (n / 4) * 4;
  for (; i < n4; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double vmax(const double* x, std::size_t n) {
  std::size_t i = 0;
  double s = x[0];
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(x);
    i = 4;
    const std::size_t n4 = (n / 4) * 4;
    for (; i < n4; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    s = lanes[0];
    for (int l = 1; l < 4; ++l) s = lanes[l] > s ? lanes[l] : s;
  }
  for (; i < n; ++i) s = x[i] > s ? x[i] : s;
  return s;
}

}  // namespace nucpol::kernels::avx2

#endif  // NUCPOL_HAVE_AVX2_KERNELS
