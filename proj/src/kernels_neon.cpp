#include "nucpol/kernels.hpp"

#if defined(NUCPOL_HAVE_NEON_KERNELS)

#include <arm_neon.h>

#include <cstring>

// One 128-bit lane holds a single complex double (re, im).

namespace nucpol::kernels::neon {

namespace {

inline void axpy(const Complex* a, Complex* c, std::size_t m, Complex b) {
  const float64x2_t br = vdupq_n_f64(b.real());
  const double bi_pair[2] = {-b.imag(), b.imag()};
  const float64x2_t bi = vld1q_f64(bi_pair);
  const double* ap = reinterpret_cast<const double*>(a);
  double* cp = reinterpret_cast<double*>(c);
  for (std::size_t i = 0; i < m; ++i) {
    const float64x2_t av = vld1q_f64(ap + 2 * i);
    const float64x2_t sw = vextq_f64(av, av, 1);
    float64x2_t cv = vld1q_f64(cp + 2 * i);
    cv = vfmaq_f64(cv, av, br);
    cv = vfmaq_f64(cv, sw, bi);
    vst1q_f64(cp + 2 * i, cv);
  }
}

}  // namespace

void zgemm_nn(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n) {
  std::memset(C, 0, sizeof(Complex) * m * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < k; ++l) {
      const Complex b = B[l + j * k];
      if (b == Complex(0.0, 0.0)) continue;
      axpy(A + l * m, C + j * m, m, b);
    }
  }
}

void zgemm_nh(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n) {
  std::memset(C, 0, sizeof(Complex) * m * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < k; ++l) {
      const Complex b = std::conj(B[j + l * n]);
      if (b == Complex(0.0, 0.0)) continue;
      axpy(A + l * m, C + j * m, m, b);
    }
  }
}

double fro2(const Complex* a, std::size_t n) {
  const double* p = reinterpret_cast<const double*>(a);
  const std::size_t len = 2 * n;
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  const std::size_t len2 = (len / 2) * 2;
  for (; i < len2; i += 2) {
    const float64x2_t v = vld1q_f64(p + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double s = vaddvq_f64(acc);
  for (; i < len; ++i) s += p[i] * p[i];
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  const std::size_t n2 = (n / 2) * 2;
  for (; i < n2; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double vmax(const double* x, std::size_t n) {
  std::size_t i = 0;
  double s = x[0];
  if (n >= 2) {
    float64x2_t acc = vld1q_f64(x);
    i = 2;
    const std::size_t n2 = (n / 2) * 2;
    for (; i < n2; i += 2) acc = vmaxq_f64(acc, vld1q_f64(x + i));
    s = vmaxvq_f64(acc);
  }
  for (; i < n; ++i) s = x[i] > s ? x[i] : s;
  return s;
}

}  // namespace nucpol::kernels::neon

#endif  // NUCPOL_HAVE_NEON_KERNELS
