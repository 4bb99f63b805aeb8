#include "nucpol/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace nucpol::kernels {

namespace scalar {

void zgemm_nn(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n) {
  std::memset(C, 0, sizeof(Complex) * m * n);
  for (std::size_t j = 0; j < n; ++j) {
    Complex* cj = C + j * m;
    for (std::size_t l = 0; l < k; ++l) {
      const Complex b = B[l + j * k];
      if (b == Complex(0.0, 0.0)) continue;
      const Complex* al = A + l * m;
      for (std::size_t i = 0; i < m; ++i) cj[i] += al[i] * b;
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
      const Complex* al = A + l * m;
      for (std::size_t i = 0; i < m; ++i) cj[i] += al[i] * b;
    }
  }
}

double fro2(const Complex* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double vmax(const double* x, std::size_t n) {
  double s = x[0];
  for (std::size_t i = 1; i < n; ++i) s = x[i] > s ? x[i] : s;
  return s;
}

}  // namespace scalar

namespace {

Backend detect_backend() {
  const char* env = std::getenv("NUCPOL_KERNELS");
  std::string req = env ? env : "auto";
#if defined(NUCPOL_HAVE_AVX2_KERNELS)
  const bool have_avx2 = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (req == "avx2") return have_avx2 ? Backend::avx2 : Backend::scalar;
  if (req == "scalar") return Backend::scalar;
  return have_avx2 ? Backend::avx2 : Backend::scalar;
#elif defined(NUCPOL_HAVE_NEON_KERNELS)
  if (req == "scalar") return Backend::scalar;
  return Backend::neon;
#else
  (void)req;
  return Backend::scalar;
#endif
}

}  // namespace

Backend active_backend() {
  static const Backend b = detect_backend();
  return b;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
    default: return "scalar";
  }
}

const char* active_backend_name() { return backend_name(active_backend()); }

#define NUCPOL_DISPATCH(fn, ...)                            \
  switch (active_backend()) {                               \
    NUCPOL_CASE_AVX2(fn, __VA_ARGS__)                       \
    NUCPOL_CASE_NEON(fn, __VA_ARGS__)                       \
    default: return scalar::fn(__VA_ARGS__);                \
  }

#if defined(NUCPOL_HAVE_AVX2_KERNELS)
#define NUCPOL_CASE_AVX2(fn, ...) case Backend::avx2: return avx2::fn(__VA_ARGS__);
#else
#define NUCPOL_CASE_AVX2(fn, ...)
#endif

#if defined(NUCPOL_HAVE_NEON_KERNELS)
#define NUCPOL_CASE_NEON(fn, ...) case Backend::neon: return neon::fn(__VA_ARGS__);
#else
#define NUCPOL_CASE_NEON(fn, ...)
#endif

void zgemm_nn(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n) {
  NUCPOL_DISPATCH(zgemm_nn, A, B, C, m, k, n)
}

void zgemm_nh(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n) {
  NUCPOL_DISPATCH(zgemm_nh, A, B, C, m, k, n)
}

double fro2(const Complex* a, std::size_t n) { NUCPOL_DISPATCH(fro2, a, n) }

double dot(const double* x, const double* y, std::size_t n) { NUCPOL_DISPATCH(dot, x, y, n) }

double vmax(const double* x, std::size_t n) { NUCPOL_DISPATCH(vmax, x, n) }

}  // namespace nucpol::kernels
