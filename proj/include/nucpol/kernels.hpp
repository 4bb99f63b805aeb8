#pragma once

#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

// Arithmetic inner loops used by the propagator/protocol hot paths.
// Every kernel exists as a scalar reference implementation plus, where the
// hardware supports it, a SIMD variant (AVX2+FMA on x86-64, NEON on aarch64).
// The active variant is selected once at startup; NUCPOL_KERNELS=scalar|avx2|
// neon|auto overrides the choice. Scalar and SIMD paths are equivalence-tested
// against each other and against Eigen.

namespace nucpol::kernels {

using Complex = std::complex<double>;

enum class Backend { scalar, avx2, neon };

Backend active_backend();
const char* backend_name(Backend b);
const char* active_backend_name();

// Dense column-major complex kernels. Matrices are contiguous, no padding.
//
//   zgemm_nn:  C(m x n) = A(m x k) * B(k x n)
//   zgemm_nh:  C(m x n) = A(m x k) * B^H   with B stored as (n x k)
//   fro2:      sum_i |a_i|^2
//   dot:       sum_i x_i * y_i              (real)
//   vmax:      max_i x_i                    (n >= 1)
void zgemm_nn(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n);
void zgemm_nh(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n);
double fro2(const Complex* a, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double vmax(const double* x, std::size_t n);

namespace scalar {
void zgemm_nn(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n);
void zgemm_nh(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n);
double fro2(const Complex* a, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double vmax(const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define NUCPOL_HAVE_AVX2_KERNELS 1
namespace avx2 {
void zgemm_nn(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n);
void zgemm_nh(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n);
double fro2(const Complex* a, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double vmax(const double* x, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define NUCPOL_HAVE_NEON_KERNELS 1
namespace neon {
void zgemm_nn(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n);
void zgemm_nh(const Complex* A, const Complex* B, Complex* C,
              std::size_t m, std::size_t k, std::size_t n);
double fro2(const Complex* a, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double vmax(const double* x, std::size_t n);
}  // namespace neon
#endif

// Eigen conveniences routed through the dispatched kernels.

inline Eigen::MatrixXcd multiply(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd c(a.rows(), b.cols());
  zgemm_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

// a * b^H
inline Eigen::MatrixXcd multiply_adjoint(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd c(a.rows(), b.rows());
  zgemm_nh(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
  return c;
}

// v * rho * v^H
inline Eigen::MatrixXcd congruence(const Eigen::MatrixXcd& v, const Eigen::MatrixXcd& rho) {
  return multiply_adjoint(multiply(v, rho), v);
}

inline double frobenius_sq(const Eigen::MatrixXcd& a) {
  return fro2(a.data(), static_cast<std::size_t>(a.size()));
}

}  // namespace nucpol::kernels
