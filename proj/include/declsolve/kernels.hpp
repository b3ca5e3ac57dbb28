#pragma once

// Dense double-precision inner loops used by the evaluator and the solvers.
//
// Every kernel has a portable scalar reference implementation and, where the
// target supports it, an AVX2/FMA variant. The variant is picked once at
// startup from CPU features; `DECLSOLVE_KERNELS=scalar|avx2` overrides the
// choice. Variants agree to rounding (reductions use a different summation
// order), and are tested against each other.

#include <cstddef>
#include <span>
#include <string_view>

namespace declsolve::kernels {

struct Table {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*asum)(const double* a, std::size_t n);
  double (*sumsq)(const double* a, std::size_t n);
  double (*amax)(const double* a, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = alpha * x
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  // out = a (op) b, elementwise; out may alias a or b
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  void (*div)(const double* a, const double* b, double* out, std::size_t n);
};

const Table& scalar_table();

/// AVX2/FMA table, or nullptr when this build has no x86 SIMD variant.
const Table* avx2_table();

/// Table selected for this process.
const Table& active();

/// Resolve a table by name ("scalar", "avx2"); nullptr when unavailable.
const Table* find(std::string_view name);

// Span conveniences over the active table. Sizes must match; checked only by
// assertion.
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double asum(std::span<const double> a);
double sumsq(std::span<const double> a);
double amax(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<const double> x, std::span<double> out);
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
void sub(std::span<const double> a, std::span<const double> b, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);
void div(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// out = A * x for row-major A (rows x cols).
void gemv(const Table& t, const double* a, std::size_t rows, std::size_t cols, const double* x,
          double* out);
/// out = A' * x for row-major A (rows x cols); out has `cols` entries.
void gemv_t(const Table& t, const double* a, std::size_t rows, std::size_t cols, const double* x,
            double* out);
/// C = op(A) * op(B), all row-major. `m x k` times `k x n` after transposition.
void gemm(const Table& t, bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c);

}  // namespace declsolve::kernels
