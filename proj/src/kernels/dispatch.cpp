#include <cassert>
#include <cstdlib>
#include <string_view>

#include "declsolve/kernels.hpp"

namespace declsolve::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table& select_table() {
  if (const char* forced = std::getenv("DECLSOLVE_KERNELS")) {
    if (const Table* t = find(forced)) return *t;
  }
  if (const Table* t = avx2_table(); t != nullptr && cpu_has_avx2_fma()) return *t;
  return scalar_table();
}

}  // namespace

const Table* find(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2" && cpu_has_avx2_fma()) return avx2_table();
  return nullptr;
}

const Table& active() {
  static const Table& table = select_table();
  return table;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}
double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
double asum(std::span<const double> a) { return active().asum(a.data(), a.size()); }
double sumsq(std::span<const double> a) { return active().sumsq(a.data(), a.size()); }
double amax(std::span<const double> a) { return active().amax(a.data(), a.size()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}
void scale(double alpha, std::span<const double> x, std::span<double> out) {
  assert(x.size() == out.size());
  active().scale(alpha, x.data(), out.data(), x.size());
}
void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().add(a.data(), b.data(), out.data(), a.size());
}
void sub(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().sub(a.data(), b.data(), out.data(), a.size());
}
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().mul(a.data(), b.data(), out.data(), a.size());
}
void div(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().div(a.data(), b.data(), out.data(), a.size());
}

void gemv(const Table& t, const double* a, std::size_t rows, std::size_t cols, const double* x,
          double* out) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = t.dot(a + i * cols, x, cols);
}

void gemv_t(const Table& t, const double* a, std::size_t rows, std::size_t cols, const double* x,
            double* out) {
  for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (x[i] != 0.0) t.axpy(x[i], a + i * cols, out, cols);
  }
}

void gemm(const Table& t, bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c) {
  // op(A) is m x k, op(B) is k x n, C is m x n.
  // Storage: A is (trans_a ? k x m : m x k), B is (trans_b ? n x k : k x n).
  if (n == 1 && !trans_b) {
    if (trans_a) {
      gemv_t(t, a, k, m, b, c);
    } else {
      gemv(t, a, m, k, b, c);
    }
    return;
  }
  if (!trans_a && trans_b) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] = t.dot(a + i * k, b + j * k, k);
    }
    return;
  }
  for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  if (!trans_b) {
    // C[i,:] += op(A)[i,p] * B[p,:]
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = trans_a ? a[p * m + i] : a[i * k + p];
        if (aip != 0.0) t.axpy(aip, b + p * n, c + i * n, n);
      }
    }
    return;
  }
  // A' * B': C[i,j] = sum_p A[p,i] * B[j,p]
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[j * k + p];
      c[i * n + j] = s;
    }
  }
}

}  // namespace declsolve::kernels
