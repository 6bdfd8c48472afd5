#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvqkd {

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Extended-precision scalar for state construction. The purification schemes
// emulate singular limits with strongly unbalanced couplers, which drives the
// condition number of the covariance matrices to ~1e13; the purity of those
// states lives in cancellations that double (and long double) arithmetic
// destroys. Quad precision keeps them intact.
#if defined(__SIZEOF_FLOAT128__)
using wide = __float128;
inline constexpr double wide_epsilon = 1.93e-34;
#else
using wide = long double;
inline constexpr double wide_epsilon = 1.1e-19;
#endif

template <typename T>
constexpr double scalar_epsilon() {
  if constexpr (sizeof(T) > sizeof(long double)) return wide_epsilon;
  else if constexpr (sizeof(T) > sizeof(double)) return 1.1e-19;
  else return 2.3e-16;
}

template <typename T>
inline T generic_sqrt(T x) {
  if (x <= T(0)) {
    if (x < T(0)) throw NumericalError("sqrt of negative value");
    return T(0);
  }
  // Newton refinement of a double seed; two steps reach quad precision.
  T y = static_cast<T>(std::sqrt(static_cast<double>(x)));
  y = T(0.5) * (y + x / y);
  y = T(0.5) * (y + x / y);
  return y;
}

inline double to_double(wide x) { return static_cast<double>(x); }

// Dense square matrix, row-major. Sized for a handful of optical modes; all
// operations are plain O(n^2)/O(n^3) loops.
template <typename T>
class SquareMat {
 public:
  SquareMat() : n_(0) {}
  explicit SquareMat(int n) : n_(n), a_(static_cast<size_t>(n) * n, T(0)) {}

  static SquareMat identity(int n) {
    SquareMat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  int size() const { return n_; }
  T& operator()(int r, int c) { return a_[static_cast<size_t>(r) * n_ + c]; }
  const T& operator()(int r, int c) const { return a_[static_cast<size_t>(r) * n_ + c]; }

  template <typename U>
  SquareMat<U> cast() const {
    SquareMat<U> out(n_);
    for (int r = 0; r < n_; ++r)
      for (int c = 0; c < n_; ++c) out(r, c) = static_cast<U>((*this)(r, c));
    return out;
  }

  SquareMat keep_rows_cols(const std::vector<int>& idx) const {
    SquareMat out(static_cast<int>(idx.size()));
    for (size_t r = 0; r < idx.size(); ++r)
      for (size_t c = 0; c < idx.size(); ++c)
        out(static_cast<int>(r), static_cast<int>(c)) = (*this)(idx[r], idx[c]);
    return out;
  }

 private:
  int n_;
  std::vector<T> a_;
};

// Lower Cholesky factor; requires positive definiteness.
template <typename T>
SquareMat<T> cholesky(const SquareMat<T>& a) {
  const int n = a.size();
  SquareMat<T> L(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      T s = a(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (s <= T(0)) throw NumericalError("covariance matrix not positive definite");
        L(i, i) = generic_sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  return L;
}

// Singular values by one-sided (Hestenes) Jacobi: rotate column pairs until
// mutually orthogonal; the column norms are then the singular values.
// Returned in descending order.
template <typename T>
std::vector<T> singular_values(SquareMat<T> a) {
  const int n = a.size();
  const T tol = T(64 * scalar_epsilon<T>());
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        T app = T(0), aqq = T(0), apq = T(0);
        for (int i = 0; i < n; ++i) {
          app += a(i, p) * a(i, p);
          aqq += a(i, q) * a(i, q);
          apq += a(i, p) * a(i, q);
        }
        if (apq * apq <= tol * tol * app * aqq) continue;
        rotated = true;
        const T zeta = (aqq - app) / (T(2) * apq);
        const T azeta = zeta >= T(0) ? zeta : -zeta;
        const T t = (zeta >= T(0) ? T(1) : T(-1)) / (azeta + generic_sqrt(T(1) + zeta * zeta));
        const T c = T(1) / generic_sqrt(T(1) + t * t);
        const T s = c * t;
        for (int i = 0; i < n; ++i) {
          const T aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
      }
    }
    if (!rotated) {
      std::vector<T> sv(n);
      for (int p = 0; p < n; ++p) {
        T s = T(0);
        for (int i = 0; i < n; ++i) s += a(i, p) * a(i, p);
        sv[p] = generic_sqrt(s);
      }
      std::sort(sv.begin(), sv.end(), [](T x, T y) { return x > y; });
      return sv;
    }
  }
  throw NumericalError("singular-value iteration did not converge");
}

}  // namespace detail
}  // namespace cvqkd
