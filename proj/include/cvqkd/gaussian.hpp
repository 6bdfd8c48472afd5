#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>

#include "matrix.hpp"

namespace cvqkd {

enum class Quadrature : int { X = 0, P = 1 };

// Quadrature ordering is (x1,p1,x2,p2,...) throughout; variances are in
// shot-noise units (vacuum = 1).

struct ModeIndex {
  int index = 0;
  Quadrature quad = Quadrature::X;
};

// Block-diagonal symplectic form with 2x2 blocks [[0,1],[-1,0]].
struct SymplecticForm {
  int n_modes = 0;
  double operator()(int r, int c) const {
    if (r / 2 != c / 2) return 0.0;
    if (r % 2 == 0 && c == r + 1) return 1.0;
    if (r % 2 == 1 && c == r - 1) return -1.0;
    return 0.0;
  }
};

// Bosonic entropic function G(x) = (x+1)log2(x+1) - x log2 x, G(0) = 0.
inline double bosonic_entropy(double x) {
  if (x <= 0.0) return 0.0;
  const long double xl = x;
  return static_cast<double>((xl + 1.0L) * std::log2(xl + 1.0L) - xl * std::log2(xl));
}

namespace detail {

constexpr double kEigenClampTol = 1e-9;   // nu in [1 - tol, 1) is treated as 1
constexpr double kEigenErrorTol = 1e-6;   // below 1 - tol the state is rejected

template <typename T>
void beamsplitter_inplace(SquareMat<T>& g, int i, int j, T trans) {
  const int n = g.size();
  const T t = generic_sqrt(trans);
  const T r = generic_sqrt(T(1) - trans);
  for (int q = 0; q < 2; ++q) {
    const int a = 2 * i + q, b = 2 * j + q;
    for (int c = 0; c < n; ++c) {  // rows
      const T ra = g(a, c), rb = g(b, c);
      g(a, c) = t * ra + r * rb;
      g(b, c) = -r * ra + t * rb;
    }
    for (int c = 0; c < n; ++c) {  // columns
      const T ca = g(c, a), cb = g(c, b);
      g(c, a) = t * ca + r * cb;
      g(c, b) = -r * ca + t * cb;
    }
  }
}

template <typename T>
void phase_inplace(SquareMat<T>& g, int i, T phi) {
  const int n = g.size();
  T c = static_cast<T>(std::cos(static_cast<double>(phi)));
  T s = static_cast<T>(std::sin(static_cast<double>(phi)));
  const T norm = generic_sqrt(c * c + s * s);  // keep the rotation exactly symplectic
  c /= norm;
  s /= norm;
  const int a = 2 * i, b = 2 * i + 1;
  for (int k = 0; k < n; ++k) {
    const T ra = g(a, k), rb = g(b, k);
    g(a, k) = c * ra + s * rb;
    g(b, k) = -s * ra + c * rb;
  }
  for (int k = 0; k < n; ++k) {
    const T ca = g(k, a), cb = g(k, b);
    g(k, a) = c * ca + s * cb;
    g(k, b) = -s * ca + c * cb;
  }
}

// Gaussian thermal-loss channel on one mode: gamma_ii -> eta(gamma_ii + eps I)
// + (1-eta) I, cross covariances scaled by sqrt(eta). Exact also at eta = 1.
template <typename T>
void loss_channel_inplace(SquareMat<T>& g, int i, T eta, T eps) {
  const int n = g.size();
  const T cr = generic_sqrt(eta);
  for (int k = 0; k < n; ++k) {
    if (k / 2 == i) continue;
    g(k, 2 * i) *= cr;
    g(k, 2 * i + 1) *= cr;
    g(2 * i, k) *= cr;
    g(2 * i + 1, k) *= cr;
  }
  for (int q = 0; q < 2; ++q) {
    const int a = 2 * i + q;
    g(a, a) = eta * (g(a, a) + eps) + (T(1) - eta);
  }
  g(2 * i, 2 * i + 1) *= eta;
  g(2 * i + 1, 2 * i) *= eta;
}

template <typename T>
SquareMat<T> direct_sum(const SquareMat<T>& a, const SquareMat<T>& b) {
  SquareMat<T> g(a.size() + b.size());
  for (int r = 0; r < a.size(); ++r)
    for (int c = 0; c < a.size(); ++c) g(r, c) = a(r, c);
  for (int r = 0; r < b.size(); ++r)
    for (int c = 0; c < b.size(); ++c) g(a.size() + r, a.size() + c) = b(r, c);
  return g;
}

template <typename T>
SquareMat<T> keep_modes(const SquareMat<T>& g, const std::vector<int>& modes) {
  std::vector<int> idx;
  idx.reserve(2 * modes.size());
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return g.keep_rows_cols(idx);
}

// Conditioning on a homodyne outcome: rank-1 Schur update with the analytic
// pseudoinverse of X gamma X (only the measured diagonal entry is inverted),
// then the measured mode is removed.
template <typename T>
SquareMat<T> condition_homodyne(const SquareMat<T>& g, int mode, Quadrature quad) {
  const int n = g.size();
  const int idx = 2 * mode + static_cast<int>(quad);
  const T v = g(idx, idx);
  if (!(v > T(0))) throw std::invalid_argument("degenerate measured variance");
  SquareMat<T> out(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = g(r, c) - g(r, idx) * g(c, idx) / v;
  std::vector<int> keep;
  for (int m = 0; m < n / 2; ++m)
    if (m != mode) keep.push_back(m);
  return keep_modes(out, keep);
}

// Symplectic spectrum via Cholesky: the singular values of K = L^T Omega L
// equal the symplectic eigenvalues, each twice. The factorization runs in the
// scalar of the input; the (well-conditioned) singular values in long double.
template <typename T>
std::vector<double> symplectic_spectrum(const SquareMat<T>& g) {
  const int two_n = g.size();
  const SquareMat<T> L = cholesky(g);
  SquareMat<T> OL(two_n);  // Omega * L
  for (int i = 0; i < two_n / 2; ++i)
    for (int c = 0; c < two_n; ++c) {
      OL(2 * i, c) = L(2 * i + 1, c);
      OL(2 * i + 1, c) = -L(2 * i, c);
    }
  SquareMat<T> K(two_n);
  for (int r = 0; r < two_n; ++r)
    for (int c = 0; c < two_n; ++c) {
      T s = T(0);
      for (int k = 0; k < two_n; ++k) s += L(k, r) * OL(k, c);
      K(r, c) = s;
    }
  const auto sv = singular_values(K.template cast<long double>());
  std::vector<double> nu(two_n / 2);
  for (int i = 0; i < two_n / 2; ++i) {
    double v = static_cast<double>((sv[2 * i] + sv[2 * i + 1]) / 2.0L);
    if (v < 1.0 && v >= 1.0 - kEigenClampTol) v = 1.0;
    nu[i] = v;
  }
  return nu;
}

template <typename T>
double entropy_bits(const SquareMat<T>& g) {
  long double s = 0.0L;
  for (double nu : symplectic_spectrum(g)) {
    if (nu < 1.0 - kEigenErrorTol)
      throw NumericalError("unphysical symplectic eigenvalue " + std::to_string(nu));
    if (nu < 1.0) nu = 1.0;
    s += bosonic_entropy((nu - 1.0) / 2.0);
  }
  return static_cast<double>(s);
}

}  // namespace detail

// Second-moment matrix of n optical modes. Immutable value type: every
// operation returns a new state.
class CovarianceMatrix {
 public:
  static CovarianceMatrix vacuum(int n) {
    require(n >= 1, "vacuum: need at least one mode");
    return CovarianceMatrix(detail::SquareMat<double>::identity(2 * n));
  }

  static CovarianceMatrix squeezed_state(double v_s) {
    require(v_s > 0, "squeezed_state: variance must be positive");
    detail::SquareMat<double> g(2);
    g(0, 0) = v_s;
    g(1, 1) = 1.0 / v_s;
    return CovarianceMatrix(g);
  }

  static CovarianceMatrix thermal_state(double v) {
    require(v >= 1.0, "thermal_state: variance must be >= 1");
    detail::SquareMat<double> g(2);
    g(0, 0) = v;
    g(1, 1) = v;
    return CovarianceMatrix(g);
  }

  static CovarianceMatrix epr_state(double v) {
    require(v >= 1.0, "epr_state: variance must be >= 1");
    detail::SquareMat<double> g(4);
    const double c = std::sqrt(v * v - 1.0);
    for (int i = 0; i < 4; ++i) g(i, i) = v;
    g(0, 2) = g(2, 0) = c;
    g(1, 3) = g(3, 1) = -c;
    return CovarianceMatrix(g);
  }

  // Builds from explicit entries (row-major 2n x 2n); rejects asymmetry.
  static CovarianceMatrix from_entries(int n_modes, const std::vector<double>& entries) {
    const int d = 2 * n_modes;
    require(static_cast<int>(entries.size()) == d * d, "from_entries: size mismatch");
    detail::SquareMat<double> g(d);
    double scale = 1.0;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        g(r, c) = entries[static_cast<size_t>(r) * d + c];
        scale = std::max(scale, std::fabs(g(r, c)));
      }
    for (int r = 0; r < d; ++r)
      for (int c = r + 1; c < d; ++c)
        if (std::fabs(g(r, c) - g(c, r)) > 1e-12 * scale)
          throw std::invalid_argument("covariance matrix must be symmetric");
    return CovarianceMatrix(g);
  }

  int n_modes() const { return mat_.size() / 2; }
  double operator()(int r, int c) const { return mat_(r, c); }
  const detail::SquareMat<double>& raw() const { return mat_; }

  CovarianceMatrix direct_sum(const CovarianceMatrix& other) const {
    return CovarianceMatrix(detail::direct_sum(mat_, other.mat_));
  }

  CovarianceMatrix apply_beamsplitter(int i, int j, double transmittance) const {
    check_mode(i);
    check_mode(j);
    require(i != j, "apply_beamsplitter: modes must differ");
    require(transmittance >= 0.0 && transmittance <= 1.0,
            "apply_beamsplitter: transmittance outside [0,1]");
    auto g = mat_;
    detail::beamsplitter_inplace(g, i, j, transmittance);
    return CovarianceMatrix(g);
  }

  CovarianceMatrix apply_phase(int i, double phi) const {
    check_mode(i);
    auto g = mat_;
    detail::phase_inplace(g, i, phi);
    return CovarianceMatrix(g);
  }

  CovarianceMatrix marginal(const std::vector<int>& modes) const {
    for (int m : modes) check_mode(m);
    return CovarianceMatrix(detail::keep_modes(mat_, modes));
  }

  CovarianceMatrix condition_on_homodyne(int mode, Quadrature quad) const {
    check_mode(mode);
    require(n_modes() > 1, "condition_on_homodyne: nothing would remain");
    return CovarianceMatrix(detail::condition_homodyne(mat_, mode, quad));
  }

  CovarianceMatrix condition_on_homodyne(ModeIndex m) const {
    return condition_on_homodyne(m.index, m.quad);
  }

  // Heterodyne = balanced split against a vacuum ancilla, then homodyne x on
  // one output and p on the other.
  CovarianceMatrix condition_on_heterodyne(int mode) const {
    check_mode(mode);
    const int anc = n_modes();
    auto t = direct_sum(vacuum(1)).apply_beamsplitter(mode, anc, 0.5);
    t = t.condition_on_homodyne(mode, Quadrature::X);
    return t.condition_on_homodyne(anc - 1, Quadrature::P);
  }

  // Absolute eigenvalues of i*Omega*gamma, one per mode, descending, clamped
  // to 1 when within 1e-9 below it.
  std::vector<double> symplectic_eigenvalues() const {
    return detail::symplectic_spectrum(mat_.cast<long double>());
  }

  double von_neumann_entropy() const { return detail::entropy_bits(mat_.cast<long double>()); }

  bool is_physical(double tol = detail::kEigenClampTol) const {
    for (double nu : symplectic_eigenvalues())
      if (nu < 1.0 - tol) return false;
    return true;
  }

 private:
  explicit CovarianceMatrix(detail::SquareMat<double> m) : mat_(std::move(m)) {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  }
  void check_mode(int m) const {
    if (m < 0 || m >= n_modes()) throw std::invalid_argument("mode index out of range");
  }

  detail::SquareMat<double> mat_;
};

}  // namespace cvqkd
