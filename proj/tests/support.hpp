#pragma once

// Test-side oracles and hand-rolled generators. Nothing here calls into the
// library's generator code: matrices are rebuilt from scratch.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace dqo_test {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// [n] summed as q^{n-1} + q^{n-3} + ... + q^{-(n-1)}: independent of the sinh ratio.
inline double box_sum(double tau, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    s += std::exp((n - 1 - 2 * k) * tau);
  }
  return s;
}

struct Model {
  double omega;
  double tau;  // 0 = undeformed
  int n_max;

  int dim() const { return n_max + 1; }
  double phi(int n) const { return n <= 0 ? 0.0 : box_sum(tau, n); }
  double shift(int n) const { return 0.5 * (phi(n + 2) - phi(n)); }
  double level(int n) const { return 0.5 * omega * (phi(n + 1) + phi(n)); }
};

// Thermal D_+(x) from the plain exponential form of coth.
inline double thermal_dplus(double lambda, double temperature, double omega, double x) {
  if (temperature == 0.0) {
    return 0.5 * lambda;
  }
  const double e = std::exp(-omega * x / temperature);
  return 0.5 * lambda * (1.0 + e) / (1.0 - e);
}

struct Bath {
  double lambda;
  double temperature;
  double dplus(const Model& m, double x) const { return thermal_dplus(lambda, temperature, m.omega, x); }
};

inline Mat annihilator(const Model& m) {
  Mat a = Mat::Zero(m.dim(), m.dim());
  for (int n = 1; n <= m.n_max; ++n) {
    a(n - 1, n) = std::sqrt(m.phi(n));
  }
  return a;
}

// Operator form of the thermal equation,
//   -i[H, rho] + ([[D_+ A, rho], A^+] + h.c.) + (lambda/2)({AA^+, rho} - {A^+A, rho})
//   + lambda (A rho A^+ - A^+ rho A),
// on an enlarged basis so truncation only enters through the final projection.
// Valid for states supported away from the top edge.
inline Mat reference_rhs(const Model& m, const Bath& b, const Mat& rho_small) {
  Model big{m.omega, m.tau, m.n_max + 3};
  const int d = big.dim();
  Mat rho = Mat::Zero(d, d);
  rho.topLeftCorner(m.dim(), m.dim()) = rho_small;
  const Mat a = annihilator(big);
  const Mat ad = a.adjoint();
  Mat h = Mat::Zero(d, d);
  Mat dp = Mat::Zero(d, d);  // D_+(Omega(N))
  for (int n = 0; n < d; ++n) {
    h(n, n) = big.level(n);
    dp(n, n) = b.dplus(big, big.shift(n));
  }
  const Complex i(0.0, 1.0);
  const double lam = b.lambda;
  Mat out = -i * (h * rho - rho * h);
  const Mat x = dp * a;
  const Mat xr = x * rho - rho * x;
  const Mat t = xr * ad - ad * xr;
  out += t + t.adjoint();
  const Mat aad = a * ad;
  const Mat ada = ad * a;
  out += 0.5 * lam * (aad * rho + rho * aad - ada * rho - rho * ada);
  out += lam * (a * rho * ad - ad * rho * a);
  return out.topLeftCorner(m.dim(), m.dim());
}

// Positive, unit-trace, Hermitian, supported on lo..hi.
inline Mat random_state(int dim, int lo, int hi, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const int k = hi - lo + 1;
  Mat x(k, k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      x(r, c) = Complex(g(rng), g(rng));
    }
  }
  Mat blk = x * x.adjoint();
  blk /= blk.trace().real();
  Mat rho = Mat::Zero(dim, dim);
  rho.block(lo, lo, k, k) = 0.5 * (blk + blk.adjoint());
  return rho;
}

// Generic Hermitian (not necessarily positive) matrix on lo..hi.
inline Mat random_hermitian(int dim, int lo, int hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat x = Mat::Zero(dim, dim);
  for (int r = lo; r <= hi; ++r) {
    for (int c = lo; c <= hi; ++c) {
      x(r, c) = Complex(u(rng), u(rng));
    }
  }
  return 0.5 * (x + x.adjoint());
}

inline std::vector<double> random_weights(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (double& x : w) {
    x = u(rng);
  }
  return w;
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace dqo_test
