#pragma once

// Dissipative generator of the damped deformed oscillator in the number
// representation, its population (birth-death) restriction, and an operator
// form built from matrix products that serves as an independent check.

#include <span>
#include <utility>
#include <vector>

#include "dqo/algebra.hpp"
#include "dqo/bath.hpp"

namespace dqo {

enum class TruncationPolicy {
  drop,        // terms reaching beyond n_max are zeroed; trace may leak
  reflecting,  // populations only: t_+(n_max) = 0, conservation is exact
};

const char* to_string(TruncationPolicy policy);

/// Hermitian, unit-trace state on the truncated basis.
class DensityMatrix {
 public:
  /// Checks Hermiticity and unit trace to `tol`.
  static DensityMatrix from_matrix(Matrix rho, double tol = 1e-12);
  static DensityMatrix fock(int dim, int n);
  static DensityMatrix diagonal(std::span<const double> populations);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& matrix() const { return rho_; }

 private:
  explicit DensityMatrix(Matrix rho) : rho_(std::move(rho)) {}
  Matrix rho_;
};

/// Nonnegative populations P(n) that sum to one.
class PopulationDist {
 public:
  /// Checks nonnegativity and unit sum to `tol`.
  static PopulationDist from_values(std::vector<double> p, double tol = 1e-12);
  static PopulationDist delta(int dim, int n);
  /// Rescales nonnegative weights to unit sum.
  static PopulationDist normalized(std::vector<double> weights);

  int dim() const { return static_cast<int>(p_.size()); }
  double operator[](int n) const { return p_[static_cast<std::size_t>(n)]; }
  const std::vector<double>& values() const { return p_; }

 private:
  explicit PopulationDist(std::vector<double> p) : p_(std::move(p)) {}
  std::vector<double> p_;
};

double hermiticity_defect(const Matrix& m);
double min_eigenvalue(const Matrix& rho);

struct TransitionRates {
  std::vector<double> up;    // t_+(n) = phi(n+1) (2 D_+(Omega(n)) - lambda)
  std::vector<double> down;  // t_-(n) = phi(n) (2 D_+(Omega(n-1)) + lambda)
};

/// Rates for a single level. t_-(0) is 0 and Omega(-1) is never evaluated.
std::pair<double, double> transition_rates(const Oscillator& model, const Bath& bath, int n);
TransitionRates transition_rates(const Oscillator& model, const Bath& bath);

/// Tridiagonal birth-death generator dP/dt = L P.
class PopulationGenerator {
 public:
  PopulationGenerator(TransitionRates rates, TruncationPolicy policy);

  int dim() const { return static_cast<int>(diag_.size()); }
  TruncationPolicy policy() const { return policy_; }
  const TransitionRates& rates() const { return rates_; }

  /// L(n, n), L(n, n-1) = t_+(n-1) and L(n, n+1) = t_-(n+1).
  double diagonal(int n) const { return diag_[static_cast<std::size_t>(n)]; }
  double from_below(int n) const;
  double from_above(int n) const;

  void apply(std::span<const double> p, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> p) const;
  Eigen::MatrixXd dense() const;
  /// Sum of each column of L; identically zero under the reflecting policy.
  std::vector<double> column_sums() const;

 private:
  TransitionRates rates_;
  TruncationPolicy policy_;
  std::vector<double> diag_;
};

PopulationGenerator build_population_generator(const Oscillator& model, const Bath& bath,
                                               TruncationPolicy policy);

/// Banded action of the full number-representation master equation.
///
/// Each output element d rho_mn / dt couples to at most nine input elements:
/// (m,n), (m+1,n+1), (m-1,n-1), (m+1,n-1), (m-1,n+1), (m+2,n), (m,n+2),
/// (m-2,n), (m,n-2). Elements outside 0..n_max are treated as zero.
class FullGenerator {
 public:
  FullGenerator(const Oscillator& model, const Bath& bath);

  int dim() const { return dim_; }
  /// Rows are processed in parallel when threads != 1 (0 = OpenMP default).
  void set_threads(int threads) { threads_ = threads; }

  void apply(const Matrix& rho, Matrix& out) const;
  Matrix apply(const Matrix& rho) const;

 private:
  int dim_;
  int threads_ = 1;
  std::vector<double> level_;  // (omega/2)(phi(k) + phi(k+1))
  std::vector<double> sqrt_phi_;  // sqrt(phi(k)), k = 0..n_max+1
  std::vector<double> phi_;       // phi(k), k = 0..n_max+1
  std::vector<double> dplus_;     // D_+(Omega(k)), k = 0..n_max
  std::vector<Complex> g_;        // D_-(Omega(k)) + i D_pq(Omega(k))
  double lambda_;
  std::vector<double> loss_;      // outflow rate of level k, k = 0..n_max
  bool has_cross_terms_;
};

Matrix apply_full_generator(const Oscillator& model, const Bath& bath, const Matrix& rho);

/// -i[H, rho] + ([[D_+ A, rho], A^dag] - [[A^dag G, rho], A^dag]
///   - (lambda/2)[A^dag, {A, rho}] + h.c.) with D_+ = D_+(Omega(N)) and
/// G = D_-(Omega(N)) + i D_pq(Omega(N)) as diagonal matrices.
Matrix operator_form_rhs(const Oscillator& model, const Bath& bath, const Matrix& rho);

}  // namespace dqo
