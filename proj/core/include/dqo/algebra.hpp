#pragma once

// Deformed oscillator algebra on a truncated Fock basis |0>..|n_max>.
//
// Every deformation is accessed through phi(n) = n f^2(n), which stays
// finite at n = 0 where f itself is 0/0 for the q-oscillator. Natural
// units hbar = k_B = m = 1 throughout.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dqo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// q-number [n] = sinh(n tau) / sinh(tau) with tau = ln q; equals n at tau = 0.
double bracket(double tau, int n);

class Deformation {
 public:
  enum class Kind { identity, q, custom };

  static Deformation identity();
  /// q-deformation parameterised by tau = ln q.
  static Deformation q_tau(double tau);
  /// q-deformation from a real q > 0.
  static Deformation q_value(double q);
  /// Tabulated phi(0..k). phi(0) must be 0 and phi(n) > 0 for n >= 1.
  static Deformation custom(std::vector<double> phi_table);

  Kind kind() const { return kind_; }
  double tau() const { return tau_; }
  std::span<const double> phi_table() const { return table_; }

  /// Largest n for which phi(n) is defined, or -1 when unbounded.
  int max_index() const;

  double phi(int n) const;
  /// Omega(n) = (phi(n+2) - phi(n)) / 2, the level-dependent frequency shift.
  double omega_shift(int n) const;

 private:
  Deformation(Kind kind, double tau, std::vector<double> table);

  Kind kind_ = Kind::identity;
  double tau_ = 0.0;
  std::vector<double> table_;
};

const char* to_string(Deformation::Kind kind);

inline double phi(const Deformation& def, int n) { return def.phi(n); }
inline double omega_shift(const Deformation& def, int n) { return def.omega_shift(n); }

/// Deformed oscillator with frequency omega on the basis |0>..|n_max>.
///
/// Construction checks that the deformation reaches phi(n_max + 2), since the
/// shift Omega(n_max) and the boundary terms of the master equation need it.
class Oscillator {
 public:
  Oscillator(double omega, Deformation deformation, int n_max);

  double omega() const { return omega_; }
  const Deformation& deformation() const { return deformation_; }
  int n_max() const { return n_max_; }
  int dim() const { return n_max_ + 1; }

  double phi(int n) const { return deformation_.phi(n); }
  double omega_shift(int n) const { return deformation_.omega_shift(n); }

  /// E_n = (omega / 2)(phi(n+1) + phi(n)), 0 <= n <= n_max.
  double energy_level(int n) const;
  std::vector<double> spectrum() const;

  /// Same frequency and deformation on a different truncation.
  Oscillator with_n_max(int n_max) const { return Oscillator(omega_, deformation_, n_max); }

 private:
  double omega_;
  Deformation deformation_;
  int n_max_;
};

struct LadderOperators {
  Matrix annihilation;  // A = a f(N)
  Matrix creation;      // A^dagger = f(N) a^dagger
  Matrix number;        // N
};

LadderOperators ladder_matrices(const Oscillator& model);
Matrix hamiltonian_matrix(const Oscillator& model);

}  // namespace dqo
