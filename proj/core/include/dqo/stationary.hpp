#pragma once

// Closed-form stationary populations, detailed balance, deformed partition
// functions and equilibrium energies.

#include <optional>
#include <span>

#include "dqo/algebra.hpp"
#include "dqo/bath.hpp"
#include "dqo/liouvillian.hpp"

namespace dqo {

/// Product-form stationary state
///   P(n) = P(0) prod_{k=1..n} (2 D_+(Omega(k-1)) - lambda) / (2 D_+(Omega(k-1)) + lambda)
/// normalized over the truncated basis. Throws std::domain_error when a ratio
/// is negative or undefined.
PopulationDist steady_populations(const Oscillator& model, const Bath& bath);

/// max_n |t_-(n) P(n) - t_+(n-1) P(n-1)|, divided by the largest flux involved.
double detailed_balance_residual(const Oscillator& model, const Bath& bath, const PopulationDist& p);

/// P(n) proportional to exp(-E_n / T). T = 0 returns the ground state.
PopulationDist thermal_boltzmann(const Oscillator& model, double temperature);

struct TruncationChoice {
  int n_max;
  double tail_mass;  // P(n_max) of the normalized truncated distribution
  bool converged;
};

/// Smallest n_max >= 2 whose stationary tail mass is <= tol, searched up to
/// `cap` (and the reach of a custom phi table).
TruncationChoice choose_n_max(const Deformation& deformation, const Bath& bath, double tol = 1e-12,
                              int cap = 4096);
/// Same for the Boltzmann distribution at temperature T > 0.
TruncationChoice choose_n_max(double omega, const Deformation& deformation, double temperature,
                              double tol = 1e-12, int cap = 4096);

struct PartitionResult {
  double value;
  double log_value;
  int terms_used;
  /// Geometric bound on the omitted terms plus a summation rounding allowance.
  double tail_bound;
};

/// Partial sum of exp(-E_n/T) over n < n_terms. The energies beyond the
/// model's n_max come from its deformation. Throws std::domain_error when the
/// last two terms do not decay.
PartitionResult partition_function(const Oscillator& model, double temperature, int n_terms);
/// Grows n_terms until tail_bound <= tol.
PartitionResult partition_function_to_tolerance(const Oscillator& model, double temperature,
                                                double tol = 1e-12, int cap = 4096);

/// c(beta) = e^b/(e^b-1)^2 [(e^b+1)/(e^b-1) - b (e^{2b}+4e^b+1)/(e^b-1)^2],
/// the tau^2 coefficient of the small-deformation equilibrium energy.
double c_coefficient(double beta);

struct EquilibriumReport {
  double energy_numeric;
  /// (omega/2)(coth(omega/2T) + tau^2 c), only for identity and q deformations.
  std::optional<double> energy_smalltau;
  double c_coefficient;
  double beta;  // omega / T, +inf at T = 0
  int n_max_used;
  double tail_mass;
};

/// Boltzmann-weighted energy on a truncation grown until the tail mass is
/// below 1e-12, alongside the small-deformation formula.
EquilibriumReport equilibrium_energy(const Oscillator& model, double temperature);

/// Extrapolates (E(tau) - E(0)) / tau^2 to tau -> 0 by polynomial (Neville)
/// extrapolation in tau^2 over the given deformations.
double fit_tau2_coefficient(double omega, double temperature, std::span<const double> taus);

}  // namespace dqo
