#pragma once

// Time evolution of density matrices and populations, observables, and the
// closed-form expectation-value laws used to check them.

#include <span>
#include <vector>

#include "dqo/algebra.hpp"
#include "dqo/bath.hpp"
#include "dqo/liouvillian.hpp"
#include "dqo/ode.hpp"

namespace dqo {

enum class Method { rk4_fixed, rk45_adaptive };

const char* to_string(Method method);

struct IntegratorConfig {
  Method method = Method::rk4_fixed;
  double dt = 1e-3;
  double rtol = 1e-8;
  double atol = 1e-10;
  double t_final = 1.0;
  /// Sorted, strictly increasing, inside [0, t_final]. Empty means 101
  /// evenly spaced samples including both ends.
  std::vector<double> sample_times;
  bool keep_snapshots = false;
  /// Worker threads for the density generator (0 = OpenMP default).
  int threads = 1;

  void validate() const;
  std::vector<double> resolved_samples() const;
};

std::vector<double> linspace(double a, double b, int count);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> mean_n;
  std::vector<double> energy;
  std::vector<double> trace;
  std::vector<double> trace_leak;  // 1 - trace
  std::vector<double> min_eig;
  std::vector<Matrix> density_snapshots;
  std::vector<std::vector<double>> population_snapshots;
  StepStats stats;

  std::size_t size() const { return times.size(); }
};

Trajectory evolve_density(const Oscillator& model, const Bath& bath, const DensityMatrix& rho0,
                          const IntegratorConfig& cfg);

Trajectory evolve_populations(const Oscillator& model, const Bath& bath, const PopulationDist& p0,
                              const IntegratorConfig& cfg, TruncationPolicy policy);

double mean_n(std::span<const double> populations);
double mean_n(const Matrix& rho);
double energy(const Oscillator& model, std::span<const double> populations);
double energy(const Oscillator& model, const Matrix& rho);

/// Right side of the thermal-bath law for d<N>/dt:
/// lambda <(coth(w Omega(N)/2T) - 1) phi(N+1)> - lambda <(coth(w Omega(N-1)/2T) + 1) phi(N)>.
/// Throws std::invalid_argument for non-thermal baths.
double mean_n_rhs(const Oscillator& model, const Bath& bath, std::span<const double> populations);
double mean_n_rhs(const Oscillator& model, const Bath& bath, const Matrix& rho);

/// Small-deformation solution of d<N>/dt = -2 lambda (<N> + (tau^2/6)(<N>^3 - <N>))
/// and its first-order expansion in tau^2.
struct SmallDeformationDecay {
  double exact;
  double first_order;
};

SmallDeformationDecay mean_n_closed_form(double n0, double lambda, double tau, double t);

/// <a> and <Omega(N) a> on a density matrix, with a the undeformed annihilator.
Complex expect_a(const Matrix& rho);
Complex expect_omega_a(const Oscillator& model, const Matrix& rho);

struct CoherenceRates {
  Complex d_a;        // d<a>/dt
  Complex d_omega_a;  // d<Omega(N) a>/dt
};

/// Zero-temperature equations of motion for <a> and <Omega(N) a>. Requires a
/// thermal bath at T = 0.
CoherenceRates coherence_rhs(const Oscillator& model, const Bath& bath, const Matrix& rho);

}  // namespace dqo
