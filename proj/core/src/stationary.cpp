#include "dqo/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqo {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double link_ratio(const Bath& bath, double omega_shift) {
  const double two_d = 2.0 * bath.d_plus(omega_shift);
  const double lambda = bath.lambda();
  const double num = two_d - lambda;
  const double den = two_d + lambda;
  if (!(den > 0.0)) {
    throw std::domain_error("steady state undefined: 2 D_+ + lambda vanishes");
  }
  const double r = num / den;
  if (!(r >= 0.0)) {
    throw std::domain_error("steady state undefined: negative population ratio (2 D_+ < lambda)");
  }
  return r;
}

// Largest n for which E_n can be evaluated from the deformation alone.
int energy_reach(const Deformation& def) {
  const int reach = def.max_index();
  return reach < 0 ? std::numeric_limits<int>::max() : reach - 1;
}

double level(double omega, const Deformation& def, int n) {
  return 0.5 * omega * (def.phi(n + 1) + def.phi(n));
}

template <class RatioFn>
TruncationChoice grow_until_tail(const Deformation& def, double tol, int cap, RatioFn ratio) {
  // Oscillator(n_max) needs phi(n_max + 2).
  const int reach = def.max_index();
  const int limit = reach < 0 ? cap : std::min(cap, reach - 2);
  if (limit < 2) {
    throw std::invalid_argument("custom phi table too short for n_max >= 2");
  }
  double w = 1.0;
  double total = 1.0;
  TruncationChoice choice{limit, 1.0, false};
  for (int n = 1; n <= limit; ++n) {
    w *= ratio(n);
    total += w;
    const double tail = w / total;
    if (n >= 2 && tail <= tol) {
      return {n, tail, true};
    }
    choice.tail_mass = tail;
  }
  return choice;
}

}  // namespace

PopulationDist steady_populations(const Oscillator& model, const Bath& bath) {
  std::vector<double> w(static_cast<std::size_t>(model.dim()));
  w[0] = 1.0;
  for (int n = 1; n <= model.n_max(); ++n) {
    w[static_cast<std::size_t>(n)] =
        w[static_cast<std::size_t>(n - 1)] * link_ratio(bath, model.omega_shift(n - 1));
  }
  return PopulationDist::normalized(std::move(w));
}

double detailed_balance_residual(const Oscillator& model, const Bath& bath, const PopulationDist& p) {
  if (p.dim() != model.dim()) {
    throw std::invalid_argument("detailed_balance_residual: dimension mismatch");
  }
  const auto rates = transition_rates(model, bath);
  double worst = 0.0;
  double scale = 0.0;
  for (int n = 1; n <= model.n_max(); ++n) {
    const double down = rates.down[static_cast<std::size_t>(n)] * p[n];
    const double up = rates.up[static_cast<std::size_t>(n - 1)] * p[n - 1];
    worst = std::max(worst, std::abs(down - up));
    scale = std::max({scale, std::abs(down), std::abs(up)});
  }
  return scale > 0.0 ? worst / scale : worst;
}

PopulationDist thermal_boltzmann(const Oscillator& model, double temperature) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("thermal_boltzmann: temperature must be finite and >= 0");
  }
  if (temperature == 0.0) {
    return PopulationDist::delta(model.dim(), 0);
  }
  const double e0 = model.energy_level(0);
  std::vector<double> w(static_cast<std::size_t>(model.dim()));
  for (int n = 0; n <= model.n_max(); ++n) {
    w[static_cast<std::size_t>(n)] = std::exp(-(model.energy_level(n) - e0) / temperature);
  }
  return PopulationDist::normalized(std::move(w));
}

TruncationChoice choose_n_max(const Deformation& deformation, const Bath& bath, double tol,
                              int cap) {
  return grow_until_tail(deformation, tol, cap,
                         [&](int n) { return link_ratio(bath, deformation.omega_shift(n - 1)); });
}

TruncationChoice choose_n_max(double omega, const Deformation& deformation, double temperature,
                              double tol, int cap) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("choose_n_max: temperature must be > 0");
  }
  return grow_until_tail(deformation, tol, cap, [&](int n) {
    return std::exp(-omega * deformation.omega_shift(n - 1) / temperature);
  });
}

PartitionResult partition_function(const Oscillator& model, double temperature, int n_terms) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("partition_function: temperature must be finite and > 0");
  }
  if (n_terms < 2) {
    throw std::invalid_argument("partition_function: need at least two terms for a tail estimate");
  }
  const auto& def = model.deformation();
  if (n_terms - 1 > energy_reach(def)) {
    throw std::out_of_range("partition_function: custom phi table too short for " +
                            std::to_string(n_terms) + " terms");
  }
  const double w = model.omega();
  const double e0 = level(w, def, 0);
  // Terms scaled by exp(E_0/T) so the sum survives T -> 0.
  double scaled = 0.0;
  double prev = 0.0;
  double last = 0.0;
  for (int n = 0; n < n_terms; ++n) {
    const double term = std::exp(-(level(w, def, n) - e0) / temperature);
    scaled += term;
    prev = last;
    last = term;
  }
  double geometric = 0.0;
  if (last > 0.0) {
    const double r = last / prev;
    if (!(r < 1.0)) {
      throw std::domain_error("partition_function: terms do not decay (ratio " + std::to_string(r) +
                              ")");
    }
    geometric = last * r / (1.0 - r);
  }
  PartitionResult out{};
  out.log_value = -e0 / temperature + std::log(scaled);
  out.value = std::exp(out.log_value);
  out.terms_used = n_terms;
  const double scale = std::exp(-e0 / temperature);
  out.tail_bound = scale * (geometric + 2.0 * n_terms * kEps * scaled);
  return out;
}

PartitionResult partition_function_to_tolerance(const Oscillator& model, double temperature,
                                                double tol, int cap) {
  const int reach = energy_reach(model.deformation());
  const int limit = std::min(cap, reach == std::numeric_limits<int>::max() ? cap : reach + 1);
  PartitionResult best{};
  for (int n = 2; n <= limit; ++n) {
    best = partition_function(model, temperature, n);
    if (best.tail_bound <= tol) {
      return best;
    }
  }
  return best;
}

double c_coefficient(double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("c_coefficient: beta must be > 0");
  }
  if (std::isinf(beta)) {
    return 0.0;
  }
  // Written in u = e^{-beta} so large beta cannot overflow.
  const double u = std::exp(-beta);
  const double one_minus_u = -std::expm1(-beta);
  const double pref = u / (one_minus_u * one_minus_u);
  const double first = (1.0 + u) / one_minus_u;
  const double second = beta * (1.0 + 4.0 * u + u * u) / (one_minus_u * one_minus_u);
  return pref * (first - second);
}

EquilibriumReport equilibrium_energy(const Oscillator& model, double temperature) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("equilibrium_energy: temperature must be finite and >= 0");
  }
  const auto& def = model.deformation();
  const double w = model.omega();
  const bool small_tau_form = def.kind() != Deformation::Kind::custom;
  const double tau = def.kind() == Deformation::Kind::q ? def.tau() : 0.0;

  EquilibriumReport rep{};
  if (temperature == 0.0) {
    rep.energy_numeric = model.energy_level(0);
    rep.beta = std::numeric_limits<double>::infinity();
    rep.c_coefficient = 0.0;
    rep.n_max_used = model.n_max();
    rep.tail_mass = 0.0;
    if (small_tau_form) {
      rep.energy_smalltau = 0.5 * w;
    }
    return rep;
  }

  const auto choice = choose_n_max(w, def, temperature);
  const Oscillator grown = model.with_n_max(std::max(model.n_max(), choice.n_max));
  const auto p = thermal_boltzmann(grown, temperature);
  double e = 0.0;
  for (int n = 0; n <= grown.n_max(); ++n) {
    e += grown.energy_level(n) * p[n];
  }
  rep.energy_numeric = e;
  rep.beta = w / temperature;
  rep.c_coefficient = c_coefficient(rep.beta);
  rep.n_max_used = grown.n_max();
  rep.tail_mass = p[grown.n_max()];
  if (small_tau_form) {
    rep.energy_smalltau = 0.5 * w * (stable_coth(0.5 * rep.beta) + tau * tau * rep.c_coefficient);
  }
  return rep;
}

double fit_tau2_coefficient(double omega, double temperature, std::span<const double> taus) {
  if (taus.empty()) {
    throw std::invalid_argument("fit_tau2_coefficient: need at least one tau");
  }
  const double e_ref =
      equilibrium_energy(Oscillator(omega, Deformation::identity(), 2), temperature).energy_numeric;
  std::vector<double> x;
  std::vector<double> y;
  for (double tau : taus) {
    if (tau == 0.0) {
      throw std::invalid_argument("fit_tau2_coefficient: tau must be nonzero");
    }
    const double e =
        equilibrium_energy(Oscillator(omega, Deformation::q_tau(tau), 2), temperature).energy_numeric;
    x.push_back(tau * tau);
    y.push_back((e - e_ref) / (tau * tau));
  }
  // Neville's scheme evaluated at x = 0.
  const std::size_t k = x.size();
  for (std::size_t level = 1; level < k; ++level) {
    for (std::size_t i = 0; i + level < k; ++i) {
      const std::size_t j = i + level;
      y[i] = (x[j] * y[i] - x[i] * y[i + 1]) / (x[j] - x[i]);
    }
  }
  return y[0];
}

}  // namespace dqo
