#include "dqo/algebra.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace dqo {

double bracket(double tau, int n) {
  if (n < 0) {
    throw std::out_of_range("bracket: n must be nonnegative, got " + std::to_string(n));
  }
  if (n == 0) {
    return 0.0;
  }
  const double nd = static_cast<double>(n);
  if (tau == 0.0 || n == 1) {
    return nd;
  }
  // Even in tau; sinh keeps full relative accuracy for tiny arguments.
  const double t = std::abs(tau);
  return std::sinh(nd * t) / std::sinh(t);
}

Deformation::Deformation(Kind kind, double tau, std::vector<double> table)
    : kind_(kind), tau_(tau), table_(std::move(table)) {}

Deformation Deformation::identity() { return Deformation(Kind::identity, 0.0, {}); }

Deformation Deformation::q_tau(double tau) {
  if (!std::isfinite(tau)) {
    throw std::invalid_argument("q-deformation: tau must be finite");
  }
  return Deformation(Kind::q, tau, {});
}

Deformation Deformation::q_value(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw std::invalid_argument("q-deformation: q must be a finite real > 0");
  }
  return q_tau(std::log(q));
}

Deformation Deformation::custom(std::vector<double> phi_table) {
  if (phi_table.size() < 2) {
    throw std::invalid_argument("custom deformation: phi table needs at least phi(0), phi(1)");
  }
  if (phi_table[0] != 0.0) {
    throw std::invalid_argument("custom deformation: phi(0) must be 0");
  }
  for (std::size_t n = 1; n < phi_table.size(); ++n) {
    if (!(phi_table[n] > 0.0) || !std::isfinite(phi_table[n])) {
      throw std::invalid_argument("custom deformation: phi(" + std::to_string(n) +
                                  ") must be finite and > 0");
    }
  }
  return Deformation(Kind::custom, 0.0, std::move(phi_table));
}

int Deformation::max_index() const {
  return kind_ == Kind::custom ? static_cast<int>(table_.size()) - 1 : -1;
}

double Deformation::phi(int n) const {
  if (n < 0) {
    throw std::out_of_range("phi: n must be nonnegative, got " + std::to_string(n));
  }
  switch (kind_) {
    case Kind::identity:
      return static_cast<double>(n);
    case Kind::q:
      return bracket(tau_, n);
    case Kind::custom:
      if (n >= static_cast<int>(table_.size())) {
        throw std::out_of_range("phi: index " + std::to_string(n) + " beyond custom table of size " +
                                std::to_string(table_.size()));
      }
      return table_[static_cast<std::size_t>(n)];
  }
  return 0.0;
}

double Deformation::omega_shift(int n) const {
  if (kind_ == Kind::identity) {
    return 1.0;
  }
  return 0.5 * (phi(n + 2) - phi(n));
}

const char* to_string(Deformation::Kind kind) {
  switch (kind) {
    case Deformation::Kind::identity:
      return "identity";
    case Deformation::Kind::q:
      return "q";
    case Deformation::Kind::custom:
      return "custom";
  }
  return "unknown";
}

Oscillator::Oscillator(double omega, Deformation deformation, int n_max)
    : omega_(omega), deformation_(std::move(deformation)), n_max_(n_max) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("oscillator: omega must be finite and > 0");
  }
  if (n_max < 2) {
    throw std::invalid_argument("oscillator: n_max must be >= 2 (dimension >= 3), got " +
                                std::to_string(n_max));
  }
  const int reach = deformation_.max_index();
  if (reach >= 0 && reach < n_max + 2) {
    throw std::invalid_argument("oscillator: custom phi table must cover indices 0..n_max+2 (" +
                                std::to_string(n_max + 2) + "), has " + std::to_string(reach + 1) +
                                " entries");
  }
}

double Oscillator::energy_level(int n) const {
  if (n < 0 || n > n_max_) {
    throw std::out_of_range("energy_level: n=" + std::to_string(n) + " outside 0.." +
                            std::to_string(n_max_));
  }
  return 0.5 * omega_ * (phi(n + 1) + phi(n));
}

std::vector<double> Oscillator::spectrum() const {
  std::vector<double> e(static_cast<std::size_t>(dim()));
  for (int n = 0; n <= n_max_; ++n) {
    e[static_cast<std::size_t>(n)] = energy_level(n);
  }
  return e;
}

LadderOperators ladder_matrices(const Oscillator& model) {
  const int d = model.dim();
  LadderOperators ops{Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d)};
  for (int n = 1; n < d; ++n) {
    ops.annihilation(n - 1, n) = std::sqrt(model.phi(n));
  }
  for (int n = 0; n < d; ++n) {
    ops.number(n, n) = static_cast<double>(n);
  }
  ops.creation = ops.annihilation.adjoint();
  return ops;
}

Matrix hamiltonian_matrix(const Oscillator& model) {
  const int d = model.dim();
  Matrix h = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    h(n, n) = model.energy_level(n);
  }
  return h;
}

}  // namespace dqo
