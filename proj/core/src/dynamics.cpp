#include "dqo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dqo {

const char* to_string(Method method) {
  return method == Method::rk4_fixed ? "rk4-fixed" : "rk45-adaptive";
}

std::vector<double> linspace(double a, double b, int count) {
  if (count < 2) {
    return {b};
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / (count - 1);
  }
  out.back() = b;
  return out;
}

void IntegratorConfig::validate() const {
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("integrator: t_final must be finite and >= 0");
  }
  if (method == Method::rk4_fixed && !(dt > 0.0)) {
    throw std::invalid_argument("integrator: dt must be > 0");
  }
  if (method == Method::rk45_adaptive && (!(rtol > 0.0) || !(atol > 0.0))) {
    throw std::invalid_argument("integrator: rtol and atol must be > 0");
  }
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double s = sample_times[i];
    if (!(s >= 0.0) || s > t_final) {
      throw std::invalid_argument("integrator: sample time " + std::to_string(s) +
                                  " outside [0, t_final]");
    }
    if (i > 0 && !(s > sample_times[i - 1])) {
      throw std::invalid_argument("integrator: sample times must be strictly increasing");
    }
  }
}

std::vector<double> IntegratorConfig::resolved_samples() const {
  return sample_times.empty() ? linspace(0.0, t_final, 101) : sample_times;
}

namespace {

std::vector<double> diagonal_of(const Matrix& rho) {
  std::vector<double> p(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index n = 0; n < rho.rows(); ++n) {
    p[static_cast<std::size_t>(n)] = rho(n, n).real();
  }
  return p;
}

void require_dim(const Oscillator& model, Eigen::Index dim, const char* what) {
  if (dim != model.dim()) {
    throw std::invalid_argument(std::string(what) + ": state dimension " + std::to_string(dim) +
                                " does not match model dimension " + std::to_string(model.dim()));
  }
}

}  // namespace

Trajectory evolve_density(const Oscillator& model, const Bath& bath, const DensityMatrix& rho0,
                          const IntegratorConfig& cfg) {
  cfg.validate();
  require_dim(model, rho0.dim(), "evolve_density");
  FullGenerator gen(model, bath);
  gen.set_threads(cfg.threads);

  Trajectory traj;
  const auto samples = cfg.resolved_samples();
  Observer<Matrix> observe = [&](double t, const Matrix& rho) {
    const auto p = diagonal_of(rho);
    const double tr = rho.trace().real();
    traj.times.push_back(t);
    traj.mean_n.push_back(mean_n(p));
    traj.energy.push_back(energy(model, p));
    traj.trace.push_back(tr);
    traj.trace_leak.push_back(1.0 - tr);
    traj.min_eig.push_back(min_eigenvalue(rho));
    if (cfg.keep_snapshots) {
      traj.density_snapshots.push_back(rho);
    }
  };
  Rhs<Matrix> rhs = [&](double, const Matrix& y, Matrix& dydt) { gen.apply(y, dydt); };

  if (cfg.method == Method::rk4_fixed) {
    traj.stats = rk4_integrate<Matrix>(rhs, rho0.matrix(), 0.0, samples, cfg.dt, observe);
  } else {
    AdaptiveOptions opt;
    opt.rtol = cfg.rtol;
    opt.atol = cfg.atol;
    traj.stats = dopri5_integrate<Matrix>(rhs, rho0.matrix(), 0.0, samples, opt, observe);
  }
  return traj;
}

Trajectory evolve_populations(const Oscillator& model, const Bath& bath, const PopulationDist& p0,
                              const IntegratorConfig& cfg, TruncationPolicy policy) {
  cfg.validate();
  require_dim(model, p0.dim(), "evolve_populations");
  const auto gen = build_population_generator(model, bath, policy);

  using Vec = Eigen::VectorXd;
  Trajectory traj;
  const auto samples = cfg.resolved_samples();
  Observer<Vec> observe = [&](double t, const Vec& y) {
    const std::span<const double> p(y.data(), static_cast<std::size_t>(y.size()));
    const double tr = y.sum();
    traj.times.push_back(t);
    traj.mean_n.push_back(mean_n(p));
    traj.energy.push_back(energy(model, p));
    traj.trace.push_back(tr);
    traj.trace_leak.push_back(1.0 - tr);
    traj.min_eig.push_back(y.minCoeff());
    if (cfg.keep_snapshots) {
      traj.population_snapshots.emplace_back(p.begin(), p.end());
    }
  };
  Rhs<Vec> rhs = [&](double, const Vec& y, Vec& dydt) {
    dydt.resize(y.size());
    gen.apply(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
              std::span<double>(dydt.data(), static_cast<std::size_t>(dydt.size())));
  };

  const Vec y0 = Eigen::Map<const Vec>(p0.values().data(), p0.dim());
  if (cfg.method == Method::rk4_fixed) {
    traj.stats = rk4_integrate<Vec>(rhs, y0, 0.0, samples, cfg.dt, observe);
  } else {
    AdaptiveOptions opt;
    opt.rtol = cfg.rtol;
    opt.atol = cfg.atol;
    traj.stats = dopri5_integrate<Vec>(rhs, y0, 0.0, samples, opt, observe);
  }
  return traj;
}

double mean_n(std::span<const double> populations) {
  double s = 0.0;
  for (std::size_t n = 0; n < populations.size(); ++n) {
    s += static_cast<double>(n) * populations[n];
  }
  return s;
}

double mean_n(const Matrix& rho) { return mean_n(diagonal_of(rho)); }

double energy(const Oscillator& model, std::span<const double> populations) {
  require_dim(model, static_cast<Eigen::Index>(populations.size()), "energy");
  double s = 0.0;
  for (int n = 0; n <= model.n_max(); ++n) {
    s += model.energy_level(n) * populations[static_cast<std::size_t>(n)];
  }
  return s;
}

double energy(const Oscillator& model, const Matrix& rho) { return energy(model, diagonal_of(rho)); }

double mean_n_rhs(const Oscillator& model, const Bath& bath, std::span<const double> populations) {
  if (!bath.is_thermal()) {
    throw std::invalid_argument("mean_n_rhs: requires a thermal bath");
  }
  require_dim(model, static_cast<Eigen::Index>(populations.size()), "mean_n_rhs");
  const double temp = *bath.temperature();
  const double w = model.omega();
  auto coth_at = [&](double x) { return temp == 0.0 ? 1.0 : stable_coth(w * x / (2.0 * temp)); };

  double gain = 0.0;
  double loss = 0.0;
  for (int n = 0; n <= model.n_max(); ++n) {
    const double p = populations[static_cast<std::size_t>(n)];
    gain += (coth_at(model.omega_shift(n)) - 1.0) * model.phi(n + 1) * p;
    if (n > 0) {
      loss += (coth_at(model.omega_shift(n - 1)) + 1.0) * model.phi(n) * p;
    }
  }
  return bath.lambda() * (gain - loss);
}

double mean_n_rhs(const Oscillator& model, const Bath& bath, const Matrix& rho) {
  return mean_n_rhs(model, bath, diagonal_of(rho));
}

SmallDeformationDecay mean_n_closed_form(double n0, double lambda, double tau, double t) {
  const double s = tau * tau / 6.0;
  const double rate = 2.0 * lambda * (1.0 - s);
  const double decay = std::exp(-rate * t);
  const double growth = -std::expm1(-2.0 * rate * t);  // 1 - e^{-4 lambda (1 - s) t}
  SmallDeformationDecay out{};
  out.exact = n0 * std::sqrt(1.0 - s) * decay / std::sqrt(1.0 - s + s * n0 * n0 * growth);
  out.first_order = n0 * decay * (1.0 - tau * tau / 12.0 * n0 * n0 * growth);
  return out;
}

Complex expect_a(const Matrix& rho) {
  Complex s = 0.0;
  for (Eigen::Index k = 0; k + 1 < rho.rows(); ++k) {
    s += std::sqrt(static_cast<double>(k + 1)) * rho(k + 1, k);
  }
  return s;
}

Complex expect_omega_a(const Oscillator& model, const Matrix& rho) {
  require_dim(model, rho.rows(), "expect_omega_a");
  Complex s = 0.0;
  for (int k = 0; k < model.n_max(); ++k) {
    s += std::sqrt(static_cast<double>(k + 1)) * model.omega_shift(k) * rho(k + 1, k);
  }
  return s;
}

CoherenceRates coherence_rhs(const Oscillator& model, const Bath& bath, const Matrix& rho) {
  if (!bath.is_thermal() || *bath.temperature() != 0.0) {
    throw std::invalid_argument("coherence_rhs: requires a thermal bath at zero temperature");
  }
  require_dim(model, rho.rows(), "coherence_rhs");
  const double w = model.omega();
  const double lambda = bath.lambda();
  const Complex i(0.0, 1.0);

  // n f(n) f(n+1) = sqrt(n phi(n) phi(n+1) / (n+1)), zero at n = 0.
  auto cross = [&](int k) {
    return std::sqrt(static_cast<double>(k) * model.phi(k) * model.phi(k + 1) /
                     static_cast<double>(k + 1));
  };

  CoherenceRates out{0.0, 0.0};
  for (int k = 0; k < model.n_max(); ++k) {
    const Complex amp = std::sqrt(static_cast<double>(k + 1)) * rho(k + 1, k);
    const double om = model.omega_shift(k);
    const double level_sum = model.phi(k + 1) + model.phi(k);
    const double c = cross(k);

    out.d_a += -i * w * om * amp - lambda * (level_sum - 2.0 * c) * amp;

    const double shifted = k == 0 ? 0.0 : 2.0 * model.omega_shift(k - 1) * c;
    out.d_omega_a += -i * w * om * om * amp - lambda * (om * level_sum - shifted) * amp;
  }
  return out;
}

}  // namespace dqo
