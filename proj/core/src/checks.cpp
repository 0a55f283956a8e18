#include "dqo/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "dqo/dynamics.hpp"
#include "dqo/liouvillian.hpp"
#include "dqo/stationary.hpp"

namespace dqo {

Matrix random_interior_state(int dim, int lo, int hi, std::mt19937_64& rng) {
  if (lo < 0 || hi >= dim || lo > hi) {
    throw std::invalid_argument("random_interior_state: empty or out-of-range support");
  }
  const int k = hi - lo + 1;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      g(i, j) = Complex(gauss(rng), gauss(rng));
    }
  }
  Matrix block = g * g.adjoint();
  block = 0.5 * (block + block.adjoint()).eval();
  block /= block.trace().real();
  Matrix rho = Matrix::Zero(dim, dim);
  rho.block(lo, lo, k, k) = block;
  return rho;
}

namespace {

CheckResult check(std::string name, double value, double threshold, std::string note = {}) {
  return {std::move(name), value, threshold, value <= threshold, false, std::move(note)};
}

CheckResult skipped(std::string name, std::string note) {
  return {std::move(name), 0.0, 0.0, true, true, std::move(note)};
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

std::vector<CheckResult> run_invariant_checks(const Oscillator& model, const Bath& bath,
                                              std::uint64_t seed, int samples) {
  std::vector<CheckResult> out;
  const int nmax = model.n_max();
  const double w = model.omega();

  // Algebra.
  double phi_min = model.phi(0);
  for (int n = 0; n <= nmax + 2; ++n) {
    phi_min = std::min(phi_min, model.phi(n));
  }
  out.push_back(check("phi_zero_at_origin", std::abs(model.phi(0)), 0.0));
  out.push_back(check("phi_nonnegative", std::max(0.0, -phi_min), 0.0));

  double gap_err = 0.0;
  for (int n = 1; n <= nmax; ++n) {
    const double lhs = model.energy_level(n) - model.energy_level(n - 1);
    const double rhs = w * model.omega_shift(n - 1);
    gap_err = std::max(gap_err, std::abs(lhs - rhs) / std::max(1.0, std::abs(model.energy_level(n))));
  }
  out.push_back(check("level_spacing_matches_omega_shift", gap_err, 1e-13,
                      "|E_n - E_{n-1} - w Omega(n-1)| / max(1, E_n)"));

  const auto report = validate_bath(bath, model);
  out.push_back(check("bath_positivity", static_cast<double>(report.issues.size()), 0.0,
                      "number of flagged levels"));

  // Generator structure on interior-supported states.
  if (nmax < 4) {
    out.push_back(skipped("generator_structure", "n_max < 4 leaves no interior support"));
  } else {
    std::mt19937_64 rng(seed);
    const FullGenerator gen(model, bath);
    double herm = 0.0;
    double trace = 0.0;
    double agree = 0.0;
    double mean_n_id = 0.0;
    const bool thermal = bath.is_thermal();
    for (int s = 0; s < samples; ++s) {
      const Matrix rho = random_interior_state(model.dim(), 2, nmax - 2, rng);
      const Matrix l = gen.apply(rho);
      const double scale = std::max(1.0, max_abs(l));
      herm = std::max(herm, hermiticity_defect(l) / scale);
      trace = std::max(trace, std::abs(l.trace()) / scale);
      agree = std::max(agree, max_abs(l - operator_form_rhs(model, bath, rho)) / scale);
      if (thermal) {
        double dn = 0.0;
        for (int n = 0; n <= nmax; ++n) {
          dn += n * l(n, n).real();
        }
        mean_n_id = std::max(mean_n_id, std::abs(dn - mean_n_rhs(model, bath, rho)) / scale);
      }
    }
    out.push_back(check("generator_hermiticity", herm, 1e-12, "relative to max |L(rho)|"));
    out.push_back(check("generator_trace_preservation", trace, 1e-12, "relative to max |L(rho)|"));
    out.push_back(check("operator_form_agreement", agree, 1e-12, "relative to max |L(rho)|"));
    if (thermal) {
      out.push_back(check("mean_n_equation_of_motion", mean_n_id, 1e-10,
                          "|tr(N L(rho)) - d<N>/dt formula| / max |L(rho)|"));
    } else {
      out.push_back(skipped("mean_n_equation_of_motion", "requires a thermal bath"));
    }
  }

  // Population decoupling.
  if (bath.decouples_populations(model)) {
    const auto popgen = build_population_generator(model, bath, TruncationPolicy::drop);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> weights(static_cast<std::size_t>(model.dim()));
    for (double& x : weights) {
      x = u(rng);
    }
    const auto p = PopulationDist::normalized(weights);
    const Matrix l = FullGenerator(model, bath).apply(DensityMatrix::diagonal(p.values()).matrix());
    const auto lp = popgen.apply(p.values());
    double off = 0.0;
    double diag = 0.0;
    const double scale = std::max(1.0, max_abs(l));
    for (int m = 0; m <= nmax; ++m) {
      for (int n = 0; n <= nmax; ++n) {
        if (m == n) {
          diag = std::max(diag, std::abs(l(m, n) - lp[static_cast<std::size_t>(m)]) / scale);
        } else {
          off = std::max(off, std::abs(l(m, n)));
        }
      }
    }
    out.push_back(check("diagonal_stays_diagonal", off, 0.0));
    out.push_back(check("population_generator_matches_diagonal", diag, 1e-14,
                        "relative to max |L(rho)|"));
    const auto sums = build_population_generator(model, bath, TruncationPolicy::reflecting).column_sums();
    double worst = 0.0;
    for (double v : sums) {
      worst = std::max(worst, std::abs(v));
    }
    out.push_back(check("reflecting_columns_sum_to_zero", worst, 0.0));
  } else {
    out.push_back(skipped("population_decoupling", "D_- or D_pq nonzero"));
  }

  // Stationary state.
  if (!report.ok()) {
    out.push_back(skipped("steady_state", "bath failed positivity checks"));
  } else {
    const auto p = steady_populations(model, bath);
    out.push_back(check("detailed_balance", detailed_balance_residual(model, bath, p), 1e-14));
    const auto gen = build_population_generator(model, bath, TruncationPolicy::reflecting);
    const auto lp = gen.apply(p.values());
    double rate_scale = 1.0;
    for (int n = 0; n <= nmax; ++n) {
      rate_scale = std::max(rate_scale, std::abs(gen.diagonal(n)));
    }
    double stat = 0.0;
    for (double v : lp) {
      stat = std::max(stat, std::abs(v));
    }
    out.push_back(check("steady_state_stationary", stat / rate_scale, 1e-12,
                        "max |L P_ss| / max |L(n,n)|"));
    if (bath.is_thermal() && *bath.temperature() > 0.0) {
      const auto boltz = thermal_boltzmann(model, *bath.temperature());
      double dev = 0.0;
      for (int n = 0; n <= nmax; ++n) {
        dev = std::max(dev, std::abs(boltz[n] - p[n]));
      }
      out.push_back(check("thermal_state_is_boltzmann", dev, 1e-12));
    }
  }
  return out;
}

}  // namespace dqo
