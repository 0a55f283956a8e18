#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dqo/stationary.hpp"
#include "support.hpp"

using namespace dqo;

TEST(SteadyPopulations, UndeformedThermalRatio) {
  const Oscillator osc(1.0, Deformation::identity(), 30);
  const auto p = steady_populations(osc, Bath::thermal(0.5, 1.0, 1.0));
  for (int n = 1; n < 30; ++n) {
    EXPECT_NEAR(p[n] / p[n - 1], std::exp(-1.0), 1e-14);
  }
}

TEST(SteadyPopulations, ZeroTemperatureIsGroundState) {
  const Oscillator osc(1.0, Deformation::q_tau(0.2), 8);
  const auto p = steady_populations(osc, Bath::thermal(0.5, 0.0, 1.0));
  EXPECT_EQ(p[0], 1.0);
  for (int n = 1; n <= 8; ++n) {
    EXPECT_EQ(p[n], 0.0);
  }
}

TEST(SteadyPopulations, DeformedRatioIsBoltzmannGap) {
  const Oscillator osc(1.0, Deformation::q_tau(0.1), 20);
  const auto p = steady_populations(osc, Bath::thermal(1.0, 1.0, 1.0));
  const dqo_test::Model ref{1.0, 0.1, 20};
  for (int n = 1; n <= 20; ++n) {
    EXPECT_NEAR(p[n] / p[n - 1], std::exp(-(ref.level(n) - ref.level(n - 1))), 1e-13);
  }
}

TEST(SteadyPopulations, AnnihilatedByReflectingGenerator) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int s = 0; s < 40; ++s) {
    const Oscillator osc(u(rng), Deformation::q_tau(u(rng) / 5.0), 4 + s);
    const Bath bath = Bath::thermal(u(rng), u(rng), osc.omega());
    const auto p = steady_populations(osc, bath);
    const auto gen = build_population_generator(osc, bath, TruncationPolicy::reflecting);
    const auto lp = gen.apply(p.values());
    for (double v : lp) {
      EXPECT_LT(std::abs(v), 1e-12);
    }
    EXPECT_LE(detailed_balance_residual(osc, bath, p), 1e-14);
  }
}

TEST(SteadyPopulations, NonThermalBathUsesProductForm) {
  const Oscillator osc(1.0, Deformation::q_tau(0.1), 10);
  const Bath bath = Bath::constant(0.4, 1.0, 0.9, 0.6);
  const auto p = steady_populations(osc, bath);
  const double r = (2.0 * bath.d_plus(1.0) - 0.4) / (2.0 * bath.d_plus(1.0) + 0.4);
  for (int n = 1; n <= 10; ++n) {
    EXPECT_NEAR(p[n] / p[n - 1], r, 1e-14);
  }
}

TEST(SteadyPopulations, InvalidBathThrows) {
  const Oscillator osc(1.0, Deformation::identity(), 6);
  EXPECT_THROW(steady_populations(osc, Bath::constant(0.5, 1.0, 0.1, 0.1)), std::domain_error);
}

TEST(DetailedBalance, UniformDistributionViolatesIt) {
  const Oscillator osc(1.0, Deformation::q_tau(0.1), 10);
  const auto p = PopulationDist::normalized(std::vector<double>(11, 1.0));
  EXPECT_GT(detailed_balance_residual(osc, Bath::thermal(0.5, 1.0, 1.0), p), 0.1);
}

TEST(DetailedBalance, FirstLinkUsesDownRateAtOne) {
  // Mass on |0>, |1> balanced across the first link only; the second link
  // then carries the unbalanced flux t_+(1) P(1).
  const Oscillator osc(1.0, Deformation::identity(), 4);
  const Bath bath = Bath::thermal(1.0, 1.0, 1.0);
  const double dp = bath.d_plus(1.0);
  const double p1 = (2.0 * dp - 1.0) / (4.0 * dp);
  const auto p = PopulationDist::from_values({1.0 - p1, p1, 0.0, 0.0, 0.0});
  const double balanced = (2.0 * dp + 1.0) * p1;
  const double leak = 2.0 * (2.0 * dp - 1.0) * p1;
  EXPECT_NEAR(detailed_balance_residual(osc, bath, p), leak / std::max(balanced, leak), 1e-14);
}

TEST(Boltzmann, EqualsSteadyStateForEveryLambda) {
  for (double tau : {0.0, 0.1, 0.3}) {
    const Oscillator osc(1.0, Deformation::q_tau(tau), 25);
    const auto boltz = thermal_boltzmann(osc, 1.0);
    for (double lambda : {0.3, 1.0, 3.0}) {
      const auto p = steady_populations(osc, Bath::thermal(lambda, 1.0, 1.0));
      for (int n = 0; n <= 25; ++n) {
        EXPECT_NEAR(p[n], boltz[n], 1e-12);
      }
    }
  }
}

TEST(Boltzmann, ZeroTemperatureBranch) {
  const Oscillator osc(1.0, Deformation::q_tau(0.1), 5);
  const auto p = thermal_boltzmann(osc, 0.0);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_THROW(thermal_boltzmann(osc, -1.0), std::invalid_argument);
}

TEST(ChooseNMax, TailBelowTolerance) {
  const auto c = choose_n_max(Deformation::q_tau(0.1), Bath::thermal(1.0, 1.0, 1.0));
  EXPECT_TRUE(c.converged);
  EXPECT_LE(c.tail_mass, 1e-12);
  const Oscillator osc(1.0, Deformation::q_tau(0.1), c.n_max);
  const auto p = steady_populations(osc, Bath::thermal(1.0, 1.0, 1.0));
  EXPECT_NEAR(p[c.n_max], c.tail_mass, 1e-20);
  const Oscillator smaller(1.0, Deformation::q_tau(0.1), c.n_max - 1);
  EXPECT_GT(steady_populations(smaller, Bath::thermal(1.0, 1.0, 1.0))[c.n_max - 1], 1e-12);
}

TEST(ChooseNMax, CapReportsNonConvergence) {
  const auto c = choose_n_max(Deformation::identity(), Bath::thermal(1.0, 100.0, 1.0), 1e-12, 50);
  EXPECT_FALSE(c.converged);
  EXPECT_EQ(c.n_max, 50);
}

TEST(Partition, UndeformedClosedForm) {
  const Oscillator osc(1.0, Deformation::identity(), 4);
  const auto z = partition_function_to_tolerance(osc, 1.0, 1e-12);
  const double exact = 0.95951737566747186;
  EXPECT_LE(z.tail_bound, 1e-12);
  EXPECT_LE(std::abs(z.value - exact), z.tail_bound);
}

TEST(Partition, TailBoundIsValid) {
  for (double tau : {0.0, 0.1, 0.4}) {
    const Oscillator osc(1.0, Deformation::q_tau(tau), 4);
    const auto full = partition_function(osc, 2.0, 400);
    for (int n : {3, 5, 10, 20, 40}) {
      const auto z = partition_function(osc, 2.0, n);
      EXPECT_GE(z.tail_bound, full.value - z.value) << "tau=" << tau << " n=" << n;
    }
  }
}

TEST(Partition, DeformationLowersZ) {
  const Oscillator a(1.0, Deformation::identity(), 4);
  const Oscillator b(1.0, Deformation::q_tau(0.1), 4);
  EXPECT_LT(partition_function_to_tolerance(b, 1.0).value, partition_function_to_tolerance(a, 1.0).value);
}

TEST(Partition, LowTemperatureGroundStateDominance) {
  const Oscillator osc(1.0, Deformation::q_tau(0.2), 4);
  const auto z = partition_function(osc, 0.01, 10);
  EXPECT_NEAR(-0.01 * z.log_value, osc.energy_level(0), 1e-12);
}

TEST(Partition, NonDecayingTermsThrow) {
  // phi decreasing makes E_n fall, so exp(-E_n/T) grows.
  const Oscillator osc(1.0, Deformation::custom({0.0, 3.0, 2.0, 1.5, 1.2, 1.0}), 3);
  EXPECT_THROW(partition_function(osc, 1.0, 4), std::domain_error);
}

TEST(CCoefficient, FrozenAndLimits) {
  EXPECT_NEAR(c_coefficient(1.0), -4.0142180295117728, 1e-13);
  EXPECT_EQ(c_coefficient(std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_LT(std::abs(c_coefficient(800.0)), 1e-300);
  EXPECT_THROW(c_coefficient(0.0), std::invalid_argument);
  EXPECT_THROW(c_coefficient(-1.0), std::invalid_argument);
}

TEST(CCoefficient, HighTemperatureGrowth) {
  // c ~ -4 / beta^3 as beta -> 0.
  for (double b : {1e-2, 3e-3, 1e-3}) {
    EXPECT_NEAR(c_coefficient(b) * b * b * b, -4.0, 0.05);
  }
}

TEST(CCoefficient, MatchesExponentialForm) {
  for (double b : {0.3, 1.0, 2.5, 7.0}) {
    const double e = std::exp(b);
    const double ref = e / ((e - 1) * (e - 1)) * ((e + 1) / (e - 1) - b * (e * e + 4 * e + 1) / ((e - 1) * (e - 1)));
    EXPECT_NEAR(c_coefficient(b), ref, 1e-12 * std::abs(ref));
  }
}

TEST(Equilibrium, ZeroTemperatureExact) {
  const Oscillator osc(2.0, Deformation::q_tau(0.3), 4);
  const auto r = equilibrium_energy(osc, 0.0);
  EXPECT_EQ(r.energy_numeric, 1.0);
  EXPECT_EQ(*r.energy_smalltau, 1.0);
  EXPECT_EQ(r.c_coefficient, 0.0);
}

TEST(Equilibrium, UndeformedValue) {
  const auto r = equilibrium_energy(Oscillator(1.0, Deformation::identity(), 4), 1.0);
  EXPECT_NEAR(r.energy_numeric, 1.0819767068693265, 1e-11);
  EXPECT_NEAR(*r.energy_smalltau, 1.0819767068693265, 1e-15);
}

TEST(Equilibrium, SmallTauDeviationScalesAsTau4) {
  auto dev = [](double tau) {
    const auto r = equilibrium_energy(Oscillator(1.0, Deformation::q_tau(tau), 4), 1.0);
    return std::abs(r.energy_numeric - *r.energy_smalltau);
  };
  const double ratio = dev(0.05) / dev(0.025);
  EXPECT_NEAR(std::log2(ratio), 4.0, 0.2);
}

TEST(Equilibrium, RichardsonFitReproducesC) {
  const std::vector<double> taus{0.01, 0.02, 0.04};
  const double fit = fit_tau2_coefficient(1.0, 1.0, taus);
  const double target = 0.5 * c_coefficient(1.0);
  EXPECT_NEAR(fit, target, 0.01 * std::abs(target));
}

TEST(Equilibrium, CustomDeformationHasNoSmallTauValue) {
  std::vector<double> table{0.0};
  for (int n = 1; n < 80; ++n) {
    table.push_back(n + 0.01 * n * n);
  }
  const auto r = equilibrium_energy(Oscillator(1.0, Deformation::custom(table), 4), 1.0);
  EXPECT_FALSE(r.energy_smalltau.has_value());
  EXPECT_GE(r.energy_numeric, 0.5);
}
