#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dqo/liouvillian.hpp"
#include "support.hpp"

using namespace dqo;
using dqo_test::max_abs;

namespace {

struct Case {
  double tau;
  double temperature;
};

const Case kThermalCases[] = {{0.0, 0.0}, {0.0, 1.0}, {0.1, 0.0}, {0.1, 1.0}, {-0.25, 0.4}};

}  // namespace

TEST(FullGenerator, MatchesIndependentOperatorForm) {
  std::mt19937_64 rng(101);
  for (const auto& c : kThermalCases) {
    const int nmax = 12;
    const Oscillator osc(1.3, Deformation::q_tau(c.tau), nmax);
    const Bath bath = Bath::thermal(0.6, c.temperature, 1.3);
    const FullGenerator gen(osc, bath);
    for (int s = 0; s < 20; ++s) {
      const Matrix rho = dqo_test::random_state(osc.dim(), 0, nmax - 2, rng);
      const Matrix ref = dqo_test::reference_rhs({1.3, c.tau, nmax}, {0.6, c.temperature}, rho);
      const Matrix got = gen.apply(rho);
      EXPECT_LT(max_abs(got - ref), 1e-12 * std::max(1.0, max_abs(ref)))
          << "tau=" << c.tau << " T=" << c.temperature;
    }
  }
}

TEST(FullGenerator, MatchesLibraryOperatorFormForGeneralBaths) {
  std::mt19937_64 rng(202);
  const Oscillator osc(0.9, Deformation::q_tau(0.15), 10);
  const Bath baths[] = {
      Bath::constant(0.4, 0.9, 0.7, 1.1, 0.2),
      Bath::table(0.3, 0.9, PiecewiseLinear({{0.5, 0.4}, {3.0, 0.9}}), PiecewiseLinear({{0.5, 0.8}, {3.0, 0.5}}),
                  PiecewiseLinear({{0.5, -0.1}, {3.0, 0.3}})),
      Bath::custom(
          0.5, 0.9, [](double x) { return 0.6 + 0.1 * x; }, [](double x) { return 0.9 / x; },
          [](double x) { return 0.05 * x; }, "affine"),
  };
  for (const auto& bath : baths) {
    for (int s = 0; s < 20; ++s) {
      // Generic Hermitian inputs: the map is linear, positivity is irrelevant.
      const Matrix x = dqo_test::random_hermitian(osc.dim(), 0, osc.n_max() - 2, rng);
      const Matrix a = apply_full_generator(osc, bath, x);
      const Matrix b = operator_form_rhs(osc, bath, x);
      EXPECT_LT(max_abs(a - b), 1e-12 * std::max(1.0, max_abs(b))) << bath.label();
    }
  }
}

TEST(FullGenerator, HermitianAndTracelessOnInteriorStates) {
  std::mt19937_64 rng(303);
  const Oscillator osc(1.0, Deformation::q_tau(0.2), 16);
  const Bath bath = Bath::constant(0.5, 1.0, 1.2, 0.9, 0.3);
  const FullGenerator gen(osc, bath);
  for (int s = 0; s < 50; ++s) {
    const Matrix rho = dqo_test::random_state(osc.dim(), 0, osc.n_max() - 2, rng);
    const Matrix l = gen.apply(rho);
    EXPECT_LT(hermiticity_defect(l), 1e-12);
    EXPECT_LT(std::abs(l.trace()), 1e-12);
  }
}

TEST(FullGenerator, DropPolicyLeaksOnlyAtTheEdge) {
  const Oscillator osc(1.0, Deformation::identity(), 6);
  const Bath bath = Bath::thermal(0.5, 2.0, 1.0);
  const Matrix top = DensityMatrix::fock(osc.dim(), 6).matrix();
  // Upward flux out of |n_max> is dropped, so the trace decreases.
  EXPECT_LT(apply_full_generator(osc, bath, top).trace().real(), 0.0);
}

TEST(FullGenerator, ThreadedApplyIsBitIdentical) {
  std::mt19937_64 rng(404);
  const Oscillator osc(1.0, Deformation::q_tau(0.1), 90);
  const Bath bath = Bath::constant(0.5, 1.0, 1.2, 0.9, 0.3);
  FullGenerator serial(osc, bath);
  FullGenerator threaded(osc, bath);
  threaded.set_threads(4);
  const Matrix rho = dqo_test::random_state(osc.dim(), 0, osc.n_max(), rng);
  EXPECT_TRUE((serial.apply(rho).array() == threaded.apply(rho).array()).all());
}

TEST(PopulationDecoupling, DiagonalMapsToDiagonal) {
  std::mt19937_64 rng(505);
  for (const auto& c : kThermalCases) {
    const Oscillator osc(1.0, Deformation::q_tau(c.tau), 14);
    const Bath bath = Bath::thermal(0.8, c.temperature, 1.0);
    const auto pg = build_population_generator(osc, bath, TruncationPolicy::drop);
    for (int s = 0; s < 10; ++s) {
      const auto p = PopulationDist::normalized(dqo_test::random_weights(osc.dim(), rng));
      const Matrix l = apply_full_generator(osc, bath, DensityMatrix::diagonal(p.values()).matrix());
      const auto lp = pg.apply(p.values());
      for (int m = 0; m < osc.dim(); ++m) {
        for (int n = 0; n < osc.dim(); ++n) {
          if (m != n) {
            EXPECT_EQ(l(m, n), Complex(0.0, 0.0));
          }
        }
        EXPECT_NEAR(l(m, m).real(), lp[static_cast<std::size_t>(m)], 1e-14 * std::max(1.0, max_abs(l)));
        EXPECT_EQ(l(m, m).imag(), 0.0);
      }
    }
  }
}

TEST(PopulationDecoupling, CrossTermsBreakIt) {
  const Oscillator osc(1.0, Deformation::identity(), 6);
  const Bath bath = Bath::constant(0.5, 1.0, 1.0, 2.0);  // D_- != 0
  const Matrix l = apply_full_generator(osc, bath, DensityMatrix::fock(osc.dim(), 2).matrix());
  EXPECT_GT(std::abs(l(0, 2)) + std::abs(l(2, 4)), 0.0);
}

TEST(TransitionRates, FrozenValuesAndEdges) {
  const Oscillator osc(1.0, Deformation::identity(), 5);
  const Bath bath = Bath::thermal(1.0, 1.0, 1.0);
  const double dp = 1.0819767068693265;
  const auto [up0, down0] = transition_rates(osc, bath, 0);
  EXPECT_NEAR(up0, 2.0 * dp - 1.0, 1e-14);
  EXPECT_EQ(down0, 0.0);
  const auto [up1, down1] = transition_rates(osc, bath, 1);
  EXPECT_NEAR(down1, 2.0 * dp + 1.0, 1e-14);
  EXPECT_NEAR(up1, 2.0 * (2.0 * dp - 1.0), 1e-14);
  EXPECT_THROW(transition_rates(osc, bath, 6), std::out_of_range);
}

TEST(PopulationGenerator, ReflectingColumnsSumToZeroExactly) {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int s = 0; s < 50; ++s) {
    const Oscillator osc(u(rng), Deformation::q_tau(u(rng) / 6.0), 5 + s);
    const Bath bath = Bath::thermal(u(rng), u(rng), osc.omega());
    const auto pg = build_population_generator(osc, bath, TruncationPolicy::reflecting);
    for (double v : pg.column_sums()) {
      EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(PopulationGenerator, DenseMatchesApply) {
  std::mt19937_64 rng(707);
  const Oscillator osc(1.0, Deformation::q_tau(0.3), 9);
  const auto pg = build_population_generator(osc, Bath::thermal(0.5, 0.7, 1.0), TruncationPolicy::drop);
  const auto p = dqo_test::random_weights(osc.dim(), rng);
  const auto lp = pg.apply(p);
  const Eigen::VectorXd ref = pg.dense() * Eigen::Map<const Eigen::VectorXd>(p.data(), osc.dim());
  for (int n = 0; n < osc.dim(); ++n) {
    EXPECT_NEAR(lp[static_cast<std::size_t>(n)], ref(n), 1e-14);
  }
  // Drop policy: the last column leaks exactly the dropped upward rate.
  const auto sums = pg.column_sums();
  EXPECT_NEAR(sums.back(), -transition_rates(osc, Bath::thermal(0.5, 0.7, 1.0), osc.n_max()).first, 1e-12);
}

TEST(DensityMatrix, Validation) {
  Matrix m = Matrix::Identity(3, 3) / 3.0;
  EXPECT_NO_THROW(DensityMatrix::from_matrix(m));
  Matrix bad = m;
  bad(0, 1) = Complex(0.1, 0.0);
  EXPECT_THROW(DensityMatrix::from_matrix(bad), std::invalid_argument);
  EXPECT_THROW(DensityMatrix::from_matrix(2.0 * m), std::invalid_argument);
  EXPECT_THROW(DensityMatrix::from_matrix(Matrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(DensityMatrix::fock(3, 3), std::out_of_range);
  EXPECT_THROW(PopulationDist::from_values({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(PopulationDist::from_values({1.5, -0.5}), std::invalid_argument);
  EXPECT_EQ(PopulationDist::normalized({1.0, 3.0})[1], 0.75);
}

TEST(DensityMatrix, MinEigenvalue) {
  std::mt19937_64 rng(808);
  const Matrix rho = dqo_test::random_state(6, 0, 5, rng);
  EXPECT_GT(min_eigenvalue(rho), 0.0);
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.2;
  d(1, 1) = -0.2;
  EXPECT_NEAR(min_eigenvalue(d), -0.2, 1e-15);
}
