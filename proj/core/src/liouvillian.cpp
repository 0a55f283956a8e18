#include "dqo/liouvillian.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

#include <omp.h>

namespace dqo {

const char* to_string(TruncationPolicy policy) {
  return policy == TruncationPolicy::drop ? "drop" : "reflecting";
}

double hermiticity_defect(const Matrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& rho) {
  const Matrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix DensityMatrix::from_matrix(Matrix rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw std::invalid_argument("density matrix must be square and nonempty");
  }
  if (!rho.allFinite()) {
    throw std::invalid_argument("density matrix has non-finite entries");
  }
  if (const double h = hermiticity_defect(rho); h > tol) {
    throw std::invalid_argument("density matrix is not Hermitian (defect " + std::to_string(h) + ")");
  }
  if (const Complex tr = rho.trace(); std::abs(tr - 1.0) > tol) {
    throw std::invalid_argument("density matrix trace is " + std::to_string(tr.real()) +
                                ", expected 1");
  }
  return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::fock(int dim, int n) {
  if (n < 0 || n >= dim) {
    throw std::out_of_range("fock state |" + std::to_string(n) + "> outside basis of dimension " +
                            std::to_string(dim));
  }
  Matrix rho = Matrix::Zero(dim, dim);
  rho(n, n) = 1.0;
  return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> populations) {
  const auto p = PopulationDist::from_values({populations.begin(), populations.end()});
  const int d = p.dim();
  Matrix rho = Matrix::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    rho(n, n) = p[n];
  }
  return DensityMatrix(std::move(rho));
}

PopulationDist PopulationDist::from_values(std::vector<double> p, double tol) {
  if (p.empty()) {
    throw std::invalid_argument("population distribution is empty");
  }
  double sum = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (!(p[n] >= 0.0) || !std::isfinite(p[n])) {
      throw std::invalid_argument("population P(" + std::to_string(n) + ") must be finite and >= 0");
    }
    sum += p[n];
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument("populations sum to " + std::to_string(sum) + ", expected 1");
  }
  return PopulationDist(std::move(p));
}

PopulationDist PopulationDist::delta(int dim, int n) {
  if (n < 0 || n >= dim) {
    throw std::out_of_range("delta(" + std::to_string(n) + ") outside basis of dimension " +
                            std::to_string(dim));
  }
  std::vector<double> p(static_cast<std::size_t>(dim), 0.0);
  p[static_cast<std::size_t>(n)] = 1.0;
  return PopulationDist(std::move(p));
}

PopulationDist PopulationDist::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("population weights must be finite and >= 0");
    }
    sum += w;
  }
  if (!(sum > 0.0)) {
    throw std::invalid_argument("population weights sum to zero");
  }
  for (double& w : weights) {
    w /= sum;
  }
  return PopulationDist(std::move(weights));
}

std::pair<double, double> transition_rates(const Oscillator& model, const Bath& bath, int n) {
  if (n < 0 || n > model.n_max()) {
    throw std::out_of_range("transition_rates: n outside 0..n_max");
  }
  const double lambda = bath.lambda();
  const double up = model.phi(n + 1) * (2.0 * bath.d_plus(model.omega_shift(n)) - lambda);
  const double down =
      n == 0 ? 0.0 : model.phi(n) * (2.0 * bath.d_plus(model.omega_shift(n - 1)) + lambda);
  return {up, down};
}

TransitionRates transition_rates(const Oscillator& model, const Bath& bath) {
  TransitionRates r;
  r.up.resize(static_cast<std::size_t>(model.dim()));
  r.down.resize(static_cast<std::size_t>(model.dim()));
  for (int n = 0; n <= model.n_max(); ++n) {
    std::tie(r.up[static_cast<std::size_t>(n)], r.down[static_cast<std::size_t>(n)]) =
        transition_rates(model, bath, n);
  }
  return r;
}

PopulationGenerator::PopulationGenerator(TransitionRates rates, TruncationPolicy policy)
    : rates_(std::move(rates)), policy_(policy) {
  const std::size_t d = rates_.up.size();
  if (d == 0 || rates_.down.size() != d) {
    throw std::invalid_argument("transition rate vectors must be nonempty and of equal length");
  }
  if (policy_ == TruncationPolicy::reflecting) {
    rates_.up.back() = 0.0;
  }
  diag_.resize(d);
  for (std::size_t n = 0; n < d; ++n) {
    diag_[n] = -(rates_.up[n] + rates_.down[n]);
  }
}

double PopulationGenerator::from_below(int n) const {
  return n == 0 ? 0.0 : rates_.up[static_cast<std::size_t>(n - 1)];
}

double PopulationGenerator::from_above(int n) const {
  return n + 1 >= dim() ? 0.0 : rates_.down[static_cast<std::size_t>(n + 1)];
}

void PopulationGenerator::apply(std::span<const double> p, std::span<double> out) const {
  const int d = dim();
  if (static_cast<int>(p.size()) != d || static_cast<int>(out.size()) != d) {
    throw std::invalid_argument("population generator: dimension mismatch");
  }
  for (int n = 0; n < d; ++n) {
    const auto k = static_cast<std::size_t>(n);
    double v = diag_[k] * p[k];
    if (n > 0) {
      v += rates_.up[k - 1] * p[k - 1];
    }
    if (n + 1 < d) {
      v += rates_.down[k + 1] * p[k + 1];
    }
    out[k] = v;
  }
}

std::vector<double> PopulationGenerator::apply(std::span<const double> p) const {
  std::vector<double> out(p.size());
  apply(p, out);
  return out;
}

Eigen::MatrixXd PopulationGenerator::dense() const {
  const int d = dim();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    l(n, n) = diagonal(n);
    if (n > 0) {
      l(n, n - 1) = from_below(n);
    }
    if (n + 1 < d) {
      l(n, n + 1) = from_above(n);
    }
  }
  return l;
}

std::vector<double> PopulationGenerator::column_sums() const {
  // Column n holds -(t_+(n) + t_-(n)), t_+(n) below and t_-(n) above the diagonal.
  const int d = dim();
  std::vector<double> sums(static_cast<std::size_t>(d));
  for (int n = 0; n < d; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const double kept_up = n + 1 < d ? rates_.up[k] : 0.0;
    const double kept_down = n > 0 ? rates_.down[k] : 0.0;
    // Same association as diag_ so a closed column cancels exactly.
    sums[k] = diag_[k] + (kept_up + kept_down);
  }
  return sums;
}

PopulationGenerator build_population_generator(const Oscillator& model, const Bath& bath,
                                               TruncationPolicy policy) {
  return PopulationGenerator(transition_rates(model, bath), policy);
}

FullGenerator::FullGenerator(const Oscillator& model, const Bath& bath)
    : dim_(model.dim()), lambda_(bath.lambda()) {
  const int nmax = model.n_max();
  const auto d = static_cast<std::size_t>(dim_);
  level_.resize(d);
  dplus_.resize(d);
  g_.resize(d);
  phi_.resize(d + 1);
  sqrt_phi_.resize(d + 1);
  for (int k = 0; k <= nmax + 1; ++k) {
    phi_[static_cast<std::size_t>(k)] = model.phi(k);
    sqrt_phi_[static_cast<std::size_t>(k)] = std::sqrt(model.phi(k));
  }
  has_cross_terms_ = false;
  for (int k = 0; k <= nmax; ++k) {
    const auto i = static_cast<std::size_t>(k);
    level_[i] = model.energy_level(k);
    const double x = model.omega_shift(k);
    dplus_[i] = bath.d_plus(x);
    g_[i] = Complex(bath.d_minus(x), bath.d_pq(x));
    has_cross_terms_ = has_cross_terms_ || g_[i] != Complex(0.0, 0.0);
  }
  loss_.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    loss_[k] = phi_[k + 1] * (dplus_[k] - 0.5 * lambda_);
    if (k > 0) {
      loss_[k] += phi_[k] * (dplus_[k - 1] + 0.5 * lambda_);
    }
  }
}

namespace {

Complex mul(Complex a, Complex b) {
  // Plain product; std::complex operator* calls the NaN-recovering routine.
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

struct Coefficients {
  int nmax;
  double lambda;
  const double* __restrict level;
  const double* __restrict loss;
  const double* __restrict sp;
  const double* __restrict dp;
  const Complex* __restrict g;
  bool cross;
};

// Column n of L(rho); rho and out are column-major with leading dimension nmax + 1.
void generator_column(const Coefficients& c, int n, const Complex* __restrict rho, Complex* __restrict out) {
  const int nmax = c.nmax;
  const std::ptrdiff_t ld = nmax + 1;
  const Complex* col = rho + n * ld;
  const Complex* right = n < nmax ? rho + (n + 1) * ld : nullptr;
  const Complex* left = n > 0 ? rho + (n - 1) * ld : nullptr;
  const auto* sp = c.sp;
  const auto* dp = c.dp;
  const auto* g = c.g;
  for (int m = 0; m <= nmax; ++m) {
    Complex v = mul(Complex(-(c.loss[m] + c.loss[n]), -(c.level[m] - c.level[n])), col[m]);
    if (m < nmax && n < nmax) {
      v += (sp[m + 1] * sp[n + 1] * (dp[m] + dp[n] + c.lambda)) * right[m + 1];
    }
    if (m > 0 && n > 0) {
      v += (sp[m] * sp[n] * (dp[m - 1] + dp[n - 1] - c.lambda)) * left[m - 1];
    }
    if (c.cross) {
      if (m < nmax && n > 0) {
        v -= sp[m + 1] * sp[n] * mul(std::conj(g[m] + g[n - 1]), left[m + 1]);
      }
      if (m > 0 && n < nmax) {
        v -= sp[m] * sp[n + 1] * mul(g[m - 1] + g[n], right[m - 1]);
      }
      if (m + 2 <= nmax) {
        v += sp[m + 1] * sp[m + 2] * mul(std::conj(g[m + 1]), col[m + 2]);
      }
      if (n + 2 <= nmax) {
        v += sp[n + 1] * sp[n + 2] * mul(g[n + 1], rho[(n + 2) * ld + m]);
      }
      if (m >= 2) {
        v += sp[m - 1] * sp[m] * mul(g[m - 2], col[m - 2]);
      }
      if (n >= 2) {
        v += sp[n - 1] * sp[n] * mul(std::conj(g[n - 2]), rho[(n - 2) * ld + m]);
      }
    }
    out[n * ld + m] = v;
  }
}

}  // namespace

void FullGenerator::apply(const Matrix& rho, Matrix& out) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw std::invalid_argument("full generator: density matrix is " + std::to_string(rho.rows()) +
                                "x" + std::to_string(rho.cols()) + ", model dimension is " +
                                std::to_string(dim_));
  }
  out.resize(dim_, dim_);
  const Coefficients c{dim_ - 1,       lambda_,          level_.data(), loss_.data(), sqrt_phi_.data(),
                       dplus_.data(), g_.data(), has_cross_terms_};
  const Complex* in = rho.data();
  Complex* dst = out.data();
  const int nthreads = threads_ > 0 ? threads_ : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads) if (nthreads > 1 && dim_ >= 64)
  for (int n = 0; n < dim_; ++n) {
    generator_column(c, n, in, dst);
  }
}

Matrix FullGenerator::apply(const Matrix& rho) const {
  Matrix out;
  apply(rho, out);
  return out;
}

Matrix apply_full_generator(const Oscillator& model, const Bath& bath, const Matrix& rho) {
  return FullGenerator(model, bath).apply(rho);
}

namespace {

// One term coef * L rho R of the dissipator; its Hermitian-conjugate partner
// is conj(coef) * R^dag rho L^dag.
struct SandwichTerm {
  Complex coef;
  Matrix left;
  Matrix right;
};

// [[X, rho], Y] = X rho Y - rho X Y - Y X rho + Y rho X
void push_double_commutator(std::vector<SandwichTerm>& terms, Complex coef, const Matrix& x,
                            const Matrix& y, const Matrix& id) {
  terms.push_back({coef, x, y});
  terms.push_back({-coef, id, x * y});
  terms.push_back({-coef, y * x, id});
  terms.push_back({coef, y, x});
}

}  // namespace

Matrix operator_form_rhs(const Oscillator& model, const Bath& bath, const Matrix& rho) {
  const int d = model.dim();
  if (rho.rows() != d || rho.cols() != d) {
    throw std::invalid_argument("operator form: density matrix dimension does not match model");
  }
  const auto ops = ladder_matrices(model);
  const Matrix& a = ops.annihilation;
  const Matrix& ad = ops.creation;
  const Matrix id = Matrix::Identity(d, d);
  const Matrix h = hamiltonian_matrix(model);

  Matrix dplus = Matrix::Zero(d, d);
  Matrix g = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double x = model.omega_shift(k);
    dplus(k, k) = bath.d_plus(x);
    g(k, k) = Complex(bath.d_minus(x), bath.d_pq(x));
  }
  const double lambda = bath.lambda();

  std::vector<SandwichTerm> terms;
  push_double_commutator(terms, 1.0, dplus * a, ad, id);
  push_double_commutator(terms, -1.0, ad * g, ad, id);
  // -(lambda/2)[A^dag, {A, rho}]
  const double hl = 0.5 * lambda;
  terms.push_back({-hl, ad * a, id});
  terms.push_back({-hl, ad, a});
  terms.push_back({hl, a, ad});
  terms.push_back({hl, id, a * ad});

  Matrix out = Complex(0.0, -1.0) * (h * rho - rho * h);
  for (const auto& t : terms) {
    out += t.coef * (t.left * rho * t.right);
    out += std::conj(t.coef) * (t.right.adjoint() * rho * t.left.adjoint());
  }
  return out;
}

}  // namespace dqo
