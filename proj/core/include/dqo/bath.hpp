#pragma once

// Environment models: deformed diffusion coefficients D_pp, D_qq, D_pq as
// functions of an Omega-value x, plus the constant dissipation rate lambda.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dqo/algebra.hpp"

namespace dqo {

/// coth(y) for y > 0, returning exactly 1 once y > 700.
double stable_coth(double y);

/// Piecewise-linear table of (x, value) samples, constant beyond the ends.
class PiecewiseLinear {
 public:
  explicit PiecewiseLinear(std::vector<std::pair<double, double>> samples);
  double operator()(double x) const;
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }

 private:
  std::vector<std::pair<double, double>> samples_;
};

class Bath {
 public:
  using Coefficient = std::function<double(double)>;
  enum class Kind { thermal, constant, table, custom };

  /// m omega D_qq = D_pp / (m omega) = (lambda/2) coth(omega x / 2T), D_pq = 0.
  static Bath thermal(double lambda, double temperature, double omega);
  static Bath constant(double lambda, double omega, double dpp, double dqq, double dpq = 0.0);
  static Bath table(double lambda, double omega, PiecewiseLinear dpp, PiecewiseLinear dqq,
                    PiecewiseLinear dpq);
  static Bath custom(double lambda, double omega, Coefficient dpp, Coefficient dqq, Coefficient dpq,
                     std::string label);

  Kind kind() const { return kind_; }
  bool is_thermal() const { return kind_ == Kind::thermal; }
  double lambda() const { return lambda_; }
  double omega() const { return omega_; }
  /// Only set for thermal baths.
  std::optional<double> temperature() const { return temperature_; }
  const std::string& label() const { return label_; }

  double dpp(double x) const;
  double dqq(double x) const;
  double d_pq(double x) const;
  /// D_+(x) = (omega D_qq(x) + D_pp(x)/omega) / 2.
  double d_plus(double x) const;
  /// D_-(x) = (omega D_qq(x) - D_pp(x)/omega) / 2.
  double d_minus(double x) const;

  /// True when D_- and D_pq vanish at every Omega(n) the truncated model
  /// touches, so populations evolve independently of coherences.
  bool decouples_populations(const Oscillator& model) const;

 private:
  Bath(Kind kind, double lambda, double omega, std::string label);
  void check_argument(double x) const;

  Kind kind_;
  double lambda_;
  double omega_;
  std::optional<double> temperature_;
  std::string label_;
  Coefficient dpp_;
  Coefficient dqq_;
  Coefficient dpq_;
};

inline Bath thermal_bath(double lambda, double temperature, double omega) {
  return Bath::thermal(lambda, temperature, omega);
}

struct ValidationIssue {
  int n;
  std::string check;
  double value;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  int levels_checked = 0;
  bool ok() const { return issues.empty(); }
};

/// Per-level positivity checks: Omega(n) > 0, D_pp, D_qq >= 0 and
/// 2 D_+(Omega(n)) - lambda >= 0. Reports violations without throwing.
ValidationReport validate_bath(const Bath& bath, const Oscillator& model);

}  // namespace dqo
