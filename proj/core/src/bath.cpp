#include "dqo/bath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dqo {

double stable_coth(double y) {
  if (y > 700.0) {
    return 1.0;
  }
  // coth(y) = 1 + 2 / (e^{2y} - 1), accurate for small and large y alike.
  return 1.0 + 2.0 / std::expm1(2.0 * y);
}

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> samples)
    : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw std::invalid_argument("coefficient table must have at least one (x, value) pair");
  }
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].first > samples_[i - 1].first)) {
      throw std::invalid_argument("coefficient table x values must be strictly increasing");
    }
  }
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= samples_.front().first) {
    return samples_.front().second;
  }
  if (x >= samples_.back().first) {
    return samples_.back().second;
  }
  auto hi = std::upper_bound(samples_.begin(), samples_.end(), x,
                             [](double v, const auto& s) { return v < s.first; });
  auto lo = hi - 1;
  const double w = (x - lo->first) / (hi->first - lo->first);
  return (1.0 - w) * lo->second + w * hi->second;
}

Bath::Bath(Kind kind, double lambda, double omega, std::string label)
    : kind_(kind), lambda_(lambda), omega_(omega), label_(std::move(label)) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("bath: lambda must be finite and >= 0");
  }
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("bath: omega must be finite and > 0");
  }
}

Bath Bath::thermal(double lambda, double temperature, double omega) {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("thermal bath: temperature must be finite and >= 0");
  }
  Bath b(Kind::thermal, lambda, omega, "thermal");
  b.temperature_ = temperature;
  // dpp/dqq are derived from d_plus on demand, see below.
  return b;
}

Bath Bath::constant(double lambda, double omega, double dpp, double dqq, double dpq) {
  if (!std::isfinite(dpp) || !std::isfinite(dqq) || !std::isfinite(dpq)) {
    throw std::invalid_argument("constant bath: coefficients must be finite");
  }
  Bath b(Kind::constant, lambda, omega, "constant");
  b.dpp_ = [dpp](double) { return dpp; };
  b.dqq_ = [dqq](double) { return dqq; };
  b.dpq_ = [dpq](double) { return dpq; };
  return b;
}

Bath Bath::table(double lambda, double omega, PiecewiseLinear dpp, PiecewiseLinear dqq,
                 PiecewiseLinear dpq) {
  Bath b(Kind::table, lambda, omega, "table");
  b.dpp_ = std::move(dpp);
  b.dqq_ = std::move(dqq);
  b.dpq_ = std::move(dpq);
  return b;
}

Bath Bath::custom(double lambda, double omega, Coefficient dpp, Coefficient dqq, Coefficient dpq,
                  std::string label) {
  if (!dpp || !dqq || !dpq) {
    throw std::invalid_argument("custom bath: all three coefficient functions are required");
  }
  Bath b(Kind::custom, lambda, omega, std::move(label));
  b.dpp_ = std::move(dpp);
  b.dqq_ = std::move(dqq);
  b.dpq_ = std::move(dpq);
  return b;
}

void Bath::check_argument(double x) const {
  if (kind_ == Kind::thermal && !(x > 0.0)) {
    throw std::domain_error("thermal bath: coefficient argument Omega must be > 0, got " +
                            std::to_string(x));
  }
}

double Bath::d_plus(double x) const {
  check_argument(x);
  if (kind_ == Kind::thermal) {
    const double t = *temperature_;
    if (t == 0.0) {
      return 0.5 * lambda_;
    }
    return 0.5 * lambda_ * stable_coth(omega_ * x / (2.0 * t));
  }
  return 0.5 * (omega_ * dqq_(x) + dpp_(x) / omega_);
}

double Bath::d_minus(double x) const {
  check_argument(x);
  if (kind_ == Kind::thermal) {
    return 0.0;
  }
  return 0.5 * (omega_ * dqq_(x) - dpp_(x) / omega_);
}

double Bath::dpp(double x) const {
  if (kind_ == Kind::thermal) {
    return omega_ * d_plus(x);
  }
  return dpp_(x);
}

double Bath::dqq(double x) const {
  if (kind_ == Kind::thermal) {
    return d_plus(x) / omega_;
  }
  return dqq_(x);
}

double Bath::d_pq(double x) const {
  check_argument(x);
  if (kind_ == Kind::thermal) {
    return 0.0;
  }
  return dpq_(x);
}

bool Bath::decouples_populations(const Oscillator& model) const {
  if (kind_ == Kind::thermal) {
    return true;
  }
  for (int n = 0; n <= model.n_max(); ++n) {
    const double x = model.omega_shift(n);
    if (d_minus(x) != 0.0 || d_pq(x) != 0.0) {
      return false;
    }
  }
  return true;
}

ValidationReport validate_bath(const Bath& bath, const Oscillator& model) {
  ValidationReport report;
  for (int n = 0; n <= model.n_max(); ++n) {
    ++report.levels_checked;
    const double x = model.omega_shift(n);
    if (!(x > 0.0)) {
      report.issues.push_back({n, "omega_shift_positive", x});
      if (bath.is_thermal()) {
        continue;
      }
    }
    if (const double v = bath.dpp(x); v < 0.0) {
      report.issues.push_back({n, "dpp_nonnegative", v});
    }
    if (const double v = bath.dqq(x); v < 0.0) {
      report.issues.push_back({n, "dqq_nonnegative", v});
    }
    if (const double v = 2.0 * bath.d_plus(x) - bath.lambda(); v < 0.0) {
      report.issues.push_back({n, "upward_rate_nonnegative", v});
    }
  }
  return report;
}

}  // namespace dqo
