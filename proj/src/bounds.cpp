#include "ggms/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace ggms {

namespace {

double log_ratio(double eta, double beta, int d) {
  if (eta <= 0 || beta <= 0 || d < 1) throw std::invalid_argument("bounds: eta, beta, d must be positive");
  const double ratio = eta * beta * beta / d;
  if (!(ratio > 1.0)) throw std::domain_error("bounds: eta*beta^2/d must exceed 1");
  return std::log(ratio);
}

double coupling_ratio(int d, double theta) {
  if (theta < 0) throw std::invalid_argument("bounds: theta must be nonnegative");
  if (!(d * theta < 1.0)) throw std::domain_error("bounds: d*theta must be below 1");
  return theta / (1.0 - d * theta);
}

void check_copies(int r, double eps, double eta, int p) {
  if (r < 2) throw std::invalid_argument("bounds: r must be at least 2");
  if (eps <= 0 || eta <= 0 || p < 1) throw std::invalid_argument("bounds: eps, eta, p must be positive");
}

}  // namespace

double fano_lower_bound(double eta, double beta, int d, double theta, double delta) {
  const double l = log_ratio(eta, beta, d);
  if (!(d * theta < 0.5)) throw std::domain_error("fano_lower_bound: d*theta must be below 1/2");
  if (!(theta > 0)) throw std::domain_error("fano_lower_bound: theta must be positive");
  if (delta < 0 || delta >= 1) throw std::invalid_argument("fano_lower_bound: delta must lie in [0, 1)");
  const double x = coupling_ratio(d, theta);
  return (1.0 - delta) * l / (2.0 * x * x);
}

double family_log_size_nats(double eta, double beta, int d, int p) {
  if (p < 1) throw std::invalid_argument("family_log_size: p must be positive");
  if (eta * beta * beta == d) return 0.0;
  return 0.5 * d * p * log_ratio(eta, beta, d);
}

double family_log_size(double eta, double beta, int d, int p) {
  return family_log_size_nats(eta, beta, d, p) / std::numbers::ln2;
}

double sym_kl_family_bound(int p, int d, double theta) {
  const double x = coupling_ratio(d, theta);
  return static_cast<double>(p) * d * x * x;
}

double mckay_count(long long k, int d) {
  if (d < 1 || k <= d) throw std::invalid_argument("mckay_count: need d >= 1 and k > d");
  const long long kd = k * d;
  if (kd % 2) throw std::domain_error("mckay_count: k*d must be even");
  const double m = static_cast<double>(kd);
  const double dd = d;
  return std::lgamma(m + 1) - std::lgamma(m / 2 + 1) - (m / 2) * std::numbers::ln2 -
         static_cast<double>(k) * std::lgamma(dd + 1) - (dd * dd - 1) / 4 - dd * dd * dd / (12.0 * k);
}

double mckay_count_raw(long long k, int d) {
  if (k * d > 40) throw std::domain_error("mckay_count_raw: k*d exceeds 40, use the log value");
  return std::exp(mckay_count(k, d));
}

std::string format_log_count(double ln_value, int digits) {
  if (!std::isfinite(ln_value)) return ln_value > 0 ? "inf" : "0";
  digits = std::clamp(digits, 1, 17);
  const double l10 = ln_value / std::numbers::ln10;
  double e = std::floor(l10);
  double mant = std::pow(10.0, l10 - e);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits - 1, mant);
  if (std::string(buf).rfind("10", 0) == 0) {  // mantissa rounded up to 10
    e += 1;
    std::snprintf(buf, sizeof buf, "%.*f", digits - 1, 1.0);
  }
  char out[96];
  std::snprintf(out, sizeof out, "%se%+.0f", buf, e);
  return out;
}

double expected_copies_continuous(int r, double eps, double eta, int p, double l_bar) {
  check_copies(r, eps, eta, p);
  if (10LL * r > p) throw std::domain_error("expected_copies_continuous: r must not exceed p/10");
  if (!(l_bar > 0)) throw std::invalid_argument("expected_copies_continuous: l_bar must be positive");
  return 2.0 * std::numbers::pi * l_bar / eps * std::pow(eta * eps * eps, r - 1) * p;
}

double expected_copies_lattice(int r, double eps, double eta, int p) {
  check_copies(r, eps, eta, p);
  return 4.0 * p * std::pow(eta * eps * eps, r - 1);
}

double separated_copies_floor(int r, double eps, double eta, int p) {
  const double lp = std::log(static_cast<double>(p));
  return expected_copies_lattice(r, eps, eta, p) / (lp * lp * lp * lp);
}

BoundsTable bounds_table(const BoundInputs& in) {
  BoundsTable t;
  t.in = in;
  t.n_min = fano_lower_bound(in.eta, in.beta, in.d, in.theta);
  t.family_bits = family_log_size(in.eta, in.beta, in.d, in.p);
  t.kl_bound = sym_kl_family_bound(in.p, in.d, in.theta);
  t.copies_continuous = expected_copies_continuous(in.r, in.eps, in.eta, in.p, in.l_bar);
  t.copies_lattice = expected_copies_lattice(in.r, in.eps, in.eta, in.p);
  t.copies_separated = separated_copies_floor(in.r, in.eps, in.eta, in.p);
  return t;
}

}  // namespace ggms
