#pragma once
// Sample-complexity, family-size and copy-count calculators.
// Combinatorial magnitudes are returned as natural logs.

#include <string>

namespace ggms {

struct BoundInputs {
  int p = 100;
  double eta = 1.0;
  double beta = 2.0;
  int d = 3;
  double theta = 0.1;
  double eps = 0.1;
  int r = 2;
  double l_bar = 1.0;  // mean pairwise distance within the template
};

// (1 - delta) ln(eta beta^2 / d) / (2 (theta / (1 - d theta))^2).
double fano_lower_bound(double eta, double beta, int d, double theta, double delta = 0.0);

// (dp/2) log2(eta beta^2 / d).
double family_log_size(double eta, double beta, int d, int p);
double family_log_size_nats(double eta, double beta, int d, int p);

// p d (theta / (1 - d theta))^2.
double sym_kl_family_bound(int p, int d, double theta);

// Asymptotic number of labeled d-regular graphs on k vertices, as a natural log.
double mckay_count(long long k, int d);
// exp(mckay_count); only for k d <= 40.
double mckay_count_raw(long long k, int d);

// Renders exp(ln_value) as "m.mmme+N" without overflowing.
std::string format_log_count(double ln_value, int digits = 4);

// (2 pi l_bar / eps) (eta eps^2)^(r-1) p; requires 2 <= r <= p/10.
double expected_copies_continuous(int r, double eps, double eta, int p, double l_bar);
// 4 p (eta eps^2)^(r-1).
double expected_copies_lattice(int r, double eps, double eta, int p);
// Lattice count divided by ln^4 p.
double separated_copies_floor(int r, double eps, double eta, int p);

struct BoundsTable {
  BoundInputs in;
  double n_min = 0.0;
  double family_bits = 0.0;
  double kl_bound = 0.0;
  double copies_continuous = 0.0;
  double copies_lattice = 0.0;
  double copies_separated = 0.0;
};

BoundsTable bounds_table(const BoundInputs& in);

}  // namespace ggms
