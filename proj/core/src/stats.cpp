#include "sculpt/stats.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "sculpt/errors.hpp"

namespace sculpt {

double krippendorff_alpha_ordinal(const RatingMatrix& ratings) {
  if (ratings.raters() < 2)
    throw UndefinedStatistic("krippendorff: need at least 2 raters");

  // Collect per-item value counts, keeping only items with >= 2 ratings.
  const std::size_t items = ratings.items();
  std::vector<std::map<int, int>> unit_counts;
  for (std::size_t it = 0; it < items; ++it) {
    std::map<int, int> counts;
    for (const auto& row : ratings.rows) {
      if (it < row.size() && row[it].has_value()) ++counts[*row[it]];
    }
    int m = 0;
    for (auto& [v, c] : counts) m += c;
    if (m >= 2) unit_counts.push_back(std::move(counts));
  }
  if (unit_counts.empty())
    throw UndefinedStatistic("krippendorff: fewer than 2 pairable values");

  // Coincidence matrix o[c][k] and value marginals.
  std::map<int, std::map<int, double>> o;
  std::map<int, double> marginal;
  double n_total = 0.0;
  for (const auto& counts : unit_counts) {
    int m = 0;
    for (auto& [v, c] : counts) m += c;
    for (auto& [c, nc] : counts) {
      for (auto& [k, nk] : counts) {
        double pairs = (c == k) ? nc * (nc - 1.0) : nc * static_cast<double>(nk);
        o[c][k] += pairs / (m - 1.0);
      }
      marginal[c] += nc;
      n_total += nc;
    }
  }

  // Ordinal squared-difference weights from the marginal distribution:
  // delta2(c,k) = (sum_{g=c..k} n_g - (n_c + n_k)/2)^2
  auto delta2 = [&](int c, int k) {
    if (c > k) std::swap(c, k);
    double run = 0.0;
    for (const auto& [g, ng] : marginal)
      if (g >= c && g <= k) run += ng;
    double d = run - (marginal[c] + marginal[k]) / 2.0;
    return d * d;
  };

  double d_obs = 0.0, d_exp = 0.0;
  for (const auto& [c, row] : o)
    for (const auto& [k, ock] : row)
      if (k > c) d_obs += ock * delta2(c, k);
  for (const auto& [c, nc] : marginal)
    for (const auto& [k, nk] : marginal)
      if (k > c) d_exp += nc * nk * delta2(c, k);

  if (d_exp == 0.0) return 1.0;  // all values identical
  return 1.0 - (n_total - 1.0) * d_obs / d_exp;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  // Lentz continued fraction for the regularized incomplete beta.
  auto betacf = [](double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 1e-15, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
      int m2 = 2 * m;
      double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::fabs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::fabs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::fabs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
  };

  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        b * std::log(1.0 - x) + a * std::log(x)) *
                   betacf(b, a, 1.0 - x) / b;
}

WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw InvalidArgument("welch_t: both samples need at least 2 values");

  auto moments = [](const std::vector<double>& s) {
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= s.size();
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= (s.size() - 1.0);
    return std::pair{mean, var};
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  double sa = va / a.size(), sb = vb / b.size();
  double se2 = sa + sb;

  WelchResult r;
  if (se2 == 0.0) {
    // zero variance in both samples: t is 0 when means agree, infinite
    // separation otherwise
    r.t = (ma == mb) ? 0.0 : std::numeric_limits<double>::infinity() * (ma > mb ? 1 : -1);
    r.p = (ma == mb) ? 1.0 : 0.0;
    r.dof = a.size() + b.size() - 2.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 /
          (sa * sa / (a.size() - 1.0) + sb * sb / (b.size() - 1.0));
  // two-sided p-value: 2*P(T > |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2)
  r.p = incomplete_beta(r.dof / 2.0, 0.5, r.dof / (r.dof + r.t * r.t));
  return r;
}

}  // namespace sculpt
