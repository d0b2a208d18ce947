#include "sculpt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sculpt/errors.hpp"

namespace sculpt {

namespace {

double mean_min_sq(const PointCloud& from, const PointCloud& to) {
  double sum = 0.0;
  for (const auto& p : from.points) {
    double best = std::numeric_limits<double>::max();
    for (const auto& q : to.points) best = std::min(best, squared_distance(p, q));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

double directed_hausdorff(const PointCloud& from, const PointCloud& to) {
  double worst = 0.0;
  for (const auto& p : from.points) {
    double best = std::numeric_limits<double>::max();
    for (const auto& q : to.points) best = std::min(best, squared_distance(p, q));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("chamfer: empty cloud");
  return mean_min_sq(a, b) + mean_min_sq(b, a);
}

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  // Jonker-Volgenant shortest augmenting path with dual potentials,
  // 1-indexed internal arrays.
  const int n = static_cast<int>(cost.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::max());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = std::numeric_limits<double>::max();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double emd(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("emd: empty cloud");
  if (a.size() != b.size())
    throw InvalidArgument("emd: clouds must be the same size");
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost[i][j] = distance(a.points[i], b.points[j]);
  auto match = solve_assignment(cost);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += cost[i][match[i]];
  return total / n;
}

double hausdorff(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("hausdorff: empty cloud");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

DistanceReport distance_report(const PointCloud& a, const PointCloud& b) {
  DistanceReport r;
  r.cd = chamfer(a, b);
  r.emd = a.size() == b.size() ? emd(a, b) : -1.0;
  r.hd = hausdorff(a, b);
  return r;
}

}  // namespace sculpt
