#pragma once

#include <vector>

#include "sculpt/geometry.hpp"

namespace sculpt {

struct DistanceReport {
  double cd = 0.0;   // squared meters (mean-normalized both sides)
  double emd = 0.0;  // meters
  double hd = 0.0;   // meters
};

// Symmetric Chamfer distance with squared Euclidean terms:
//   (1/|a|) sum_a min_b ||a-b||^2 + (1/|b|) sum_b min_a ||b-a||^2
double chamfer(const PointCloud& a, const PointCloud& b);

// Exact Earth Mover's distance for equal-size clouds: minimum over bijections
// of the mean Euclidean matching cost, solved with an O(n^3) assignment
// algorithm (Jonker-Volgenant style shortest augmenting paths).
double emd(const PointCloud& a, const PointCloud& b);

// max of the two directed Hausdorff distances.
double hausdorff(const PointCloud& a, const PointCloud& b);

DistanceReport distance_report(const PointCloud& a, const PointCloud& b);

// Minimum-cost assignment over a dense square cost matrix; returns the column
// assigned to each row. Exposed for oracle tests and reused by emd().
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace sculpt
