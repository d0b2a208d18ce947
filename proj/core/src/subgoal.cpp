#include "sculpt/subgoal.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "sculpt/errors.hpp"
#include "sculpt/metrics.hpp"

namespace sculpt {

std::string to_string(ModKind kind) {
  switch (kind) {
    case ModKind::Lengthen: return "lengthen";
    case ModKind::Shorten: return "shorten";
    case ModKind::Flatten: return "flatten";
    case ModKind::Thin: return "thin";
  }
  return "?";
}

std::optional<ModKind> mod_kind_from_string(const std::string& s) {
  if (s == "lengthen") return ModKind::Lengthen;
  if (s == "shorten") return ModKind::Shorten;
  if (s == "flatten") return ModKind::Flatten;
  if (s == "thin") return ModKind::Thin;
  return std::nullopt;
}

namespace {

void check_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0))
    throw InvalidArgument("modification weight must be in [0, 1]");
}

void check_unit(const Point3& d) {
  if (std::fabs(d.norm() - 1.0) > 1e-9)
    throw InvalidArgument("modification direction must be a unit vector");
}

void check_nonempty(const Cluster& c) {
  if (c.points.empty()) throw InvalidArgument("modification on empty cluster");
}

// Shared scaling along an axis about the centroid: p' = p + gain*((p-c).d)*d
Cluster scale_along(const Cluster& c, const Point3& d, double gain) {
  Cluster out = c;
  Point3 ctr = c.points.centroid();
  for (auto& p : out.points.points) {
    double proj = (p - ctr).dot(d);
    p = p + d * (gain * proj);
  }
  out.centroid = out.points.centroid();
  return out;
}

}  // namespace

Cluster lengthen(const Cluster& c, const Point3& direction, double w) {
  check_nonempty(c);
  check_weight(w);
  check_unit(direction);
  return scale_along(c, direction, w * kGainStretch);
}

Cluster shorten(const Cluster& c, const Point3& direction, double w) {
  check_nonempty(c);
  check_weight(w);
  check_unit(direction);
  return scale_along(c, direction, -w * kGainCompress);
}

Cluster flatten(const Cluster& c, double w) {
  check_nonempty(c);
  check_weight(w);
  Cluster out = c;
  if (w == 0.0) return out;  // exact identity; the affine form would round
  double floor = c.points.min_z();
  for (auto& p : out.points.points) p.z = floor + (1.0 - w) * (p.z - floor);
  out.centroid = out.points.centroid();
  return out;
}

Cluster thin(const Cluster& c, const Point3& direction_xy, double w) {
  check_nonempty(c);
  check_weight(w);
  if (std::fabs(direction_xy.z) > 1e-9)
    throw InvalidArgument("thin direction must be horizontal");
  check_unit(direction_xy);
  // compress perpendicular to the provided horizontal direction
  Point3 n{-direction_xy.y, direction_xy.x, 0.0};
  return scale_along(c, n, -w * kGainCompress);
}

Cluster apply_modification(const Cluster& c, const Modification& m) {
  switch (m.kind) {
    case ModKind::Lengthen: return lengthen(c, m.direction, m.weight);
    case ModKind::Shorten: return shorten(c, m.direction, m.weight);
    case ModKind::Flatten: return flatten(c, m.weight);
    case ModKind::Thin: return thin(c, m.direction, m.weight);
  }
  throw InvalidArgument("unknown modification kind");
}

std::string serialize_for_llm(const ClusteredCloud& cloud, std::uint64_t seed) {
  std::vector<Cluster> sparse;
  for (const auto& c : cloud.clusters) {
    int n = std::min<int>(kLlmPointsPerCluster, static_cast<int>(c.points.size()));
    sparse.push_back(downsample(c, n, seed + c.id));
  }
  ClusteredCloud ordered = order_clusters(std::move(sparse));
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  for (const auto& c : ordered.clusters)
    for (const auto& p : c.points.points)
      out << "cluster " << c.id << ": point at (" << p.x << ", " << p.y << ", "
          << p.z << ")\n";
  return out.str();
}

namespace {

// Candidate directions per function kind; lengthen/shorten scale
// symmetrically so one sign per axis suffices.
const std::vector<Point3> kAxisDirections = {
    {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
const std::vector<Point3> kHorizontalDirections = {{1.0, 0.0, 0.0},
                                                   {0.0, 1.0, 0.0}};
const std::vector<double> kWeightGrid = {0.05, 0.1, 0.2, 0.3, 0.5};

// Points per cluster in the residual search, and the relative improvement a
// candidate must show before the backend commits to a modification.
constexpr int kResidualEvalPoints = 128;
constexpr double kResidualMargin = 0.002;

}  // namespace

SubGoalBackend heuristic_subgoal_backend(std::uint64_t seed) {
  return [seed](const ClusteredCloud& cloud, const ShapePrompt& prompt,
                std::string* audit) -> std::optional<Modification> {
    const std::string keyword = resolve_template_keyword(prompt);
    const PointCloud target = template_sample_cloud(keyword);

    // Downsampled evaluation cloud keeps the search cheap.
    std::vector<Cluster> sparse;
    for (const auto& c : cloud.clusters) {
      int n = std::min<int>(kResidualEvalPoints, static_cast<int>(c.points.size()));
      sparse.push_back(downsample(c, n, seed + c.id));
    }

    auto residual = [&](const std::vector<Cluster>& clusters) {
      PointCloud merged;
      for (const auto& c : clusters)
        merged.points.insert(merged.points.end(), c.points.points.begin(),
                             c.points.points.end());
      return chamfer(merged, target);
    };

    double best = residual(sparse);
    const double baseline = best;
    std::optional<Modification> pick;
    for (std::size_t ci = 0; ci < sparse.size(); ++ci) {
      auto try_candidate = [&](const Modification& m) {
        auto modified = sparse;
        modified[ci] = apply_modification(sparse[ci], m);
        double r = residual(modified);
        if (r < best && r < baseline * (1.0 - kResidualMargin)) {
          best = r;
          pick = m;
        }
      };
      for (double w : kWeightGrid) {
        for (const auto& d : kAxisDirections) {
          try_candidate({ModKind::Lengthen, static_cast<int>(ci), d, w});
          try_candidate({ModKind::Shorten, static_cast<int>(ci), d, w});
        }
        for (const auto& d : kHorizontalDirections)
          try_candidate({ModKind::Thin, static_cast<int>(ci), d, w});
        try_candidate({ModKind::Flatten, static_cast<int>(ci), {0, 0, 1}, w});
      }
    }

    if (audit) {
      nlohmann::ordered_json j;
      j["backend"] = "heuristic";
      j["baseline_residual"] = baseline;
      j["best_residual"] = best;
      if (pick) {
        j["kind"] = to_string(pick->kind);
        j["cluster"] = pick->cluster_id;
        j["weight"] = pick->weight;
      }
      *audit = j.dump();
    }
    return pick;  // nullopt when no candidate beats the current residual
  };
}

SubGoalBackend llm_subgoal_backend(const LLMConfig& config,
                                   const ChatTransport& transport) {
  return [config, transport](const ClusteredCloud& cloud, const ShapePrompt& prompt,
                             std::string* audit) -> std::optional<Modification> {
    const int k = static_cast<int>(cloud.clusters.size());
    std::string message =
        "You are refining a clay sculpture toward the prompt below by "
        "modifying one point-cloud cluster.\nPrompt: " + prompt.text +
        "\nClusters (ordered bottom to top):\n" + serialize_for_llm(cloud, 0) +
        "Available functions: lengthen, shorten, flatten, thin.\n"
        "Reply with strict JSON only: {\"kind\": \"...\", \"cluster\": n, "
        "\"direction\": [x,y,z], \"weight\": w} with 0 <= w <= 1 and "
        "0 <= n < " + std::to_string(k) + ".";

    for (int attempt = 0; attempt <= config.retries; ++attempt) {
      std::string content = chat_completion(config, transport, message);
      if (audit) *audit = content;
      try {
        auto j = nlohmann::json::parse(extract_json_object(content));
        Modification m;
        auto kind = mod_kind_from_string(j.at("kind").get<std::string>());
        if (!kind) throw InvalidArgument("unknown kind");
        m.kind = *kind;
        m.cluster_id = j.at("cluster").get<int>();
        if (m.cluster_id < 0 || m.cluster_id >= k)
          throw InvalidArgument("cluster id out of range");
        m.weight = j.at("weight").get<double>();
        if (m.weight < 0.0 || m.weight > 1.0)
          throw InvalidArgument("weight out of range");
        const auto& d = j.at("direction");
        Point3 dir{d.at(0).get<double>(), d.at(1).get<double>(),
                   d.at(2).get<double>()};
        if (m.kind == ModKind::Thin) dir.z = 0.0;
        double norm = dir.norm();
        if (norm < 1e-12) throw InvalidArgument("zero direction");
        m.direction = dir * (1.0 / norm);
        return m;
      } catch (const std::exception&) {
        // malformed or invalid proposal; retry
      }
    }
    return std::nullopt;
  };
}

std::optional<SubGoal> propose_subgoal(const ClusteredCloud& cloud,
                                       const ShapePrompt& prompt,
                                       const SubGoalBackend& backend,
                                       std::string* audit) {
  if (cloud.clusters.empty())
    throw InvalidArgument("propose_subgoal: empty clustered cloud");
  auto m = backend(cloud, prompt, audit);
  if (!m) return std::nullopt;
  SubGoal sg;
  sg.modification = *m;
  sg.target_cluster =
      apply_modification(cloud.clusters.at(m->cluster_id), *m);
  return sg;
}

}  // namespace sculpt
