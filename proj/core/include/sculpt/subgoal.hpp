#pragma once

#include <functional>
#include <optional>
#include <string>

#include "sculpt/cluster.hpp"
#include "sculpt/llm_client.hpp"
#include "sculpt/planner.hpp"

namespace sculpt {

enum class ModKind { Lengthen, Shorten, Flatten, Thin };

std::string to_string(ModKind kind);
std::optional<ModKind> mod_kind_from_string(const std::string& s);

// Maximum fractional stretch / compression applied at w = 1.
inline constexpr double kGainStretch = 0.5;    // kappa
inline constexpr double kGainCompress = 0.5;   // kappa'

struct Modification {
  ModKind kind = ModKind::Flatten;
  int cluster_id = 0;
  Point3 direction{0.0, 0.0, 1.0};  // unit; horizontal for thin, unused by flatten
  double weight = 0.0;              // in [0, 1]
};

struct SubGoal {
  Modification modification;
  Cluster target_cluster;  // post-modification points
};

// The four geometric modification functions. All are affine maps about the
// cluster centroid (flatten about the cluster's z floor), preserve the point
// count, and are the identity at w = 0.
Cluster lengthen(const Cluster& c, const Point3& direction, double w);
Cluster shorten(const Cluster& c, const Point3& direction, double w);
Cluster flatten(const Cluster& c, double w);
Cluster thin(const Cluster& c, const Point3& direction_xy, double w);

Cluster apply_modification(const Cluster& c, const Modification& m);

// Text form consumed by the LLM: each cluster downsampled to 50 points,
// clusters ordered by centroid (z, x, y), one line per point
//   "cluster <id>: point at (x.xxx, y.yyy, z.zzz)"
std::string serialize_for_llm(const ClusteredCloud& cloud, std::uint64_t seed);

// A backend proposes one modification per refinement round, or nothing when
// it gives up (parse exhaustion). The audit string receives the raw reply /
// candidate scores for the JSON-lines log.
using SubGoalBackend = std::function<std::optional<Modification>(
    const ClusteredCloud&, const ShapePrompt&, std::string* audit)>;

// Deterministic stand-in for the LLM: brute-force search over cluster x
// function x direction x weight grid, minimizing the Chamfer residual between
// the modified (sparse) cloud and the prompt template's surface samples.
SubGoalBackend heuristic_subgoal_backend(std::uint64_t seed = 0);

// Chat-endpoint backend; strict JSON replies
//   {"kind": "...", "cluster": n, "direction": [x,y,z], "weight": w}
// with retry on parse failure or invalid cluster ids.
SubGoalBackend llm_subgoal_backend(const LLMConfig& config,
                                   const ChatTransport& transport);

// Runs the backend and applies the chosen modification. Returns nullopt when
// the backend declines (the refinement loop records a skip).
std::optional<SubGoal> propose_subgoal(const ClusteredCloud& cloud,
                                       const ShapePrompt& prompt,
                                       const SubGoalBackend& backend,
                                       std::string* audit = nullptr);

}  // namespace sculpt
