#include "sculpt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "sculpt/errors.hpp"
#include "sculpt/metrics.hpp"
#include "sculpt/planner.hpp"
#include "sculpt/ply_io.hpp"
#include "sculpt/subgoal.hpp"

namespace sculpt {

double mixed_distance(const PointCloud& a, const PointCloud& b, double gamma_mix) {
  if (gamma_mix < 0.0 || gamma_mix > 1.0)
    throw InvalidArgument("mixed_distance: gamma must be in [0, 1]");
  return gamma_mix * chamfer(a, b) + (1.0 - gamma_mix) * emd(a, b);
}

ClusteredCloud perceive(const PointCloud& cloud, int k, int target_points,
                        std::uint64_t seed) {
  ClusteredCloud clustered = cluster(cloud, k, seed);
  std::size_t smallest = clustered.clusters.front().points.size();
  for (const auto& c : clustered.clusters)
    smallest = std::min(smallest, c.points.size());
  int n = std::min<int>(target_points, static_cast<int>(smallest));
  std::vector<Cluster> out;
  for (const auto& c : clustered.clusters)
    out.push_back(downsample(c, n, seed + 1000 + c.id));
  return order_clusters(std::move(out));
}

namespace {

Point3 random_unit_vector(Rng& rng) {
  while (true) {
    Point3 v{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
             rng.uniform(-1.0, 1.0)};
    double n = v.norm();
    if (n > 1e-6 && n <= 1.0) return v * (1.0 / n);
  }
}

Point3 random_horizontal_unit(Rng& rng) {
  double ang = rng.uniform(0.0, 2.0 * M_PI);
  return {std::cos(ang), std::sin(ang), 0.0};
}

Modification random_modification(int k_clusters, Rng& rng) {
  Modification m;
  m.cluster_id = static_cast<int>(rng.next_below(k_clusters));
  m.weight = rng.uniform(0.0, 1.0);
  switch (rng.next_below(4)) {
    case 0:
      m.kind = ModKind::Lengthen;
      m.direction = random_unit_vector(rng);
      break;
    case 1:
      m.kind = ModKind::Shorten;
      m.direction = random_unit_vector(rng);
      break;
    case 2:
      m.kind = ModKind::Flatten;
      m.direction = {0.0, 0.0, 1.0};
      break;
    default:
      m.kind = ModKind::Thin;
      m.direction = random_horizontal_unit(rng);
      break;
  }
  return m;
}

ClayBody build_prompt_body(const std::string& prompt_keyword, const SimConfig& sim,
                           Rng& rng) {
  ShapePrompt prompt{prompt_keyword};
  PlacementPlan placement = plan(prompt, template_backend(prompt));
  OccupancyGrid grid;
  ClayBody body;
  for (const auto& pl : placement.placements)
    body = place_chunk(body, grid, pl, sim, rng.next_u64());
  return body;
}

int nearest_cluster_id(const ClusteredCloud& cloud, const Point3& target) {
  int best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (const auto& c : cloud.clusters) {
    double d = squared_distance(c.centroid, target);
    if (d < best_d) {
      best_d = d;
      best = c.id;
    }
  }
  return best;
}

}  // namespace

std::vector<TrainingPair> generate_synthetic_pairs(
    const std::vector<ClusteredCloud>& seeds, int count, double gamma_mix,
    std::uint64_t seed) {
  if (seeds.empty())
    throw InvalidArgument("generate_synthetic_pairs: need at least one seed cloud");
  Rng rng = Rng(seed).substream("synthetic-pairs");
  std::vector<TrainingPair> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const ClusteredCloud& cloud = seeds[rng.next_below(seeds.size())];
    Modification m =
        random_modification(static_cast<int>(cloud.clusters.size()), rng);
    const Cluster& state = cloud.clusters[m.cluster_id];
    Cluster next = apply_modification(state, m);
    TrainingPair pair;
    pair.target = mixed_distance(state.points, next.points, gamma_mix);
    pair.state = state;
    pair.next = std::move(next);
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<ClusteredCloud> generate_seed_clouds(
    const std::vector<std::string>& prompts, int k, int target_points,
    const SimConfig& sim, const WorkspaceBounds& workspace, std::uint64_t seed) {
  Rng rng = Rng(seed).substream("seed-clouds");
  std::vector<ClusteredCloud> out;
  for (const auto& keyword : prompts) {
    ClayBody body = build_prompt_body(keyword, sim, rng);
    ClusteredCloud clustered =
        perceive(body.particles, k, target_points, rng.next_u64());
    for (auto& c : clustered.clusters) c = normalize_cluster(c, workspace);
    out.push_back(std::move(clustered));
  }
  return out;
}

std::vector<ActionTuple> generate_action_dataset(
    const std::vector<std::string>& prompts, int count, const SimConfig& sim,
    const ActionBounds& bounds, const WorkspaceBounds& workspace, int k,
    int target_points, std::uint64_t seed) {
  if (prompts.empty())
    throw InvalidArgument("generate_action_dataset: no prompts");
  Rng rng = Rng(seed).substream("action-dataset");
  std::vector<ActionTuple> out;
  out.reserve(count);

  const int grasps_per_episode = 10;
  while (static_cast<int>(out.size()) < count) {
    ClayBody body =
        build_prompt_body(prompts[rng.next_below(prompts.size())], sim, rng);
    for (int g = 0; g < grasps_per_episode && static_cast<int>(out.size()) < count;
         ++g) {
      // grasp near a random particle so most grasps touch the clay
      GraspAction action;
      ClayBody post;
      bool moved = false;
      for (int attempt = 0; attempt < 10 && !moved; ++attempt) {
        const Point3& anchor =
            body.particles.points[rng.next_below(body.particles.size())];
        action.x = std::clamp(anchor.x + rng.uniform(-0.005, 0.005),
                              bounds.lo[0], bounds.hi[0]);
        action.y = std::clamp(anchor.y + rng.uniform(-0.005, 0.005),
                              bounds.lo[1], bounds.hi[1]);
        action.z = std::clamp(anchor.z + rng.uniform(-0.005, 0.005),
                              bounds.lo[2], bounds.hi[2]);
        action.rot_z = rng.uniform(bounds.lo[3], bounds.hi[3]);
        action.aperture = rng.uniform(bounds.lo[4], bounds.hi[4]);
        post = apply_grasp(body, action, sim);
        for (std::size_t i = 0; i < body.particles.size() && !moved; ++i)
          moved = !(post.particles.points[i] == body.particles.points[i]);
      }
      if (!moved) continue;

      Point3 center{action.x, action.y, action.z};
      ClusteredCloud pre = perceive(body.particles, k, target_points, rng.next_u64());
      ClusteredCloud nxt = perceive(post.particles, k, target_points, rng.next_u64());
      ActionTuple tup;
      tup.state = pre.clusters[nearest_cluster_id(pre, center)];
      tup.next = nxt.clusters[nearest_cluster_id(nxt, center)];
      tup.action_norm = bounds.normalize(action);
      out.push_back(std::move(tup));
      body = post;
    }
  }
  return out;
}

namespace {

Cluster cluster_from_ply(const std::filesystem::path& path) {
  Cluster c;
  c.points = read_ply(path);
  c.centroid = c.points.centroid();
  return c;
}

}  // namespace

void save_action_dataset(const std::vector<ActionTuple>& tuples,
                         const std::filesystem::path& dir,
                         const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / (stem + ".jsonl"));
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    std::string state_name = stem + "_" + std::to_string(i) + "_state.ply";
    std::string next_name = stem + "_" + std::to_string(i) + "_next.ply";
    write_ply(tuples[i].state.points, dir / state_name);
    write_ply(tuples[i].next.points, dir / next_name);
    nlohmann::ordered_json j;
    j["state_ply"] = state_name;
    j["next_ply"] = next_name;
    j["action"] = tuples[i].action_norm;
    index << j.dump() << "\n";
  }
}

std::vector<ActionTuple> load_action_dataset(const std::filesystem::path& index) {
  std::ifstream in(index);
  if (!in) throw InvalidState("load_action_dataset: cannot open " + index.string());
  std::filesystem::path dir = index.parent_path();
  std::vector<ActionTuple> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    ActionTuple tup;
    tup.state = cluster_from_ply(dir / j.at("state_ply").get<std::string>());
    tup.next = cluster_from_ply(dir / j.at("next_ply").get<std::string>());
    for (int d = 0; d < 5; ++d) tup.action_norm[d] = j.at("action").at(d).get<double>();
    out.push_back(std::move(tup));
  }
  return out;
}

void save_training_pairs(const std::vector<TrainingPair>& pairs,
                         const std::filesystem::path& dir,
                         const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / (stem + ".jsonl"));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::string state_name = stem + "_" + std::to_string(i) + "_state.ply";
    std::string next_name = stem + "_" + std::to_string(i) + "_next.ply";
    write_ply(pairs[i].state.points, dir / state_name);
    write_ply(pairs[i].next.points, dir / next_name);
    nlohmann::ordered_json j;
    j["state_ply"] = state_name;
    j["next_ply"] = next_name;
    j["target_distance"] = pairs[i].target;
    index << j.dump() << "\n";
  }
}

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& index) {
  std::ifstream in(index);
  if (!in) throw InvalidState("load_training_pairs: cannot open " + index.string());
  std::filesystem::path dir = index.parent_path();
  std::vector<TrainingPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    TrainingPair pair;
    pair.state = cluster_from_ply(dir / j.at("state_ply").get<std::string>());
    pair.next = cluster_from_ply(dir / j.at("next_ply").get<std::string>());
    pair.target = j.at("target_distance").get<double>();
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace sculpt
