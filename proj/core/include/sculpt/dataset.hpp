#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sculpt/action_model.hpp"
#include "sculpt/cluster.hpp"
#include "sculpt/encoder.hpp"
#include "sculpt/sim.hpp"

namespace sculpt {

// gamma-mixed pre-training target: gamma*CD + (1-gamma)*EMD.
double mixed_distance(const PointCloud& a, const PointCloud& b, double gamma_mix);

// Perception chain on one observed cloud: k-way clustering, then every
// cluster downsampled to the same count (target_points, reduced to the
// smallest cluster when the cloud is sparse).
ClusteredCloud perceive(const PointCloud& cloud, int k, int target_points,
                        std::uint64_t seed);

// Synthetic pre-training pairs: random (cluster, function, direction, weight)
// draws applied through the modification API, targets precomputed with
// mixed_distance. Seed clouds are expected in normalized coordinates.
std::vector<TrainingPair> generate_synthetic_pairs(
    const std::vector<ClusteredCloud>& seeds, int count, double gamma_mix,
    std::uint64_t seed);

// Seed clouds for pre-training: simulator builds each prompt's coarse shape,
// perception clusters it, clusters are normalized to workspace coordinates.
std::vector<ClusteredCloud> generate_seed_clouds(
    const std::vector<std::string>& prompts, int k, int target_points,
    const SimConfig& sim, const WorkspaceBounds& workspace, std::uint64_t seed);

// Simulator rollout dataset for action training: sequences of random grasps
// on randomized template shapes; each tuple pairs the cluster nearest the
// grasp center before and after the grasp with the normalized action.
std::vector<ActionTuple> generate_action_dataset(
    const std::vector<std::string>& prompts, int count, const SimConfig& sim,
    const ActionBounds& bounds, const WorkspaceBounds& workspace, int k,
    int target_points, std::uint64_t seed);

// JSON-lines dataset container: one record per tuple/pair referencing PLY
// files written next to the index file.
void save_action_dataset(const std::vector<ActionTuple>& tuples,
                         const std::filesystem::path& dir,
                         const std::string& stem);
std::vector<ActionTuple> load_action_dataset(const std::filesystem::path& index);

void save_training_pairs(const std::vector<TrainingPair>& pairs,
                         const std::filesystem::path& dir,
                         const std::string& stem);
std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& index);

}  // namespace sculpt
