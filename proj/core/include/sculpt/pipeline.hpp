#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sculpt/action_model.hpp"
#include "sculpt/dataset.hpp"
#include "sculpt/metrics.hpp"
#include "sculpt/planner.hpp"
#include "sculpt/sim.hpp"
#include "sculpt/subgoal.hpp"

namespace sculpt {

// Episode configuration. All randomness flows from `seed` through named
// substreams; no wall-clock seeding anywhere.
struct RunConfig {
  std::string prompt;
  std::string planner_backend = "template";   // "template" | "llm"
  std::string subgoal_backend = "heuristic";  // "heuristic" | "llm"
  std::string action_backend = "greedy";      // "greedy" | "model"
  std::filesystem::path action_checkpoint;    // required for action_backend "model"
  std::filesystem::path out_dir = "episode_out";
  std::uint64_t seed = 0;
  int max_rounds = 5;
  int max_plan_iters = kDefaultMaxPlanIters;
  int cluster_count = kDefaultClusterCount;
  int cluster_points = kClusterPointCount;
  double noise_sigma = 0.0;
  bool offline = true;  // forbids the network backends
  WorkspaceBounds workspace{{0.0, 0.0, 0.0}, {0.075, 0.075, 0.075}};
  SimConfig sim;
  ActionBounds bounds;
  LLMConfig llm;

  // Throws InvalidArgument on inconsistent settings (unknown backend name,
  // missing checkpoint path, offline + llm backend, non-positive limits).
  void validate() const;
};

// One `key = value` assignment; '#' starts a comment. Unknown keys throw
// InvalidArgument. Exposed separately so CLI flags reuse the same parser.
void set_run_config_field(RunConfig& config, const std::string& key,
                          const std::string& value);
RunConfig load_run_config(const std::filesystem::path& path);

// Injectable backends; when absent they are constructed from the config
// (template planner / heuristic sub-goals, or HTTP transports for "llm").
struct PipelineBackends {
  std::optional<ProposerSuite> planner;
  std::optional<SubGoalBackend> subgoal;
};

struct StepRecord {
  int index = 0;
  std::string kind;  // "place" | "grasp" | "skip"
  std::optional<CellIndex> cell;               // place steps
  std::optional<GraspAction> action;           // grasp steps
  std::optional<Modification> subgoal;         // grasp/skip steps
  std::string note;                            // skip reason, backend audit tag
  double chamfer_to_template = 0.0;
  std::string cloud_ply;                       // snapshot filename, empty for skips
};

struct EpisodeReport {
  bool success = false;
  std::string error_kind;  // "unknown-shape" | "planning-failure" | "transport"
                           // | "invalid-config" | "internal"; empty on success
  std::string error_message;
  std::string prompt;
  std::uint64_t seed = 0;
  int plan_length = 0;
  int refinement_rounds = 0;
  double initial_chamfer = 0.0;  // post-placement, pre-refinement
  double final_chamfer = 0.0;
  DistanceReport final_distances;  // vs the template sample cloud
  std::vector<StepRecord> steps;
  double runtime_seconds = 0.0;  // only nondeterministic report field
  std::filesystem::path report_path;
};

// Report serialization used for report.json; `runtime_seconds` is the only
// field that may differ between identically-seeded runs.
std::string episode_report_json(const EpisodeReport& report);

// prompt -> plan -> place chunks -> refinement loop (observe, cluster,
// sub-goal, action, grasp). Failures are captured in the returned report
// (success=false + error record) rather than thrown.
EpisodeReport run_episode(const RunConfig& config,
                          const PipelineBackends* backends = nullptr);

// Candidate-search action selection used when no trained model is configured:
// sweeps grasp candidates around the sub-goal cluster and keeps the one that
// minimizes the Chamfer distance to the desired cloud (the perceived cloud
// with the target cluster substituted). Returns nullopt when no candidate
// improves on doing nothing.
std::optional<GraspAction> greedy_grasp(const ClayBody& body,
                                        const ClusteredCloud& perceived,
                                        const SubGoal& goal, const SimConfig& sim,
                                        const ActionBounds& bounds);

struct SuiteSummaryRow {
  std::string prompt;
  int episodes = 0;  // successful episodes aggregated
  double cd_mean = 0.0, cd_std = 0.0;
  double emd_mean = 0.0, emd_std = 0.0;
  double hd_mean = 0.0, hd_std = 0.0;
};

struct SuiteResult {
  std::vector<EpisodeReport> episodes;
  std::vector<SuiteSummaryRow> summary;
  std::string csv_text;  // header + one row per prompt
  std::filesystem::path summary_csv;
};

// repeats episodes per prompt with derived per-episode seeds and isolated
// output directories; aggregates mean/std of the final distances per prompt.
// share_seed makes every repeat reuse the base seed (std collapses to 0).
SuiteResult run_suite(const std::vector<std::string>& prompts, int repeats,
                      const RunConfig& base,
                      const PipelineBackends* backends = nullptr,
                      bool share_seed = false);

// Distances between arbitrary-size clouds: CD/HD on the full clouds, EMD on
// equal-size farthest-point subsets (capped at `emd_cap` points).
DistanceReport distance_report_equalized(const PointCloud& a, const PointCloud& b,
                                         int emd_cap = 256,
                                         std::uint64_t seed = 0);

// ---- evaluation harness (Table-shaped comparison of policies) ----

struct EvaluationConfig {
  EncoderConfig encoder;
  ActionHeadConfig head;
  TrainHyper pretrain_hyper;
  TrainHyper action_hyper;
  double gamma_mix = 0.5;
  double val_fraction = 0.2;  // carved from the train tuples for val MSE
  int vinn_k = 5;
  int rollouts = 12;  // simulator sub-goal rollouts for CD/EMD/HD
  std::vector<std::string> rollout_prompts{"pyramid", "cube"};
  int cluster_count = kDefaultClusterCount;
  int cluster_points = kClusterPointCount;
  SimConfig sim;
  ActionBounds bounds;
  WorkspaceBounds workspace{{0.0, 0.0, 0.0}, {0.075, 0.075, 0.075}};
  std::uint64_t seed = 0;
};

struct EvaluationRow {
  std::string name;  // "vinn", "nn-greedy", "dm-frozen", "dm-unfrozen",
                     // "dm-end-to-end", "random"
  double val_mse = 0.0;
  double test_mse = 0.0;
  double cd = 0.0;
  double emd = 0.0;
  double hd = 0.0;
};

struct EvaluationTable {
  std::vector<EvaluationRow> rows;
  std::string to_csv() const;
  const EvaluationRow& row(const std::string& name) const;
};

// Pre-trains the encoder on the synthetic pairs, trains the three model
// variants and the retrieval baselines on the action tuples, then scores all
// six policies on val/test MSE and on simulator sub-goal rollouts.
EvaluationTable evaluate_models(const std::vector<TrainingPair>& pretrain_pairs,
                                const std::vector<ActionTuple>& train,
                                const std::vector<ActionTuple>& test,
                                const EvaluationConfig& cfg);

}  // namespace sculpt
