#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sculpt/encoder.hpp"
#include "sculpt/rng.hpp"
#include "sculpt/sim.hpp"

namespace sculpt {

// Cross-attention + MLP head dimensions on top of the fused embedding.
struct ActionHeadConfig {
  int fused = 1088;
  int attn = 128;    // h: query/key/value width
  int latent = 256;  // L: down-projection width
  int mlp = 128;
  int out = 5;
};

struct ActionHeadParams {
  ActionHeadConfig cfg;
  Eigen::MatrixXd wq, wk, wv;  // fused x attn
  Eigen::MatrixXd wd, w5, w6;
  Eigen::VectorXd bd, b5, b6;

  static ActionHeadParams random_init(const ActionHeadConfig& cfg,
                                      std::uint64_t seed);
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& flat);
  std::size_t param_count() const;
};

struct ActionHeadCache {
  Eigen::MatrixXd fs, fg, q, k, v, attn, attn_out;
  Eigen::RowVectorXd pooled;
  Eigen::VectorXd z1, z2;
  Eigen::VectorXd out;
};

// Queries come from the state embedding, keys/values from the goal embedding;
// attention rows are mean-pooled before the down-projection.
Eigen::VectorXd action_head_forward(const ActionHeadParams& params,
                                    const Eigen::MatrixXd& fused_state,
                                    const Eigen::MatrixXd& fused_goal,
                                    ActionHeadCache* cache = nullptr);

struct ActionHeadGrad {
  Eigen::MatrixXd wq, wk, wv, wd, w5, w6;
  Eigen::VectorXd bd, b5, b6;
  static ActionHeadGrad zero(const ActionHeadConfig& cfg);
  Eigen::VectorXd pack() const;
  void scale(double s);
};

// Backprop through the head; also emits gradients on the two fused inputs for
// the unfrozen / end-to-end training modes.
void action_head_backward(const ActionHeadParams& params,
                          const ActionHeadCache& cache,
                          const Eigen::VectorXd& d_out, ActionHeadGrad& grad,
                          Eigen::MatrixXd* d_fused_state,
                          Eigen::MatrixXd* d_fused_goal);

// (state, action, next-state) tuple with the action in normalized [-1,1]^5.
struct ActionTuple {
  Cluster state;
  Cluster next;
  std::array<double, 5> action_norm{};
};

enum class TrainMode { Frozen, Unfrozen, EndToEnd };

struct ActionModel {
  EncoderParams encoder;
  ActionHeadParams head;
  ActionBounds bounds;
  WorkspaceBounds workspace{{0.0, 0.0, 0.0}, {0.075, 0.075, 0.075}};
};

// Affine map of cluster coordinates to roughly [-1,1] via workspace bounds;
// the encoder always sees normalized inputs inside the model path.
Cluster normalize_cluster(const Cluster& c, const WorkspaceBounds& ws);

// Trains the MLP/attention head (and, depending on mode, the encoder) with
// MSE on normalized actions. Frozen mode never touches encoder weights.
// EndToEnd requires a non-pretrained encoder.
ActionModel train_action_head(const std::vector<ActionTuple>& dataset,
                              const EncoderParams& encoder, TrainMode mode,
                              const TrainHyper& hyper,
                              const ActionBounds& bounds,
                              const WorkspaceBounds& workspace);

// Deterministic 5D prediction, clamped to bounds.
GraspAction predict_action(const ActionModel& model, const Cluster& state,
                           const Cluster& goal);

// Raw normalized prediction (unclamped), used for MSE evaluation.
std::array<double, 5> predict_action_normalized(const ActionModel& model,
                                                const Cluster& state,
                                                const Cluster& goal);

// Precomputed latent index for the retrieval baselines.
struct RetrievalIndex {
  std::vector<Eigen::VectorXd> embeddings;
  std::vector<std::array<double, 5>> actions;
};

RetrievalIndex build_retrieval_index(const std::vector<ActionTuple>& train_set,
                                     const EncoderParams& encoder,
                                     const WorkspaceBounds& workspace);

// Nearest neighbor's stored action in the pooled pair-embedding space.
std::array<double, 5> baseline_nn_greedy(const RetrievalIndex& index,
                                         const EncoderParams& encoder,
                                         const WorkspaceBounds& workspace,
                                         const Cluster& state, const Cluster& goal);

// Distance-weighted (softmax of negative distance) average of the k nearest
// stored actions.
std::array<double, 5> baseline_vinn(const RetrievalIndex& index,
                                    const EncoderParams& encoder,
                                    const WorkspaceBounds& workspace,
                                    const Cluster& state, const Cluster& goal,
                                    int k);

GraspAction baseline_random(const ActionBounds& bounds, Rng& rng);

// Mean squared error between normalized action vectors.
double action_mse(const std::array<double, 5>& a, const std::array<double, 5>& b);

}  // namespace sculpt
