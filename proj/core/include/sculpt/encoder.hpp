#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sculpt/cluster.hpp"

namespace sculpt {

// Layer widths of the point-cloud encoder. Defaults follow the per-point
// 3->64->64 MLP, 64x64 feature transform and 64->128->1024 global MLP, giving
// the N x 1088 fused embedding. Tests shrink these for gradient checks.
struct EncoderConfig {
  int in_dim = 3;
  int h1 = 64;
  int h2 = 64;      // regional feature width (feature-transform output)
  int g1 = 128;
  int g2 = 1024;    // global feature width

  int fused_dim() const { return h2 + g2; }
};

struct EncoderParams {
  EncoderConfig cfg;
  Eigen::MatrixXd w1, w2, transform, w3, w4;
  Eigen::VectorXd b1, b2, b3, b4;
  bool pretrained = false;

  static EncoderParams random_init(const EncoderConfig& cfg, std::uint64_t seed);

  // Flat parameter view (used by finite-difference checks, the optimizer and
  // checkpointing). Order is fixed.
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& flat);
  std::size_t param_count() const;
};

// Forward-pass activations kept for backprop.
struct EncoderCache {
  Eigen::MatrixXd x, h1, h2, regional, g1, g2;
  Eigen::RowVectorXd global;                 // 1 x g2 max-pool
  std::vector<Eigen::Index> argmax;          // row index per global channel
};

struct LatentEmbedding {
  Eigen::MatrixXd regional;  // N x h2
  Eigen::RowVectorXd global; // 1 x g2
  Eigen::MatrixXd fused;     // N x (h2+g2), row i = [regional_i, global]
};

LatentEmbedding encode(const Cluster& cluster, const EncoderParams& params,
                       EncoderCache* cache = nullptr);

// Backprop through the encoder given gradients on the regional rows and the
// pooled global feature. Adds into `grad` (same shapes as params).
struct EncoderGrad {
  Eigen::MatrixXd w1, w2, transform, w3, w4;
  Eigen::VectorXd b1, b2, b3, b4;

  static EncoderGrad zero(const EncoderConfig& cfg);
  Eigen::VectorXd pack() const;
  void scale(double s);
};

void encode_backward(const EncoderParams& params, const EncoderCache& cache,
                     const Eigen::MatrixXd& d_regional,
                     const Eigen::RowVectorXd& d_global, EncoderGrad& grad);

// Splits a gradient on the fused embedding into regional / global parts
// (global rows sum over N).
void split_fused_grad(const Eigen::MatrixXd& d_fused, int h2,
                      Eigen::MatrixXd& d_regional, Eigen::RowVectorXd& d_global);

struct TrainingPair {
  Cluster state;
  Cluster next;
  double target = 0.0;  // gamma-mixed CD/EMD distance
};

struct TrainHyper {
  double lr = 1e-3;
  double momentum = 0.9;
  int batch = 32;
  int epochs = 5;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.1;
};

// Scalar regression head on the concatenated mean-pooled pair embedding,
// trained jointly with the encoder during pre-training then discarded.
struct RegressionHead {
  Eigen::VectorXd w;  // 2 * fused_dim
  double b = 0.0;
};

struct PretrainResult {
  EncoderParams encoder;
  double initial_holdout_loss = 0.0;
  double final_holdout_loss = 0.0;
};

// Distance-regression pre-training: minimizes squared error of the scalar
// head with seeded mini-batch SGD + momentum; returns the encoder weights.
PretrainResult pretrain_encoder(const std::vector<TrainingPair>& dataset,
                                const EncoderConfig& cfg, const TrainHyper& hyper);

// Pooled pair feature [mean fused(state), mean fused(goal)]; the latent used
// by the regression head and the retrieval baselines.
Eigen::VectorXd pair_embedding(const EncoderParams& params, const Cluster& state,
                               const Cluster& goal);

// Loss and full gradient of one pre-training example; exposed for the
// finite-difference oracle.
double pretrain_example_loss(const EncoderParams& params, const RegressionHead& head,
                             const TrainingPair& pair, EncoderGrad* grad,
                             Eigen::VectorXd* d_head_w, double* d_head_b);

}  // namespace sculpt
