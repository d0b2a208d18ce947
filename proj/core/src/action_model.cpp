#include "sculpt/action_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sculpt/errors.hpp"

namespace sculpt {

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  double bound = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

void append(Eigen::VectorXd& out, Eigen::Index& pos, const Eigen::MatrixXd& m) {
  out.segment(pos, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  pos += m.size();
}
void append(Eigen::VectorXd& out, Eigen::Index& pos, const Eigen::VectorXd& v) {
  out.segment(pos, v.size()) = v;
  pos += v.size();
}
void take(const Eigen::VectorXd& in, Eigen::Index& pos, Eigen::MatrixXd& m) {
  m = Eigen::Map<const Eigen::MatrixXd>(in.data() + pos, m.rows(), m.cols());
  pos += m.size();
}
void take(const Eigen::VectorXd& in, Eigen::Index& pos, Eigen::VectorXd& v) {
  v = in.segment(pos, v.size());
  pos += v.size();
}

}  // namespace

ActionHeadParams ActionHeadParams::random_init(const ActionHeadConfig& cfg,
                                               std::uint64_t seed) {
  Rng rng = Rng(seed).substream("head-init");
  ActionHeadParams p;
  p.cfg = cfg;
  p.wq = random_matrix(cfg.fused, cfg.attn, rng);
  p.wk = random_matrix(cfg.fused, cfg.attn, rng);
  p.wv = random_matrix(cfg.fused, cfg.attn, rng);
  p.wd = random_matrix(cfg.attn, cfg.latent, rng);
  p.bd = Eigen::VectorXd::Zero(cfg.latent);
  p.w5 = random_matrix(cfg.latent, cfg.mlp, rng);
  p.b5 = Eigen::VectorXd::Zero(cfg.mlp);
  p.w6 = random_matrix(cfg.mlp, cfg.out, rng);
  p.b6 = Eigen::VectorXd::Zero(cfg.out);
  return p;
}

std::size_t ActionHeadParams::param_count() const {
  return wq.size() + wk.size() + wv.size() + wd.size() + bd.size() + w5.size() +
         b5.size() + w6.size() + b6.size();
}

Eigen::VectorXd ActionHeadParams::pack() const {
  Eigen::VectorXd out(param_count());
  Eigen::Index pos = 0;
  append(out, pos, wq);
  append(out, pos, wk);
  append(out, pos, wv);
  append(out, pos, wd);
  append(out, pos, bd);
  append(out, pos, w5);
  append(out, pos, b5);
  append(out, pos, w6);
  append(out, pos, b6);
  return out;
}

void ActionHeadParams::unpack(const Eigen::VectorXd& flat) {
  Eigen::Index pos = 0;
  take(flat, pos, wq);
  take(flat, pos, wk);
  take(flat, pos, wv);
  take(flat, pos, wd);
  take(flat, pos, bd);
  take(flat, pos, w5);
  take(flat, pos, b5);
  take(flat, pos, w6);
  take(flat, pos, b6);
}

ActionHeadGrad ActionHeadGrad::zero(const ActionHeadConfig& cfg) {
  ActionHeadGrad g;
  g.wq = Eigen::MatrixXd::Zero(cfg.fused, cfg.attn);
  g.wk = Eigen::MatrixXd::Zero(cfg.fused, cfg.attn);
  g.wv = Eigen::MatrixXd::Zero(cfg.fused, cfg.attn);
  g.wd = Eigen::MatrixXd::Zero(cfg.attn, cfg.latent);
  g.bd = Eigen::VectorXd::Zero(cfg.latent);
  g.w5 = Eigen::MatrixXd::Zero(cfg.latent, cfg.mlp);
  g.b5 = Eigen::VectorXd::Zero(cfg.mlp);
  g.w6 = Eigen::MatrixXd::Zero(cfg.mlp, cfg.out);
  g.b6 = Eigen::VectorXd::Zero(cfg.out);
  return g;
}

Eigen::VectorXd ActionHeadGrad::pack() const {
  Eigen::VectorXd out(wq.size() + wk.size() + wv.size() + wd.size() + bd.size() +
                      w5.size() + b5.size() + w6.size() + b6.size());
  Eigen::Index pos = 0;
  append(out, pos, wq);
  append(out, pos, wk);
  append(out, pos, wv);
  append(out, pos, wd);
  append(out, pos, bd);
  append(out, pos, w5);
  append(out, pos, b5);
  append(out, pos, w6);
  append(out, pos, b6);
  return out;
}

void ActionHeadGrad::scale(double s) {
  wq *= s; wk *= s; wv *= s; wd *= s; bd *= s;
  w5 *= s; b5 *= s; w6 *= s; b6 *= s;
}

Eigen::VectorXd action_head_forward(const ActionHeadParams& params,
                                    const Eigen::MatrixXd& fused_state,
                                    const Eigen::MatrixXd& fused_goal,
                                    ActionHeadCache* cache) {
  const auto& cfg = params.cfg;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg.attn));

  Eigen::MatrixXd q = fused_state * params.wq;
  Eigen::MatrixXd k = fused_goal * params.wk;
  Eigen::MatrixXd v = fused_goal * params.wv;

  Eigen::MatrixXd scores = q * k.transpose() * inv_sqrt;
  Eigen::MatrixXd attn(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::RowVectorXd row = scores.row(i);
    double m = row.maxCoeff();
    Eigen::RowVectorXd e = (row.array() - m).exp();
    attn.row(i) = e / e.sum();
  }
  Eigen::MatrixXd attn_out = attn * v;
  Eigen::RowVectorXd pooled = attn_out.colwise().mean();

  Eigen::VectorXd z1 =
      ((pooled * params.wd).transpose() + params.bd).cwiseMax(0.0);
  Eigen::VectorXd z2 = (params.w5.transpose() * z1 + params.b5).cwiseMax(0.0);
  Eigen::VectorXd out = params.w6.transpose() * z2 + params.b6;

  if (cache) {
    cache->fs = fused_state;
    cache->fg = fused_goal;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->attn = std::move(attn);
    cache->attn_out = std::move(attn_out);
    cache->pooled = std::move(pooled);
    cache->z1 = z1;
    cache->z2 = z2;
    cache->out = out;
  }
  return out;
}

void action_head_backward(const ActionHeadParams& params,
                          const ActionHeadCache& cache,
                          const Eigen::VectorXd& d_out, ActionHeadGrad& grad,
                          Eigen::MatrixXd* d_fused_state,
                          Eigen::MatrixXd* d_fused_goal) {
  const auto& cfg = params.cfg;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg.attn));
  const Eigen::Index n = cache.fs.rows();

  grad.w6 += cache.z2 * d_out.transpose();
  grad.b6 += d_out;
  Eigen::VectorXd d_z2 = (params.w6 * d_out)
                             .cwiseProduct((cache.z2.array() > 0.0).cast<double>().matrix());

  grad.w5 += cache.z1 * d_z2.transpose();
  grad.b5 += d_z2;
  Eigen::VectorXd d_z1 = (params.w5 * d_z2)
                             .cwiseProduct((cache.z1.array() > 0.0).cast<double>().matrix());

  grad.wd += cache.pooled.transpose() * d_z1.transpose();
  grad.bd += d_z1;
  Eigen::RowVectorXd d_pooled = (params.wd * d_z1).transpose();

  Eigen::MatrixXd d_attn_out =
      d_pooled.replicate(n, 1) / static_cast<double>(n);
  Eigen::MatrixXd d_v = cache.attn.transpose() * d_attn_out;
  Eigen::MatrixXd d_attn = d_attn_out * cache.v.transpose();

  // softmax rows backward
  Eigen::MatrixXd d_scores(n, cache.attn.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto a = cache.attn.row(i);
    double dot = d_attn.row(i).dot(a);
    d_scores.row(i) = (d_attn.row(i).array() - dot) * a.array();
  }

  Eigen::MatrixXd d_q = d_scores * cache.k * inv_sqrt;
  Eigen::MatrixXd d_k = d_scores.transpose() * cache.q * inv_sqrt;

  grad.wq += cache.fs.transpose() * d_q;
  grad.wk += cache.fg.transpose() * d_k;
  grad.wv += cache.fg.transpose() * d_v;

  if (d_fused_state) *d_fused_state = d_q * params.wq.transpose();
  if (d_fused_goal)
    *d_fused_goal = d_k * params.wk.transpose() + d_v * params.wv.transpose();
}

Cluster normalize_cluster(const Cluster& c, const WorkspaceBounds& ws) {
  Cluster out = c;
  auto map = [](double v, double lo, double hi) {
    return 2.0 * (v - lo) / (hi - lo) - 1.0;
  };
  for (auto& p : out.points.points) {
    p.x = map(p.x, ws.min.x, ws.max.x);
    p.y = map(p.y, ws.min.y, ws.max.y);
    p.z = map(p.z, ws.min.z, ws.max.z);
  }
  out.centroid = out.points.centroid();
  return out;
}

namespace {

struct ForwardPass {
  EncoderCache enc_state, enc_goal;
  LatentEmbedding emb_state, emb_goal;
  ActionHeadCache head;
  Eigen::VectorXd out;
};

ForwardPass model_forward(const EncoderParams& encoder,
                          const ActionHeadParams& head,
                          const WorkspaceBounds& ws, const Cluster& state,
                          const Cluster& goal, bool keep_caches) {
  ForwardPass fp;
  Cluster ns = normalize_cluster(state, ws);
  Cluster ng = normalize_cluster(goal, ws);
  fp.emb_state = encode(ns, encoder, keep_caches ? &fp.enc_state : nullptr);
  fp.emb_goal = encode(ng, encoder, keep_caches ? &fp.enc_goal : nullptr);
  fp.out = action_head_forward(head, fp.emb_state.fused, fp.emb_goal.fused,
                               keep_caches ? &fp.head : nullptr);
  return fp;
}

}  // namespace

ActionModel train_action_head(const std::vector<ActionTuple>& dataset,
                              const EncoderParams& encoder, TrainMode mode,
                              const TrainHyper& hyper,
                              const ActionBounds& bounds,
                              const WorkspaceBounds& workspace) {
  if (dataset.empty()) throw InvalidArgument("train_action_head: empty dataset");
  if (mode == TrainMode::EndToEnd && encoder.pretrained)
    throw InvalidArgument(
        "train_action_head: end-to-end mode requires a randomly initialized "
        "encoder");

  ActionModel model;
  model.encoder = encoder;
  model.bounds = bounds;
  model.workspace = workspace;
  ActionHeadConfig head_cfg;
  head_cfg.fused = encoder.cfg.fused_dim();
  Rng rng = Rng(hyper.seed).substream("action-train");
  model.head = ActionHeadParams::random_init(head_cfg, rng.next_u64());

  const bool update_encoder = mode != TrainMode::Frozen;

  Eigen::VectorXd vel_head = Eigen::VectorXd::Zero(model.head.param_count());
  Eigen::VectorXd vel_enc;
  if (update_encoder)
    vel_enc = Eigen::VectorXd::Zero(model.encoder.param_count());

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(hyper.batch)) {
      std::size_t end = std::min(order.size(),
                                 start + static_cast<std::size_t>(hyper.batch));
      ActionHeadGrad hgrad = ActionHeadGrad::zero(head_cfg);
      EncoderGrad egrad = EncoderGrad::zero(model.encoder.cfg);
      for (std::size_t idx = start; idx < end; ++idx) {
        const auto& tup = dataset[order[idx]];
        ForwardPass fp = model_forward(model.encoder, model.head, workspace,
                                       tup.state, tup.next, true);
        Eigen::VectorXd target(5);
        for (int d = 0; d < 5; ++d) target(d) = tup.action_norm[d];
        Eigen::VectorXd d_out = 2.0 / 5.0 * (fp.out - target);
        Eigen::MatrixXd d_fs, d_fg;
        action_head_backward(model.head, fp.head, d_out, hgrad,
                             update_encoder ? &d_fs : nullptr,
                             update_encoder ? &d_fg : nullptr);
        if (update_encoder) {
          Eigen::MatrixXd d_reg;
          Eigen::RowVectorXd d_glob;
          split_fused_grad(d_fs, model.encoder.cfg.h2, d_reg, d_glob);
          encode_backward(model.encoder, fp.enc_state, d_reg, d_glob, egrad);
          split_fused_grad(d_fg, model.encoder.cfg.h2, d_reg, d_glob);
          encode_backward(model.encoder, fp.enc_goal, d_reg, d_glob, egrad);
        }
      }
      double inv = 1.0 / static_cast<double>(end - start);
      hgrad.scale(inv);
      vel_head = hyper.momentum * vel_head - hyper.lr * hgrad.pack();
      model.head.unpack(model.head.pack() + vel_head);
      if (update_encoder) {
        egrad.scale(inv);
        vel_enc = hyper.momentum * vel_enc - hyper.lr * egrad.pack();
        model.encoder.unpack(model.encoder.pack() + vel_enc);
      }
    }
  }
  return model;
}

std::array<double, 5> predict_action_normalized(const ActionModel& model,
                                                const Cluster& state,
                                                const Cluster& goal) {
  if (state.points.empty() || goal.points.empty())
    throw InvalidArgument("predict_action: empty cluster");
  ForwardPass fp = model_forward(model.encoder, model.head, model.workspace,
                                 state, goal, false);
  std::array<double, 5> out;
  for (int d = 0; d < 5; ++d) out[d] = fp.out(d);
  return out;
}

GraspAction predict_action(const ActionModel& model, const Cluster& state,
                           const Cluster& goal) {
  auto n = predict_action_normalized(model, state, goal);
  for (double& v : n) v = std::clamp(v, -1.0, 1.0);
  return model.bounds.denormalize(n);
}

RetrievalIndex build_retrieval_index(const std::vector<ActionTuple>& train_set,
                                     const EncoderParams& encoder,
                                     const WorkspaceBounds& workspace) {
  RetrievalIndex index;
  for (const auto& tup : train_set) {
    index.embeddings.push_back(
        pair_embedding(encoder, normalize_cluster(tup.state, workspace),
                       normalize_cluster(tup.next, workspace)));
    index.actions.push_back(tup.action_norm);
  }
  return index;
}

std::array<double, 5> baseline_nn_greedy(const RetrievalIndex& index,
                                         const EncoderParams& encoder,
                                         const WorkspaceBounds& workspace,
                                         const Cluster& state,
                                         const Cluster& goal) {
  if (index.embeddings.empty())
    throw InvalidState("nn_greedy: empty training set");
  Eigen::VectorXd query =
      pair_embedding(encoder, normalize_cluster(state, workspace),
                     normalize_cluster(goal, workspace));
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < index.embeddings.size(); ++i) {
    double d = (index.embeddings[i] - query).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return index.actions[best];
}

std::array<double, 5> baseline_vinn(const RetrievalIndex& index,
                                    const EncoderParams& encoder,
                                    const WorkspaceBounds& workspace,
                                    const Cluster& state, const Cluster& goal,
                                    int k) {
  if (index.embeddings.empty()) throw InvalidState("vinn: empty training set");
  if (k < 1) throw InvalidArgument("vinn: k must be >= 1");
  Eigen::VectorXd query =
      pair_embedding(encoder, normalize_cluster(state, workspace),
                     normalize_cluster(goal, workspace));

  std::vector<std::pair<double, std::size_t>> dists;
  for (std::size_t i = 0; i < index.embeddings.size(); ++i)
    dists.emplace_back((index.embeddings[i] - query).norm(), i);
  std::size_t kk = std::min<std::size_t>(k, dists.size());
  std::partial_sort(dists.begin(), dists.begin() + kk, dists.end());

  // weights proportional to exp(-dist), normalized to sum 1
  double wsum = 0.0;
  std::array<double, 5> out{};
  std::vector<double> w(kk);
  for (std::size_t i = 0; i < kk; ++i) {
    w[i] = std::exp(-(dists[i].first - dists[0].first));
    wsum += w[i];
  }
  for (std::size_t i = 0; i < kk; ++i) {
    const auto& a = index.actions[dists[i].second];
    for (int d = 0; d < 5; ++d) out[d] += w[i] / wsum * a[d];
  }
  return out;
}

GraspAction baseline_random(const ActionBounds& bounds, Rng& rng) {
  std::array<double, 5> v;
  for (int d = 0; d < 5; ++d) v[d] = rng.uniform(bounds.lo[d], bounds.hi[d]);
  return GraspAction::from_array(v);
}

double action_mse(const std::array<double, 5>& a, const std::array<double, 5>& b) {
  double s = 0.0;
  for (int d = 0; d < 5; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s / 5.0;
}

}  // namespace sculpt
