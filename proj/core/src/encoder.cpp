#include "sculpt/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sculpt/errors.hpp"
#include "sculpt/rng.hpp"

namespace sculpt {

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  // scaled uniform init, fan-in based
  double bound = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

}  // namespace

EncoderParams EncoderParams::random_init(const EncoderConfig& cfg,
                                         std::uint64_t seed) {
  Rng rng = Rng(seed).substream("encoder-init");
  EncoderParams p;
  p.cfg = cfg;
  p.w1 = random_matrix(cfg.in_dim, cfg.h1, rng);
  p.b1 = Eigen::VectorXd::Zero(cfg.h1);
  p.w2 = random_matrix(cfg.h1, cfg.h2, rng);
  p.b2 = Eigen::VectorXd::Zero(cfg.h2);
  // feature transform starts near identity
  p.transform = Eigen::MatrixXd::Identity(cfg.h2, cfg.h2) +
                0.01 * random_matrix(cfg.h2, cfg.h2, rng);
  p.w3 = random_matrix(cfg.h2, cfg.g1, rng);
  p.b3 = Eigen::VectorXd::Zero(cfg.g1);
  p.w4 = random_matrix(cfg.g1, cfg.g2, rng);
  p.b4 = Eigen::VectorXd::Zero(cfg.g2);
  return p;
}

std::size_t EncoderParams::param_count() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + transform.size() +
         w3.size() + b3.size() + w4.size() + b4.size();
}

namespace {

void append(Eigen::VectorXd& out, Eigen::Index& pos, const Eigen::MatrixXd& m) {
  out.segment(pos, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
  pos += m.size();
}

void take(const Eigen::VectorXd& in, Eigen::Index& pos, Eigen::MatrixXd& m) {
  Eigen::Map<const Eigen::VectorXd> seg(in.data() + pos, m.size());
  m = Eigen::Map<const Eigen::MatrixXd>(seg.data(), m.rows(), m.cols());
  pos += m.size();
}

void take(const Eigen::VectorXd& in, Eigen::Index& pos, Eigen::VectorXd& v) {
  v = in.segment(pos, v.size());
  pos += v.size();
}

void append(Eigen::VectorXd& out, Eigen::Index& pos, const Eigen::VectorXd& v) {
  out.segment(pos, v.size()) = v;
  pos += v.size();
}

}  // namespace

Eigen::VectorXd EncoderParams::pack() const {
  Eigen::VectorXd out(param_count());
  Eigen::Index pos = 0;
  append(out, pos, w1);
  append(out, pos, b1);
  append(out, pos, w2);
  append(out, pos, b2);
  append(out, pos, transform);
  append(out, pos, w3);
  append(out, pos, b3);
  append(out, pos, w4);
  append(out, pos, b4);
  return out;
}

void EncoderParams::unpack(const Eigen::VectorXd& flat) {
  Eigen::Index pos = 0;
  take(flat, pos, w1);
  take(flat, pos, b1);
  take(flat, pos, w2);
  take(flat, pos, b2);
  take(flat, pos, transform);
  take(flat, pos, w3);
  take(flat, pos, b3);
  take(flat, pos, w4);
  take(flat, pos, b4);
}

EncoderGrad EncoderGrad::zero(const EncoderConfig& cfg) {
  EncoderGrad g;
  g.w1 = Eigen::MatrixXd::Zero(cfg.in_dim, cfg.h1);
  g.b1 = Eigen::VectorXd::Zero(cfg.h1);
  g.w2 = Eigen::MatrixXd::Zero(cfg.h1, cfg.h2);
  g.b2 = Eigen::VectorXd::Zero(cfg.h2);
  g.transform = Eigen::MatrixXd::Zero(cfg.h2, cfg.h2);
  g.w3 = Eigen::MatrixXd::Zero(cfg.h2, cfg.g1);
  g.b3 = Eigen::VectorXd::Zero(cfg.g1);
  g.w4 = Eigen::MatrixXd::Zero(cfg.g1, cfg.g2);
  g.b4 = Eigen::VectorXd::Zero(cfg.g2);
  return g;
}

Eigen::VectorXd EncoderGrad::pack() const {
  Eigen::VectorXd out(w1.size() + b1.size() + w2.size() + b2.size() +
                      transform.size() + w3.size() + b3.size() + w4.size() +
                      b4.size());
  Eigen::Index pos = 0;
  append(out, pos, w1);
  append(out, pos, b1);
  append(out, pos, w2);
  append(out, pos, b2);
  append(out, pos, transform);
  append(out, pos, w3);
  append(out, pos, b3);
  append(out, pos, w4);
  append(out, pos, b4);
  return out;
}

void EncoderGrad::scale(double s) {
  w1 *= s; b1 *= s; w2 *= s; b2 *= s; transform *= s;
  w3 *= s; b3 *= s; w4 *= s; b4 *= s;
}

LatentEmbedding encode(const Cluster& cluster, const EncoderParams& params,
                       EncoderCache* cache) {
  const auto& cfg = params.cfg;
  const Eigen::Index n = static_cast<Eigen::Index>(cluster.points.size());
  if (n < 1) throw InvalidArgument("encode: empty cluster");

  Eigen::MatrixXd x(n, cfg.in_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = cluster.points.points[i];
    x(i, 0) = p.x;
    x(i, 1) = p.y;
    x(i, 2) = p.z;
  }

  Eigen::MatrixXd h1 = relu((x * params.w1).rowwise() + params.b1.transpose());
  Eigen::MatrixXd h2 = relu((h1 * params.w2).rowwise() + params.b2.transpose());
  Eigen::MatrixXd regional = h2 * params.transform;
  Eigen::MatrixXd g1 =
      relu((regional * params.w3).rowwise() + params.b3.transpose());
  Eigen::MatrixXd g2 = (g1 * params.w4).rowwise() + params.b4.transpose();

  Eigen::RowVectorXd global(cfg.g2);
  std::vector<Eigen::Index> argmax(cfg.g2);
  for (int j = 0; j < cfg.g2; ++j) {
    Eigen::Index row;
    global(j) = g2.col(j).maxCoeff(&row);
    argmax[j] = row;
  }

  LatentEmbedding out;
  out.regional = regional;
  out.global = global;
  out.fused.resize(n, cfg.fused_dim());
  out.fused.leftCols(cfg.h2) = regional;
  out.fused.rightCols(cfg.g2) = global.replicate(n, 1);

  if (cache) {
    cache->x = std::move(x);
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->regional = out.regional;
    cache->g1 = std::move(g1);
    cache->g2 = std::move(g2);
    cache->global = out.global;
    cache->argmax = std::move(argmax);
  }
  return out;
}

void encode_backward(const EncoderParams& params, const EncoderCache& cache,
                     const Eigen::MatrixXd& d_regional,
                     const Eigen::RowVectorXd& d_global, EncoderGrad& grad) {
  const auto& cfg = params.cfg;
  const Eigen::Index n = cache.x.rows();

  // max-pool: gradient flows to the argmax row of each channel
  Eigen::MatrixXd d_g2 = Eigen::MatrixXd::Zero(n, cfg.g2);
  for (int j = 0; j < cfg.g2; ++j) d_g2(cache.argmax[j], j) += d_global(j);

  grad.w4 += cache.g1.transpose() * d_g2;
  grad.b4 += d_g2.colwise().sum().transpose();
  Eigen::MatrixXd d_g1 = (d_g2 * params.w4.transpose())
                             .cwiseProduct((cache.g1.array() > 0.0).cast<double>().matrix());

  grad.w3 += cache.regional.transpose() * d_g1;
  grad.b3 += d_g1.colwise().sum().transpose();
  Eigen::MatrixXd d_reg_total = d_regional + d_g1 * params.w3.transpose();

  grad.transform += cache.h2.transpose() * d_reg_total;
  Eigen::MatrixXd d_h2 = (d_reg_total * params.transform.transpose())
                             .cwiseProduct((cache.h2.array() > 0.0).cast<double>().matrix());

  grad.w2 += cache.h1.transpose() * d_h2;
  grad.b2 += d_h2.colwise().sum().transpose();
  Eigen::MatrixXd d_h1 = (d_h2 * params.w2.transpose())
                             .cwiseProduct((cache.h1.array() > 0.0).cast<double>().matrix());

  grad.w1 += cache.x.transpose() * d_h1;
  grad.b1 += d_h1.colwise().sum().transpose();
}

void split_fused_grad(const Eigen::MatrixXd& d_fused, int h2,
                      Eigen::MatrixXd& d_regional, Eigen::RowVectorXd& d_global) {
  d_regional = d_fused.leftCols(h2);
  d_global = d_fused.rightCols(d_fused.cols() - h2).colwise().sum();
}

Eigen::VectorXd pair_embedding(const EncoderParams& params, const Cluster& state,
                               const Cluster& goal) {
  LatentEmbedding es = encode(state, params);
  LatentEmbedding eg = encode(goal, params);
  const int f = params.cfg.fused_dim();
  Eigen::VectorXd out(2 * f);
  out.head(f) = es.fused.colwise().mean().transpose();
  out.tail(f) = eg.fused.colwise().mean().transpose();
  return out;
}

double pretrain_example_loss(const EncoderParams& params, const RegressionHead& head,
                             const TrainingPair& pair, EncoderGrad* grad,
                             Eigen::VectorXd* d_head_w, double* d_head_b) {
  const int f = params.cfg.fused_dim();
  EncoderCache cs, cg;
  LatentEmbedding es = encode(pair.state, params, &cs);
  LatentEmbedding eg = encode(pair.next, params, &cg);

  Eigen::VectorXd feat(2 * f);
  feat.head(f) = es.fused.colwise().mean().transpose();
  feat.tail(f) = eg.fused.colwise().mean().transpose();

  double pred = head.w.dot(feat) + head.b;
  double err = pred - pair.target;
  double loss = err * err;
  if (!grad) return loss;

  double d_pred = 2.0 * err;
  if (d_head_w) *d_head_w += d_pred * feat;
  if (d_head_b) *d_head_b += d_pred;

  Eigen::VectorXd d_feat = d_pred * head.w;
  auto backprop_side = [&](const EncoderCache& cache, const Eigen::MatrixXd& fused,
                           const Eigen::VectorXd& d_mean) {
    const Eigen::Index n = fused.rows();
    Eigen::MatrixXd d_fused =
        (1.0 / static_cast<double>(n)) * d_mean.transpose().replicate(n, 1);
    Eigen::MatrixXd d_regional;
    Eigen::RowVectorXd d_global;
    split_fused_grad(d_fused, params.cfg.h2, d_regional, d_global);
    encode_backward(params, cache, d_regional, d_global, *grad);
  };
  backprop_side(cs, es.fused, d_feat.head(f));
  backprop_side(cg, eg.fused, d_feat.tail(f));
  return loss;
}

PretrainResult pretrain_encoder(const std::vector<TrainingPair>& dataset,
                                const EncoderConfig& cfg, const TrainHyper& hyper) {
  if (dataset.empty()) throw InvalidArgument("pretrain_encoder: empty dataset");

  Rng rng = Rng(hyper.seed).substream("pretrain");
  EncoderParams params = EncoderParams::random_init(cfg, rng.next_u64());
  RegressionHead head;
  head.w = Eigen::VectorXd::Zero(2 * cfg.fused_dim());
  head.b = 0.0;

  // held-out split from the tail of a seeded shuffle
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);
  std::size_t holdout =
      std::max<std::size_t>(1, static_cast<std::size_t>(dataset.size() *
                                                        hyper.holdout_fraction));
  if (holdout >= dataset.size()) holdout = dataset.size() > 1 ? 1 : 0;
  std::vector<std::size_t> train(order.begin(), order.end() - holdout);
  std::vector<std::size_t> held(order.end() - holdout, order.end());

  auto holdout_loss = [&]() {
    if (held.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i : held)
      sum += pretrain_example_loss(params, head, dataset[i], nullptr, nullptr,
                                   nullptr);
    return sum / held.size();
  };

  PretrainResult result;
  result.initial_holdout_loss = holdout_loss();

  Eigen::VectorXd vel = Eigen::VectorXd::Zero(params.param_count());
  Eigen::VectorXd vel_hw = Eigen::VectorXd::Zero(head.w.size());
  double vel_hb = 0.0;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = train.size(); i > 1; --i)
      std::swap(train[i - 1], train[rng.next_below(i)]);
    for (std::size_t start = 0; start < train.size();
         start += static_cast<std::size_t>(hyper.batch)) {
      std::size_t end = std::min(train.size(),
                                 start + static_cast<std::size_t>(hyper.batch));
      EncoderGrad grad = EncoderGrad::zero(cfg);
      Eigen::VectorXd ghw = Eigen::VectorXd::Zero(head.w.size());
      double ghb = 0.0;
      for (std::size_t idx = start; idx < end; ++idx)
        pretrain_example_loss(params, head, dataset[train[idx]], &grad, &ghw, &ghb);
      double inv = 1.0 / static_cast<double>(end - start);
      grad.scale(inv);
      ghw *= inv;
      ghb *= inv;

      vel = hyper.momentum * vel - hyper.lr * grad.pack();
      Eigen::VectorXd flat = params.pack() + vel;
      params.unpack(flat);
      vel_hw = hyper.momentum * vel_hw - hyper.lr * ghw;
      head.w += vel_hw;
      vel_hb = hyper.momentum * vel_hb - hyper.lr * ghb;
      head.b += vel_hb;
    }
  }

  result.final_holdout_loss = holdout_loss();
  params.pretrained = true;
  result.encoder = std::move(params);
  return result;
}

}  // namespace sculpt
