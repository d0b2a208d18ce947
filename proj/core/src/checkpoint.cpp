#include "sculpt/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "sculpt/errors.hpp"

namespace sculpt {

namespace {

nlohmann::json tensor_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["shape"] = {m.rows(), m.cols()};
  std::vector<double> data(m.data(), m.data() + m.size());
  j["data"] = std::move(data);
  return j;
}

nlohmann::json tensor_json(const Eigen::VectorXd& v) {
  nlohmann::json j;
  j["shape"] = {v.size()};
  std::vector<double> data(v.data(), v.data() + v.size());
  j["data"] = std::move(data);
  return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  auto shape = j.at("shape");
  if (shape.size() != 2) throw InvalidState("checkpoint: expected rank-2 tensor");
  Eigen::MatrixXd m(shape[0].get<Eigen::Index>(), shape[1].get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.size())
    throw InvalidState("checkpoint: tensor size mismatch");
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = data[i].get<double>();
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  auto shape = j.at("shape");
  if (shape.size() != 1) throw InvalidState("checkpoint: expected rank-1 tensor");
  Eigen::VectorXd v(shape[0].get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != v.size())
    throw InvalidState("checkpoint: tensor size mismatch");
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = data[i].get<double>();
  return v;
}

nlohmann::json encoder_json(const EncoderParams& p) {
  nlohmann::json j;
  j["config"] = {{"in_dim", p.cfg.in_dim}, {"h1", p.cfg.h1},   {"h2", p.cfg.h2},
                 {"g1", p.cfg.g1},         {"g2", p.cfg.g2}};
  j["pretrained"] = p.pretrained;
  j["w1"] = tensor_json(p.w1);
  j["b1"] = tensor_json(p.b1);
  j["w2"] = tensor_json(p.w2);
  j["b2"] = tensor_json(p.b2);
  j["transform"] = tensor_json(p.transform);
  j["w3"] = tensor_json(p.w3);
  j["b3"] = tensor_json(p.b3);
  j["w4"] = tensor_json(p.w4);
  j["b4"] = tensor_json(p.b4);
  return j;
}

EncoderParams encoder_from_json(const nlohmann::json& j) {
  EncoderParams p;
  const auto& c = j.at("config");
  p.cfg = {c.at("in_dim").get<int>(), c.at("h1").get<int>(), c.at("h2").get<int>(),
           c.at("g1").get<int>(), c.at("g2").get<int>()};
  p.pretrained = j.at("pretrained").get<bool>();
  p.w1 = matrix_from_json(j.at("w1"));
  p.b1 = vector_from_json(j.at("b1"));
  p.w2 = matrix_from_json(j.at("w2"));
  p.b2 = vector_from_json(j.at("b2"));
  p.transform = matrix_from_json(j.at("transform"));
  p.w3 = matrix_from_json(j.at("w3"));
  p.b3 = vector_from_json(j.at("b3"));
  p.w4 = matrix_from_json(j.at("w4"));
  p.b4 = vector_from_json(j.at("b4"));
  return p;
}

void write_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidState("checkpoint: cannot open " + path.string());
  out << j.dump();
}

nlohmann::json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidState("checkpoint: cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  if (j.at("format_version").get<int>() != kCheckpointFormatVersion)
    throw InvalidState("checkpoint: unsupported format version");
  return j;
}

}  // namespace

void save_encoder(const EncoderParams& params, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["kind"] = "encoder";
  j["encoder"] = encoder_json(params);
  write_file(j, path);
}

EncoderParams load_encoder(const std::filesystem::path& path) {
  auto j = read_file(path);
  return encoder_from_json(j.at("encoder"));
}

void save_action_model(const ActionModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["kind"] = "action_model";
  j["encoder"] = encoder_json(model.encoder);
  const auto& h = model.head;
  j["head"]["config"] = {{"fused", h.cfg.fused},
                         {"attn", h.cfg.attn},
                         {"latent", h.cfg.latent},
                         {"mlp", h.cfg.mlp},
                         {"out", h.cfg.out}};
  j["head"]["wq"] = tensor_json(h.wq);
  j["head"]["wk"] = tensor_json(h.wk);
  j["head"]["wv"] = tensor_json(h.wv);
  j["head"]["wd"] = tensor_json(h.wd);
  j["head"]["bd"] = tensor_json(h.bd);
  j["head"]["w5"] = tensor_json(h.w5);
  j["head"]["b5"] = tensor_json(h.b5);
  j["head"]["w6"] = tensor_json(h.w6);
  j["head"]["b6"] = tensor_json(h.b6);
  j["bounds"]["lo"] = model.bounds.lo;
  j["bounds"]["hi"] = model.bounds.hi;
  j["workspace"]["min"] = {model.workspace.min.x, model.workspace.min.y,
                           model.workspace.min.z};
  j["workspace"]["max"] = {model.workspace.max.x, model.workspace.max.y,
                           model.workspace.max.z};
  write_file(j, path);
}

ActionModel load_action_model(const std::filesystem::path& path) {
  auto j = read_file(path);
  ActionModel m;
  m.encoder = encoder_from_json(j.at("encoder"));
  const auto& jh = j.at("head");
  const auto& c = jh.at("config");
  m.head.cfg = {c.at("fused").get<int>(), c.at("attn").get<int>(),
                c.at("latent").get<int>(), c.at("mlp").get<int>(),
                c.at("out").get<int>()};
  m.head.wq = matrix_from_json(jh.at("wq"));
  m.head.wk = matrix_from_json(jh.at("wk"));
  m.head.wv = matrix_from_json(jh.at("wv"));
  m.head.wd = matrix_from_json(jh.at("wd"));
  m.head.bd = vector_from_json(jh.at("bd"));
  m.head.w5 = matrix_from_json(jh.at("w5"));
  m.head.b5 = vector_from_json(jh.at("b5"));
  m.head.w6 = matrix_from_json(jh.at("w6"));
  m.head.b6 = vector_from_json(jh.at("b6"));
  for (int d = 0; d < 5; ++d) {
    m.bounds.lo[d] = j.at("bounds").at("lo").at(d).get<double>();
    m.bounds.hi[d] = j.at("bounds").at("hi").at(d).get<double>();
  }
  m.workspace = WorkspaceBounds(
      {j.at("workspace").at("min").at(0).get<double>(),
       j.at("workspace").at("min").at(1).get<double>(),
       j.at("workspace").at("min").at(2).get<double>()},
      {j.at("workspace").at("max").at(0).get<double>(),
       j.at("workspace").at("max").at(1).get<double>(),
       j.at("workspace").at("max").at(2).get<double>()});
  return m;
}

}  // namespace sculpt
