#include "sculpt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sculpt/checkpoint.hpp"
#include "sculpt/cluster.hpp"
#include "sculpt/errors.hpp"
#include "sculpt/llm_client.hpp"
#include "sculpt/ply_io.hpp"

namespace sculpt {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("run config: expected boolean for " + key + ", got " + v);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidArgument("run config: expected number for " + key + ", got " + v);
  }
}

long long parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw InvalidArgument("run config: expected integer for " + key + ", got " + v);
  }
}

}  // namespace

void RunConfig::validate() const {
  if (prompt.empty()) throw InvalidArgument("run config: prompt is empty");
  if (planner_backend != "template" && planner_backend != "llm")
    throw InvalidArgument("run config: unknown planner backend " + planner_backend);
  if (subgoal_backend != "heuristic" && subgoal_backend != "llm")
    throw InvalidArgument("run config: unknown sub-goal backend " + subgoal_backend);
  if (action_backend != "greedy" && action_backend != "model")
    throw InvalidArgument("run config: unknown action backend " + action_backend);
  if (action_backend == "model") {
    if (action_checkpoint.empty())
      throw InvalidArgument("run config: action backend 'model' needs a checkpoint");
    if (!std::filesystem::exists(action_checkpoint))
      throw InvalidArgument("run config: checkpoint not found: " +
                            action_checkpoint.string());
  }
  if (offline && (planner_backend == "llm" || subgoal_backend == "llm"))
    throw InvalidArgument("run config: llm backend selected in offline mode");
  if (max_rounds < 0) throw InvalidArgument("run config: max_rounds must be >= 0");
  if (max_plan_iters <= 0)
    throw InvalidArgument("run config: max_plan_iters must be positive");
  if (cluster_count <= 0 || cluster_points <= 0)
    throw InvalidArgument("run config: cluster sizes must be positive");
  if (noise_sigma < 0.0)
    throw InvalidArgument("run config: noise_sigma must be >= 0");
}

void set_run_config_field(RunConfig& config, const std::string& key,
                          const std::string& value) {
  if (key == "prompt") config.prompt = value;
  else if (key == "planner_backend") config.planner_backend = value;
  else if (key == "subgoal_backend") config.subgoal_backend = value;
  else if (key == "action_backend") config.action_backend = value;
  else if (key == "action_checkpoint") config.action_checkpoint = value;
  else if (key == "out_dir") config.out_dir = value;
  else if (key == "seed") config.seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "max_rounds") config.max_rounds = static_cast<int>(parse_int(value, key));
  else if (key == "max_plan_iters")
    config.max_plan_iters = static_cast<int>(parse_int(value, key));
  else if (key == "cluster_count")
    config.cluster_count = static_cast<int>(parse_int(value, key));
  else if (key == "cluster_points")
    config.cluster_points = static_cast<int>(parse_int(value, key));
  else if (key == "noise_sigma") config.noise_sigma = parse_double(value, key);
  else if (key == "offline") config.offline = parse_bool(value, key);
  else if (key == "llm_endpoint") config.llm.endpoint = value;
  else if (key == "llm_model") config.llm.model = value;
  else if (key == "llm_api_key_env") config.llm.api_key_env = value;
  else throw InvalidArgument("run config: unknown key " + key);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("run config: cannot open " + path.string());
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("run config: line " + std::to_string(line_no) +
                            " is not 'key = value'");
    set_run_config_field(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

namespace {

nlohmann::ordered_json point_json(const Point3& p) {
  return nlohmann::ordered_json::array({p.x, p.y, p.z});
}

nlohmann::ordered_json step_json(const StepRecord& s) {
  nlohmann::ordered_json j;
  j["index"] = s.index;
  j["kind"] = s.kind;
  if (s.cell) j["cell"] = {s.cell->i, s.cell->j, s.cell->k};
  if (s.action) j["action"] = s.action->as_array();
  if (s.subgoal) {
    j["subgoal"] = {{"kind", to_string(s.subgoal->kind)},
                    {"cluster", s.subgoal->cluster_id},
                    {"direction", point_json(s.subgoal->direction)},
                    {"weight", s.subgoal->weight}};
  }
  if (!s.note.empty()) j["note"] = s.note;
  if (s.kind != "skip") {
    j["chamfer_to_template"] = s.chamfer_to_template;
    j["cloud_ply"] = s.cloud_ply;
  }
  return j;
}

}  // namespace

std::string episode_report_json(const EpisodeReport& report) {
  nlohmann::ordered_json j;
  j["prompt"] = report.prompt;
  j["seed"] = report.seed;
  j["success"] = report.success;
  if (!report.success) {
    j["error"] = {{"kind", report.error_kind}, {"message", report.error_message}};
  }
  j["plan_length"] = report.plan_length;
  j["refinement_rounds"] = report.refinement_rounds;
  j["initial_chamfer"] = report.initial_chamfer;
  j["final_chamfer"] = report.final_chamfer;
  j["final"] = {{"cd", report.final_distances.cd},
                {"emd", report.final_distances.emd},
                {"hd", report.final_distances.hd}};
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : report.steps) j["steps"].push_back(step_json(s));
  j["runtime_seconds"] = report.runtime_seconds;
  return j.dump(2);
}

namespace {

PointCloud stride_sample(const PointCloud& cloud, std::size_t target) {
  if (cloud.size() <= target) return cloud;
  PointCloud out;
  std::size_t stride = (cloud.size() + target - 1) / target;
  for (std::size_t i = 0; i < cloud.size(); i += stride)
    out.points.push_back(cloud.points[i]);
  return out;
}

void write_jsonl_line(std::ofstream& out, const nlohmann::ordered_json& j) {
  out << j.dump() << "\n";
}

struct EpisodeContext {
  const RunConfig& config;
  EpisodeReport& report;
  std::filesystem::path out_dir;
  int step_index = 0;

  std::string snapshot(const PointCloud& cloud) {
    char name[32];
    std::snprintf(name, sizeof(name), "step_%04d.ply", step_index);
    write_ply(cloud, out_dir / name);
    return name;
  }
};

void run_episode_impl(const RunConfig& config, const PipelineBackends* backends,
                      EpisodeReport& report) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);
  Rng root(config.seed);
  ShapePrompt prompt{config.prompt};

  ProposerSuite suite;
  if (backends && backends->planner) {
    suite = *backends->planner;
  } else if (config.planner_backend == "template") {
    suite = template_backend(prompt);
  } else {
    suite = llm_backend(config.llm, http_chat_transport(config.llm));
  }

  SubGoalBackend subgoal_backend;
  if (backends && backends->subgoal) {
    subgoal_backend = *backends->subgoal;
  } else if (config.subgoal_backend == "heuristic") {
    subgoal_backend =
        heuristic_subgoal_backend(root.substream("subgoal").next_u64());
  } else {
    subgoal_backend = llm_subgoal_backend(config.llm, http_chat_transport(config.llm));
  }

  std::optional<ActionModel> model;
  if (config.action_backend == "model")
    model = load_action_model(config.action_checkpoint);

  AuditLog audit;
  PlacementPlan placement = plan(prompt, suite, config.max_plan_iters, &audit);
  report.plan_length = static_cast<int>(placement.placements.size());

  OccupancyGrid grid;
  for (const auto& pl : placement.placements) grid.set(pl.cell, true);
  {
    std::ofstream out(config.out_dir / "plan.json");
    out << plan_to_json(placement, grid);
    std::ofstream alog(config.out_dir / "planner_audit.jsonl");
    alog << audit.to_jsonl();
  }

  PointCloud reference = grid_sample_cloud(grid);

  EpisodeContext ctx{config, report, config.out_dir};
  ClayBody body;
  OccupancyGrid placed;
  Rng place_rng = root.substream("place");
  for (const auto& pl : placement.placements) {
    body = place_chunk(body, placed, pl, config.sim,
                       place_rng.substream(ctx.step_index).next_u64());
    placed.set(pl.cell, true);
    StepRecord s;
    s.index = ctx.step_index;
    s.kind = "place";
    s.cell = pl.cell;
    s.chamfer_to_template = chamfer(body.particles, reference);
    s.cloud_ply = ctx.snapshot(body.particles);
    report.steps.push_back(std::move(s));
    ++ctx.step_index;
  }
  report.initial_chamfer = chamfer(body.particles, reference);

  std::ofstream subgoal_log(config.out_dir / "subgoal_audit.jsonl");
  for (int round = 0; round < config.max_rounds; ++round) {
    Rng round_rng = root.substream("round").substream(round);
    PointCloud obs =
        observe(body, config.noise_sigma, round_rng.substream("observe").next_u64());
    PointCloud cropped = crop(obs, config.workspace);
    ClusteredCloud perceived =
        perceive(cropped, config.cluster_count, config.cluster_points,
                 round_rng.substream("perceive").next_u64());

    std::string audit_str;
    std::optional<SubGoal> sub =
        propose_subgoal(perceived, prompt, subgoal_backend, &audit_str);
    nlohmann::ordered_json jl;
    jl["round"] = round;
    jl["proposed"] = sub.has_value();
    jl["audit"] = audit_str;
    write_jsonl_line(subgoal_log, jl);

    ++report.refinement_rounds;
    if (!sub) {
      StepRecord s;
      s.index = ctx.step_index++;
      s.kind = "skip";
      s.note = "sub-goal backend declined";
      report.steps.push_back(std::move(s));
      continue;
    }

    std::optional<GraspAction> action;
    if (model) {
      const Cluster& state = perceived.clusters.at(sub->modification.cluster_id);
      action = predict_action(*model, state, sub->target_cluster);
    } else {
      action = greedy_grasp(body, perceived, *sub, config.sim, config.bounds);
    }
    if (!action) {
      StepRecord s;
      s.index = ctx.step_index++;
      s.kind = "skip";
      s.subgoal = sub->modification;
      s.note = "no improving grasp candidate";
      report.steps.push_back(std::move(s));
      continue;
    }

    body = apply_grasp(body, *action, config.sim);
    StepRecord s;
    s.index = ctx.step_index;
    s.kind = "grasp";
    s.action = *action;
    s.subgoal = sub->modification;
    s.chamfer_to_template = chamfer(body.particles, reference);
    s.cloud_ply = ctx.snapshot(body.particles);
    report.steps.push_back(std::move(s));
    ++ctx.step_index;
  }

  report.final_chamfer = chamfer(body.particles, reference);
  report.final_distances = distance_report_equalized(
      body.particles, reference, 256, root.substream("final-emd").next_u64());
  report.success = true;
}

}  // namespace

EpisodeReport run_episode(const RunConfig& config, const PipelineBackends* backends) {
  EpisodeReport report;
  report.prompt = config.prompt;
  report.seed = config.seed;
  auto t0 = std::chrono::steady_clock::now();
  try {
    run_episode_impl(config, backends, report);
  } catch (const UnknownShape& e) {
    report.error_kind = "unknown-shape";
    report.error_message = e.what();
  } catch (const PlanningFailure& e) {
    report.error_kind = "planning-failure";
    report.error_message = e.what();
  } catch (const TransportError& e) {
    report.error_kind = "transport";
    report.error_message = e.what();
  } catch (const InvalidArgument& e) {
    report.error_kind = "invalid-config";
    report.error_message = e.what();
  } catch (const std::exception& e) {
    report.error_kind = "internal";
    report.error_message = e.what();
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (!ec) {
    report.report_path = config.out_dir / "report.json";
    std::ofstream out(report.report_path);
    out << episode_report_json(report) << "\n";
  }
  return report;
}

std::optional<GraspAction> greedy_grasp(const ClayBody& body,
                                        const ClusteredCloud& perceived,
                                        const SubGoal& goal, const SimConfig& sim,
                                        const ActionBounds& bounds) {
  const int target_id = goal.modification.cluster_id;
  const Cluster* state = nullptr;
  for (const auto& c : perceived.clusters)
    if (c.id == target_id) state = &c;
  if (!state)
    throw InvalidArgument("greedy_grasp: sub-goal names an unknown cluster");

  PointCloud desired;
  for (const auto& c : perceived.clusters) {
    const PointCloud& src = c.id == target_id ? goal.target_cluster.points : c.points;
    PointCloud sparse = stride_sample(src, 150);
    desired.points.insert(desired.points.end(), sparse.points.begin(),
                          sparse.points.end());
  }

  auto score = [&](const PointCloud& cloud) {
    return chamfer(stride_sample(cloud, 1500), desired);
  };
  const double current = score(body.particles);

  static constexpr double kRots[] = {-1.2, -0.8, -0.4, 0.0, 0.4, 0.8, 1.2};
  static constexpr double kApertures[] = {0.010, 0.012, 0.013, 0.014,
                                          0.018, 0.026};
  static constexpr double kZOffsets[] = {-0.005, 0.0, 0.005};

  double best = current;
  std::optional<GraspAction> best_action;
  for (double rot : kRots) {
    for (double ap : kApertures) {
      for (double dz : kZOffsets) {
        GraspAction a;
        a.x = std::clamp(state->centroid.x, bounds.lo[0], bounds.hi[0]);
        a.y = std::clamp(state->centroid.y, bounds.lo[1], bounds.hi[1]);
        a.z = std::clamp(state->centroid.z + dz, bounds.lo[2], bounds.hi[2]);
        a.rot_z = std::clamp(rot, bounds.lo[3], bounds.hi[3]);
        a.aperture = std::clamp(ap, bounds.lo[4], bounds.hi[4]);
        ClayBody post = apply_grasp(body, a, sim);
        double s = score(post.particles);
        if (s < best - 1e-12) {
          best = s;
          best_action = a;
        }
      }
    }
  }
  return best_action;
}

DistanceReport distance_report_equalized(const PointCloud& a, const PointCloud& b,
                                         int emd_cap, std::uint64_t seed) {
  if (a.empty() || b.empty())
    throw InvalidArgument("distance_report_equalized: empty cloud");
  DistanceReport r;
  r.cd = chamfer(a, b);
  r.hd = hausdorff(a, b);
  int n = static_cast<int>(std::min({a.size(), b.size(),
                                     static_cast<std::size_t>(emd_cap)}));
  Cluster ca = downsample(Cluster::from_points(0, a), n, seed);
  Cluster cb = downsample(Cluster::from_points(1, b), n, seed + 1);
  r.emd = emd(ca.points, cb.points);
  return r;
}

namespace {

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9e", v);
  return buf;
}

}  // namespace

SuiteResult run_suite(const std::vector<std::string>& prompts, int repeats,
                      const RunConfig& base, const PipelineBackends* backends,
                      bool share_seed) {
  if (repeats <= 0) throw InvalidArgument("run_suite: repeats must be positive");
  if (prompts.empty()) throw InvalidArgument("run_suite: no prompts");
  SuiteResult result;
  Rng root(base.seed);
  for (const auto& prompt : prompts) {
    for (int r = 0; r < repeats; ++r) {
      RunConfig c = base;
      c.prompt = prompt;
      c.seed = share_seed ? base.seed : root.substream(prompt).substream(r).next_u64();
      c.out_dir = base.out_dir / (prompt + "_" + std::to_string(r));
      result.episodes.push_back(run_episode(c, backends));
    }
  }

  std::ostringstream csv;
  csv << "prompt,episodes,cd_mean,cd_std,emd_mean,emd_std,hd_mean,hd_std\n";
  std::size_t idx = 0;
  for (const auto& prompt : prompts) {
    std::vector<DistanceReport> finals;
    for (int r = 0; r < repeats; ++r, ++idx)
      if (result.episodes[idx].success)
        finals.push_back(result.episodes[idx].final_distances);
    SuiteSummaryRow row;
    row.prompt = prompt;
    row.episodes = static_cast<int>(finals.size());
    auto stats = [&](auto get, double& mean, double& sd) {
      if (finals.empty()) return;
      double s = 0.0, s2 = 0.0;
      for (const auto& f : finals) {
        double v = get(f);
        s += v;
        s2 += v * v;
      }
      mean = s / finals.size();
      sd = std::sqrt(std::max(0.0, s2 / finals.size() - mean * mean));
    };
    stats([](const DistanceReport& f) { return f.cd; }, row.cd_mean, row.cd_std);
    stats([](const DistanceReport& f) { return f.emd; }, row.emd_mean, row.emd_std);
    stats([](const DistanceReport& f) { return f.hd; }, row.hd_mean, row.hd_std);
    csv << row.prompt << "," << row.episodes << "," << format_metric(row.cd_mean)
        << "," << format_metric(row.cd_std) << "," << format_metric(row.emd_mean)
        << "," << format_metric(row.emd_std) << "," << format_metric(row.hd_mean)
        << "," << format_metric(row.hd_std) << "\n";
    result.summary.push_back(std::move(row));
  }
  result.csv_text = csv.str();
  std::filesystem::create_directories(base.out_dir);
  result.summary_csv = base.out_dir / "summary.csv";
  std::ofstream out(result.summary_csv);
  out << result.csv_text;
  return result;
}

// ---- evaluation harness ----

namespace {

using Policy =
    std::function<std::array<double, 5>(const Cluster& state, const Cluster& goal)>;

double mean_mse(const Policy& policy, const std::vector<ActionTuple>& set) {
  if (set.empty()) throw InvalidArgument("evaluate: empty MSE split");
  double total = 0.0;
  for (const auto& t : set)
    total += action_mse(policy(t.state, t.next), t.action_norm);
  return total / set.size();
}

ClayBody build_body(const std::string& keyword, const SimConfig& sim, Rng& rng) {
  ShapePrompt prompt{keyword};
  PlacementPlan placement = plan(prompt, template_backend(prompt));
  OccupancyGrid grid;
  ClayBody body;
  for (const auto& pl : placement.placements) {
    body = place_chunk(body, grid, pl, sim, rng.next_u64());
    grid.set(pl.cell, true);
  }
  return body;
}

struct RolloutScenario {
  ClayBody body;
  Cluster state;
  Cluster target;
  std::uint64_t post_seed = 0;
  std::uint64_t emd_seed = 0;
};

Modification random_rollout_modification(int k, Rng& rng) {
  Modification m;
  m.cluster_id = static_cast<int>(rng.next_below(k));
  m.weight = rng.uniform(0.25, 1.0);
  double ang = rng.uniform(0.0, 2.0 * M_PI);
  switch (rng.next_below(4)) {
    case 0:
      m.kind = ModKind::Lengthen;
      m.direction = {std::cos(ang), std::sin(ang), 0.0};
      break;
    case 1:
      m.kind = ModKind::Shorten;
      m.direction = {std::cos(ang), std::sin(ang), 0.0};
      break;
    case 2:
      m.kind = ModKind::Flatten;
      m.direction = {0.0, 0.0, 1.0};
      break;
    default:
      m.kind = ModKind::Thin;
      m.direction = {std::cos(ang), std::sin(ang), 0.0};
      break;
  }
  return m;
}

DistanceReport rollout_policy(const Policy& policy,
                              const std::vector<RolloutScenario>& scenarios,
                              const EvaluationConfig& cfg) {
  DistanceReport acc;
  for (const auto& sc : scenarios) {
    std::array<double, 5> norm = policy(sc.state, sc.target);
    for (double& v : norm) v = std::clamp(v, -1.0, 1.0);
    GraspAction action = cfg.bounds.denormalize(norm);
    ClayBody post = apply_grasp(sc.body, action, cfg.sim);
    ClusteredCloud post_perceived = perceive(post.particles, cfg.cluster_count,
                                             cfg.cluster_points, sc.post_seed);
    const Cluster* nearest = &post_perceived.clusters.front();
    double best = std::numeric_limits<double>::max();
    for (const auto& c : post_perceived.clusters) {
      double d = squared_distance(c.centroid, sc.state.centroid);
      if (d < best) {
        best = d;
        nearest = &c;
      }
    }
    DistanceReport d = distance_report_equalized(nearest->points,
                                                 sc.target.points, 128, sc.emd_seed);
    acc.cd += d.cd;
    acc.emd += d.emd;
    acc.hd += d.hd;
  }
  acc.cd /= scenarios.size();
  acc.emd /= scenarios.size();
  acc.hd /= scenarios.size();
  return acc;
}

}  // namespace

std::string EvaluationTable::to_csv() const {
  std::ostringstream csv;
  csv << "policy,val_mse,test_mse,cd,emd,hd\n";
  for (const auto& r : rows)
    csv << r.name << "," << format_metric(r.val_mse) << ","
        << format_metric(r.test_mse) << "," << format_metric(r.cd) << ","
        << format_metric(r.emd) << "," << format_metric(r.hd) << "\n";
  return csv.str();
}

const EvaluationRow& EvaluationTable::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw InvalidArgument("evaluation table: no row named " + name);
}

EvaluationTable evaluate_models(const std::vector<TrainingPair>& pretrain_pairs,
                                const std::vector<ActionTuple>& train,
                                const std::vector<ActionTuple>& test,
                                const EvaluationConfig& cfg) {
  if (train.size() < 2) throw InvalidArgument("evaluate: train set too small");
  if (test.empty()) throw InvalidArgument("evaluate: empty test set");
  if (cfg.rollouts <= 0 || cfg.rollout_prompts.empty())
    throw InvalidArgument("evaluate: rollout settings invalid");
  Rng root(cfg.seed);

  PretrainResult pre = pretrain_encoder(pretrain_pairs, cfg.encoder, cfg.pretrain_hyper);

  // train/val split of the action tuples
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng = root.substream("val-split");
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[split_rng.next_below(i + 1)]);
  std::size_t val_count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(cfg.val_fraction * train.size())), 1,
      train.size() - 1);
  std::vector<ActionTuple> val_set, fit_set;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < val_count ? val_set : fit_set).push_back(train[order[i]]);

  TrainHyper frozen_hyper = cfg.action_hyper;
  ActionModel frozen = train_action_head(fit_set, pre.encoder, TrainMode::Frozen,
                                         frozen_hyper, cfg.bounds, cfg.workspace);
  TrainHyper unfrozen_hyper = cfg.action_hyper;
  unfrozen_hyper.seed = cfg.action_hyper.seed + 1;
  ActionModel unfrozen = train_action_head(fit_set, pre.encoder, TrainMode::Unfrozen,
                                           unfrozen_hyper, cfg.bounds, cfg.workspace);
  EncoderParams fresh =
      EncoderParams::random_init(cfg.encoder, root.substream("e2e-init").next_u64());
  TrainHyper e2e_hyper = cfg.action_hyper;
  e2e_hyper.seed = cfg.action_hyper.seed + 2;
  ActionModel end_to_end = train_action_head(fit_set, fresh, TrainMode::EndToEnd,
                                             e2e_hyper, cfg.bounds, cfg.workspace);

  RetrievalIndex index = build_retrieval_index(fit_set, pre.encoder, cfg.workspace);

  auto random_rng = std::make_shared<Rng>(root.substream("random-policy"));
  std::vector<std::pair<std::string, Policy>> policies;
  policies.emplace_back("vinn", [&](const Cluster& s, const Cluster& g) {
    return baseline_vinn(index, pre.encoder, cfg.workspace, s, g, cfg.vinn_k);
  });
  policies.emplace_back("nn-greedy", [&](const Cluster& s, const Cluster& g) {
    return baseline_nn_greedy(index, pre.encoder, cfg.workspace, s, g);
  });
  policies.emplace_back("dm-frozen", [&](const Cluster& s, const Cluster& g) {
    return predict_action_normalized(frozen, s, g);
  });
  policies.emplace_back("dm-unfrozen", [&](const Cluster& s, const Cluster& g) {
    return predict_action_normalized(unfrozen, s, g);
  });
  policies.emplace_back("dm-end-to-end", [&](const Cluster& s, const Cluster& g) {
    return predict_action_normalized(end_to_end, s, g);
  });
  policies.emplace_back("random", [&, random_rng](const Cluster&, const Cluster&) {
    return cfg.bounds.normalize(baseline_random(cfg.bounds, *random_rng));
  });

  // shared rollout scenarios so the policies see identical states/sub-goals
  std::vector<RolloutScenario> scenarios;
  Rng roll_rng = root.substream("rollouts");
  for (int i = 0; i < cfg.rollouts; ++i) {
    Rng srng = roll_rng.substream(i);
    RolloutScenario sc;
    sc.body = build_body(cfg.rollout_prompts[i % cfg.rollout_prompts.size()],
                         cfg.sim, srng);
    ClusteredCloud perceived = perceive(sc.body.particles, cfg.cluster_count,
                                        cfg.cluster_points, srng.next_u64());
    Modification m =
        random_rollout_modification(static_cast<int>(perceived.clusters.size()), srng);
    sc.state = perceived.clusters.at(m.cluster_id);
    sc.target = apply_modification(sc.state, m);
    sc.post_seed = srng.next_u64();
    sc.emd_seed = srng.next_u64();
    scenarios.push_back(std::move(sc));
  }

  EvaluationTable table;
  for (const auto& [name, policy] : policies) {
    EvaluationRow row;
    row.name = name;
    row.val_mse = mean_mse(policy, val_set);
    row.test_mse = mean_mse(policy, test);
    DistanceReport d = rollout_policy(policy, scenarios, cfg);
    row.cd = d.cd;
    row.emd = d.emd;
    row.hd = d.hd;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace sculpt
