// Acceptance harness: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion enforces its own wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sculpt/checkpoint.hpp"
#include "sculpt/dataset.hpp"
#include "sculpt/errors.hpp"
#include "sculpt/llm_client.hpp"
#include "sculpt/metrics.hpp"
#include "sculpt/pipeline.hpp"
#include "sculpt/planner.hpp"
#include "sculpt/rng.hpp"
#include "sculpt/stats.hpp"
#include "sculpt/subgoal.hpp"

using namespace sculpt;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Criterion {
  int number;
  double budget_seconds;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      failed = true;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
  bool failed = false;
};

void run_criterion(int number, double budget_seconds,
                   const std::function<void(Criterion&)>& body) {
  Criterion c{number, budget_seconds};
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.check(false, std::string("exception: ") + e.what());
  }
  double elapsed = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  c.check(elapsed < budget_seconds, "over time budget");
  std::printf("%s criterion %d (%.1fs/%.0fs)%s%s\n",
              c.failed ? "FAIL" : "PASS", number, elapsed, budget_seconds,
              c.detail.str().empty() ? "" : ": ", c.detail.str().c_str());
  std::fflush(stdout);
  if (c.failed) ++g_failures;
}

PointCloud random_cloud(int n, Rng& rng, double scale = 0.1) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.points.push_back({rng.uniform(-scale, scale), rng.uniform(-scale, scale),
                        rng.uniform(-scale, scale)});
  return c;
}

double brute_chamfer(const PointCloud& a, const PointCloud& b) {
  double sa = 0.0;
  for (const auto& p : a.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b.points) best = std::min(best, squared_distance(p, q));
    sa += best;
  }
  double sb = 0.0;
  for (const auto& q : b.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a.points) best = std::min(best, squared_distance(q, p));
    sb += best;
  }
  return sa / a.size() + sb / b.size();
}

double brute_hausdorff(const PointCloud& a, const PointCloud& b) {
  auto directed = [](const PointCloud& x, const PointCloud& y) {
    double worst = 0.0;
    for (const auto& p : x.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : y.points) best = std::min(best, distance(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

double brute_emd(const PointCloud& a, const PointCloud& b) {
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      cost += distance(a.points[i], b.points[perm[i]]);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

// ---- criterion 1: distance metric oracles ----
void criterion_metrics(Criterion& c) {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    PointCloud a = random_cloud(64, rng);
    PointCloud b = random_cloud(64, rng);
    c.check(std::fabs(chamfer(a, b) - brute_chamfer(a, b)) <= 1e-12,
            "chamfer deviates from brute force");
    c.check(std::fabs(hausdorff(a, b) - brute_hausdorff(a, b)) <= 1e-12,
            "hausdorff deviates from brute force");
    if (c.failed) return;
  }
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + static_cast<int>(rng.next_below(6));  // 2..7
    PointCloud a = random_cloud(n, rng);
    PointCloud b = random_cloud(n, rng);
    c.check(std::fabs(emd(a, b) - brute_emd(a, b)) <= 1e-12,
            "emd deviates from factorial brute force");
    if (c.failed) return;
  }
}

// ---- criterion 2: sub-goal modification algebra ----
void criterion_subgoal_algebra(Criterion& c) {
  Rng rng(7);
  PointCloud pts;
  for (int i = 0; i < 120; ++i)
    pts.points.push_back({rng.uniform(0.01, 0.06), rng.uniform(0.01, 0.06),
                          rng.uniform(0.0, 0.05)});
  Cluster base = Cluster::from_points(0, pts);

  // exact identity at w = 0
  for (const Cluster& out :
       {lengthen(base, {0, 0, 1}, 0.0), shorten(base, {1, 0, 0}, 0.0),
        flatten(base, 0.0), thin(base, {0, 1, 0}, 0.0)}) {
    bool exact = out.points.size() == base.points.size();
    for (std::size_t i = 0; exact && i < base.points.size(); ++i)
      exact = out.points.points[i] == base.points.points[i];
    c.check(exact, "w = 0 is not an exact identity");
  }

  // flatten lands exactly on the floor
  double floor = base.points.min_z();
  Cluster flat = flatten(base, 1.0);
  for (const auto& p : flat.points.points)
    c.check(p.z == floor, "flatten(w=1) missed the exact floor");

  // lengthen/shorten inverse composition to 1e-9
  for (double w : {0.2, 0.5, 1.0}) {
    double wp = w * kGainStretch / (kGainCompress * (1.0 + w * kGainStretch));
    Cluster roundtrip = shorten(lengthen(base, {0, 0, 1}, w), {0, 0, 1}, wp);
    double worst = 0.0;
    for (std::size_t i = 0; i < base.points.size(); ++i)
      worst = std::max(worst, distance(base.points.points[i],
                                       roundtrip.points.points[i]));
    c.check(worst < 1e-9, "lengthen/shorten inverse exceeded 1e-9");
  }

  // extent monotone over the weight grid
  const Point3 d{1.0, 0.0, 0.0};
  double prev_len = -1.0, prev_short = 1e18, prev_flat = 1e18, prev_thin = 1e18;
  bool first = true;
  for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    double len = lengthen(base, d, w).points.extent_along(d);
    double sho = shorten(base, d, w).points.extent_along(d);
    double fla = flatten(base, w).points.extent_along({0.0, 0.0, 1.0});
    double thi =
        thin(base, {0.0, 1.0, 0.0}, w).points.extent_along({1.0, 0.0, 0.0});
    if (!first) {
      c.check(len > prev_len, "lengthen extent not increasing");
      c.check(sho < prev_short, "shorten extent not decreasing");
      c.check(fla < prev_flat, "flatten z-extent not decreasing");
      c.check(thi < prev_thin, "thin cross extent not decreasing");
    }
    prev_len = len;
    prev_short = sho;
    prev_flat = fla;
    prev_thin = thi;
    first = false;
  }
}

// ---- criterion 3: planner invariants on every template ----
void criterion_planner(Criterion& c) {
  for (const auto& name : known_templates()) {
    ShapePrompt prompt{name};
    AuditLog audit;
    PlacementPlan p =
        plan(prompt, template_backend(prompt), kDefaultMaxPlanIters, &audit);

    // brute-force prefix support
    std::vector<CellIndex> placed;
    bool supported = true;
    for (const auto& pl : p.placements) {
      if (pl.cell.k > 0 &&
          std::find(placed.begin(), placed.end(),
                    CellIndex{pl.cell.i, pl.cell.j, pl.cell.k - 1}) ==
              placed.end())
        supported = false;
      placed.push_back(pl.cell);
    }
    c.check(supported, name + ": unsupported placement prefix");

    // plan multiset equals grid occupancy
    auto grid_cells = template_grid(name).occupied_cells();
    std::sort(placed.begin(), placed.end());
    std::sort(grid_cells.begin(), grid_cells.end());
    c.check(placed == grid_cells, name + ": plan cells != grid cells");

    // strict sigma/phi alternation
    int expected_index = 0;
    bool alternation = true;
    for (const auto& r : audit.records) {
      if (r.proposer != "sigma" && r.proposer != "phi") continue;
      if (r.call_index != expected_index) alternation = false;
      if (r.proposer != (expected_index % 2 == 0 ? "sigma" : "phi"))
        alternation = false;
      ++expected_index;
    }
    c.check(alternation, name + ": sigma/phi alternation broken");
  }

  // floating cells must surface as PlanningFailure
  OccupancyGrid grid;
  grid.set({1, 1, 0}, true);
  grid.set({3, 3, 3}, true);
  bool threw = false;
  try {
    validate_and_order(grid, grid.occupied_cells());
  } catch (const PlanningFailure& e) {
    threw = std::string(e.what()).find("(3,3,3)") != std::string::npos;
  }
  c.check(threw, "floating cell did not raise PlanningFailure naming the cell");
}

// ---- criterion 4: encoder invariance and gradients ----
void criterion_encoder(Criterion& c) {
  Rng rng(5);
  auto toy = [&](int n) {
    PointCloud pts;
    for (int i = 0; i < n; ++i)
      pts.points.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                            rng.uniform(-1.0, 1.0)});
    return Cluster::from_points(0, std::move(pts));
  };

  // exact permutation invariance of the pooled feature, full-size network
  {
    EncoderConfig cfg;
    EncoderParams params = EncoderParams::random_init(cfg, 3);
    Cluster cl = toy(48);
    Eigen::RowVectorXd base = encode(cl, params).global;
    std::vector<std::size_t> perm(cl.points.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng shuffle_rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      for (std::size_t i = perm.size() - 1; i > 0; --i)
        std::swap(perm[i], perm[shuffle_rng.next_below(i + 1)]);
      Cluster shuffled;
      shuffled.id = cl.id;
      for (std::size_t i : perm)
        shuffled.points.points.push_back(cl.points.points[i]);
      shuffled.centroid = shuffled.points.centroid();
      Eigen::RowVectorXd got = encode(shuffled, params).global;
      c.check((got.array() == base.array()).all(),
              "global feature changed under permutation");
      if (c.failed) return;
    }
  }

  // finite-difference gradients, all layers, small network
  {
    EncoderConfig cfg;
    cfg.h1 = 4;
    cfg.h2 = 4;
    cfg.g1 = 5;
    cfg.g2 = 6;
    EncoderParams params = EncoderParams::random_init(cfg, 11);
    // keep ReLU pre-activations off their kinks, where finite differences
    // and the (sub)gradient legitimately disagree
    for (auto* b : {&params.b1, &params.b2, &params.b3, &params.b4})
      for (Eigen::Index i = 0; i < b->size(); ++i)
        (*b)[i] = rng.uniform(0.05, 0.15);
    RegressionHead head;
    head.w = Eigen::VectorXd::Zero(2 * cfg.fused_dim());
    for (Eigen::Index i = 0; i < head.w.size(); ++i)
      head.w[i] = rng.uniform(-0.5, 0.5);
    head.b = 0.1;
    TrainingPair pair;
    pair.state = toy(12);
    pair.next = toy(12);
    pair.target = 0.3;

    EncoderGrad grad = EncoderGrad::zero(cfg);
    pretrain_example_loss(params, head, pair, &grad, nullptr, nullptr);
    Eigen::VectorXd analytic = grad.pack();
    Eigen::VectorXd flat = params.pack();
    const double h = 1e-6;

    std::vector<std::pair<const char*, Eigen::Index>> layers = {
        {"w1", params.w1.size()},        {"b1", params.b1.size()},
        {"w2", params.w2.size()},        {"b2", params.b2.size()},
        {"transform", params.transform.size()},
        {"w3", params.w3.size()},        {"b3", params.b3.size()},
        {"w4", params.w4.size()},        {"b4", params.b4.size()}};
    Eigen::Index off = 0;
    for (const auto& [name, size] : layers) {
      double num2 = 0.0, diff2 = 0.0;
      for (Eigen::Index i = off; i < off + size; ++i) {
        Eigen::VectorXd plus = flat, minus = flat;
        plus[i] += h;
        minus[i] -= h;
        EncoderParams pp = params, pm = params;
        pp.unpack(plus);
        pm.unpack(minus);
        double fd =
            (pretrain_example_loss(pp, head, pair, nullptr, nullptr, nullptr) -
             pretrain_example_loss(pm, head, pair, nullptr, nullptr, nullptr)) /
            (2.0 * h);
        num2 += fd * fd;
        diff2 += (fd - analytic[i]) * (fd - analytic[i]);
      }
      c.check(num2 > 0.0 && std::sqrt(diff2 / num2) < 1e-4,
              std::string(name) + ": gradient rel err >= 1e-4");
      off += size;
    }
  }
}

// ---- criterion 5: two-stage training beats the baselines ----
void criterion_training(Criterion& c) {
  SimConfig sim;
  ActionBounds bounds;
  WorkspaceBounds ws({0.0, 0.0, 0.0}, {0.075, 0.075, 0.075});

  auto seeds = generate_seed_clouds({"pyramid", "cube"}, 10, 256, sim, ws, 101);
  auto pairs = generate_synthetic_pairs(seeds, 4000, 0.5, 102);
  c.check(static_cast<int>(pairs.size()) == 4000, "expected 4000 pre-training pairs");

  auto tuples =
      generate_action_dataset({"pyramid", "cube"}, 250, sim, bounds, ws, 10, 256, 103);
  std::vector<ActionTuple> train(tuples.begin(), tuples.begin() + 200);
  std::vector<ActionTuple> test(tuples.begin() + 200, tuples.end());
  c.check(train.size() == 200 && test.size() == 50, "bad train/test split");

  EncoderConfig ecfg;
  TrainHyper pre;
  pre.epochs = 2;
  pre.lr = 1e-3;
  pre.batch = 32;
  pre.seed = 7;
  PretrainResult pretrained = pretrain_encoder(pairs, ecfg, pre);

  TrainHyper act;
  act.epochs = 10;
  act.lr = 1e-3;
  act.batch = 16;
  act.seed = 8;
  ActionModel frozen = train_action_head(train, pretrained.encoder,
                                         TrainMode::Frozen, act, bounds, ws);

  auto model_mse = [&](const ActionModel& m) {
    double sum = 0.0;
    for (const auto& t : test)
      sum += action_mse(predict_action_normalized(m, t.state, t.next),
                        t.action_norm);
    return sum / test.size();
  };
  RetrievalIndex index = build_retrieval_index(train, pretrained.encoder, ws);
  double mse_nn = 0.0;
  for (const auto& t : test)
    mse_nn += action_mse(baseline_nn_greedy(index, pretrained.encoder, ws,
                                            t.state, t.next),
                         t.action_norm);
  mse_nn /= test.size();
  Rng rand_rng(9);
  double mse_random = 0.0;
  for (const auto& t : test)
    mse_random += action_mse(bounds.normalize(baseline_random(bounds, rand_rng)),
                             t.action_norm);
  mse_random /= test.size();
  double mse_frozen = model_mse(frozen);

  std::ostringstream mses;
  mses << "dm-frozen " << mse_frozen << ", nn-greedy " << mse_nn << ", random "
       << mse_random;
  c.detail << mses.str();
  c.check(mse_frozen < mse_nn, "dm-frozen did not beat nn-greedy");
  c.check(mse_frozen < mse_random, "dm-frozen did not beat random");
}

// ---- criterion 6: refinement improves the chamfer on real episodes ----
void criterion_episodes(Criterion& c) {
  fs::path base = fs::temp_directory_path() / "sculpt_acceptance_episodes";
  fs::remove_all(base);
  for (const std::string prompt : {"line", "column", "X"}) {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RunConfig cfg;
      cfg.prompt = prompt;
      cfg.seed = seed;
      cfg.out_dir = base / (prompt + "_" + std::to_string(seed));
      EpisodeReport rep = run_episode(cfg);
      if (rep.success && rep.final_chamfer < rep.initial_chamfer) ++wins;
    }
    c.detail << (c.detail.str().empty() ? "" : ", ") << prompt << " " << wins
             << "/10";
    c.check(wins >= 7, prompt + ": fewer than 7/10 improving episodes");
  }
  fs::remove_all(base);
}

// ---- criterion 7: survey statistics oracles ----
void criterion_stats(Criterion& c) {
  const std::optional<int> NA = std::nullopt;

  RatingMatrix perfect;
  perfect.rows = {{1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}};
  c.check(krippendorff_alpha_ordinal(perfect) == 1.0,
          "perfect agreement alpha != 1");

  RatingMatrix worked;
  worked.rows = {
      {1, 2, 3, 3, 2, 1, 4, 1, 2, NA, NA, NA},
      {1, 2, 3, 3, 2, 2, 4, 1, 2, 5, NA, 3},
      {NA, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, NA},
      {1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, NA},
  };
  c.check(std::fabs(krippendorff_alpha_ordinal(worked) - 0.8153875037548814) <
              1e-3,
          "worked example alpha off by more than 1e-3");

  std::vector<double> a = {14.2, 15.1, 13.8, 14.9, 15.3, 14.4, 15.0, 13.9};
  std::vector<double> b = {13.1, 13.8, 12.9, 13.5, 13.2, 13.9, 13.3};
  WelchResult w = welch_t(a, b);
  c.check(std::fabs(w.t - 4.831502302310) < 1e-9, "welch t off");
  c.check(std::fabs(w.dof - 12.001327768499) < 1e-9, "welch dof off");
  c.check(std::fabs(w.p - 4.108062655953e-04) < 1e-9, "welch p off");

  WelchResult flipped = welch_t(b, a);
  c.check(flipped.t == -w.t, "welch t not exactly antisymmetric");
  c.check(flipped.p == w.p, "welch p changed under swap");
}

// ---- criterion 8: suite determinism ----
void criterion_determinism(Criterion& c) {
  fs::path base = fs::temp_directory_path() / "sculpt_acceptance_suite";
  fs::remove_all(base);
  auto run_once = [&](const fs::path& dir) {
    RunConfig cfg;
    cfg.prompt = "line";  // per-episode prompt is overridden by the suite
    cfg.out_dir = dir;
    cfg.seed = 424242;
    cfg.max_rounds = 2;
    cfg.cluster_count = 4;
    cfg.cluster_points = 64;
    return run_suite({"line", "column"}, 2, cfg);
  };
  SuiteResult first = run_once(base / "a");
  SuiteResult second = run_once(base / "b");

  c.check(first.csv_text == second.csv_text, "summary CSV differs");
  c.check(first.episodes.size() == second.episodes.size(),
          "episode count differs");

  auto stripped = [](const fs::path& report) {
    std::ifstream in(report);
    auto j = nlohmann::ordered_json::parse(in);
    j.erase("runtime_seconds");
    return j.dump();
  };
  for (std::size_t i = 0; i < first.episodes.size(); ++i) {
    c.check(first.episodes[i].success && second.episodes[i].success,
            "suite episode failed");
    if (stripped(first.episodes[i].report_path) !=
        stripped(second.episodes[i].report_path)) {
      c.check(false, "episode report differs beyond runtime_seconds");
      break;
    }
  }
  fs::remove_all(base);
}

// ---- criterion 9: LLM backend robustness under a mocked transport ----
void criterion_llm_robustness(Criterion& c) {
  auto chat_body = [](const std::string& content) {
    nlohmann::json j;
    j["choices"] = {{{"message", {{"content", content}}}}};
    return j.dump();
  };
  LLMConfig llm;
  llm.endpoint = "http://localhost:1/v1/chat/completions";
  llm.model = "mock";
  llm.retries = 3;

  // malformed-then-valid consumes exactly one retry
  {
    int calls = 0;
    ChatTransport transport = [&](const std::string&) {
      ++calls;
      return chat_body(calls == 1 ? "sorry, no JSON here"
                                  : R"({"add": [[2,2,0]]})");
    };
    ProposerSuite suite = llm_backend(llm, transport);
    AuditRecord rec;
    auto cells = suite.planner(ShapePrompt{"line"}, OccupancyGrid{}, rec);
    c.check(calls == 2, "malformed-then-valid used more than one retry");
    c.check(cells.size() == 1 && cells[0] == CellIndex{2, 2, 0},
            "valid retry reply not accepted");
    c.check(rec.rejections.empty(), "successful retry still logged a rejection");
  }

  // exhausted retries degrade to an empty proposal
  {
    int calls = 0;
    ChatTransport transport = [&](const std::string&) {
      ++calls;
      return chat_body("still not parseable");
    };
    ProposerSuite suite = llm_backend(llm, transport);
    AuditRecord rec;
    auto cells = suite.planner(ShapePrompt{"line"}, OccupancyGrid{}, rec);
    c.check(calls == llm.retries + 1, "retry count wrong on exhaustion");
    c.check(cells.empty(), "exhaustion did not produce an empty proposal");
    c.check(!rec.rejections.empty() &&
                rec.rejections[0] == "parse retries exhausted; empty proposal",
            "exhaustion not recorded in the audit");
  }

  // an episode whose sub-goal backend always exhausts keeps running and ends
  // with skip records instead of aborting
  {
    ChatTransport transport = [&](const std::string&) {
      return chat_body("not json, ever");
    };
    PipelineBackends backends;
    backends.subgoal = llm_subgoal_backend(llm, transport);

    fs::path dir = fs::temp_directory_path() / "sculpt_acceptance_llm";
    fs::remove_all(dir);
    RunConfig cfg;
    cfg.prompt = "line";
    cfg.out_dir = dir;
    cfg.seed = 3;
    cfg.max_rounds = 2;
    cfg.cluster_count = 4;
    cfg.cluster_points = 64;
    EpisodeReport rep = run_episode(cfg, &backends);
    c.check(rep.success, "episode aborted on sub-goal parse exhaustion");
    int skips = 0;
    for (const auto& s : rep.steps)
      if (s.kind == "skip" && s.note == "sub-goal backend declined") ++skips;
    c.check(skips == 2, "expected one skip record per refinement round");
    fs::remove_all(dir);
  }
}

}  // namespace

int main() {
  run_criterion(1, 10.0, criterion_metrics);
  run_criterion(2, 5.0, criterion_subgoal_algebra);
  run_criterion(3, 5.0, criterion_planner);
  run_criterion(4, 60.0, criterion_encoder);
  run_criterion(5, 900.0, criterion_training);
  run_criterion(6, 600.0, criterion_episodes);
  run_criterion(7, 5.0, criterion_stats);
  run_criterion(8, 120.0, criterion_determinism);
  run_criterion(9, 60.0, criterion_llm_robustness);

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", g_failures);
  return 1;
}
