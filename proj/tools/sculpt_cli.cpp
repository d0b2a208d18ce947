// Command-line front end for the sculpting pipeline: planning, episode runs,
// dataset generation, training, evaluation and metric queries.
//
// Exit codes: 0 success, 2 planning/unknown-shape failure, 3 backend
// transport failure, 4 invalid configuration, 1 anything else.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sculpt/checkpoint.hpp"
#include "sculpt/dataset.hpp"
#include "sculpt/errors.hpp"
#include "sculpt/pipeline.hpp"
#include "sculpt/ply_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPlanning = 2;
constexpr int kExitTransport = 3;
constexpr int kExitConfig = 4;

int exit_code_for(const std::string& error_kind) {
  if (error_kind.empty()) return kExitOk;
  if (error_kind == "unknown-shape" || error_kind == "planning-failure")
    return kExitPlanning;
  if (error_kind == "transport") return kExitTransport;
  if (error_kind == "invalid-config") return kExitConfig;
  return kExitError;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const sculpt::UnknownShape& e) {
    std::cerr << "error (unknown-shape): " << e.what() << "\n";
    return kExitPlanning;
  } catch (const sculpt::PlanningFailure& e) {
    std::cerr << "error (planning-failure): " << e.what() << "\n";
    return kExitPlanning;
  } catch (const sculpt::TransportError& e) {
    std::cerr << "error (transport): " << e.what() << "\n";
    return kExitTransport;
  } catch (const sculpt::InvalidArgument& e) {
    std::cerr << "error (invalid-config): " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

struct CommonRunOpts {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
};

void add_run_opts(CLI::App* cmd, CommonRunOpts& opts) {
  cmd->add_option("--config", opts.config_file,
                  "key = value config file (see docs/run.conf example)");
  cmd->add_option("--set", opts.overrides,
                  "config override key=value (repeatable)")
      ->expected(-1);
}

sculpt::RunConfig resolve_run_config(const CommonRunOpts& opts) {
  sculpt::RunConfig config;
  if (!opts.config_file.empty())
    config = sculpt::load_run_config(opts.config_file);
  for (const auto& kv : opts.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw sculpt::InvalidArgument("--set expects key=value, got " + kv);
    sculpt::set_run_config_field(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

void print_episode_summary(const sculpt::EpisodeReport& r) {
  if (r.success) {
    std::cout << "episode ok: prompt=" << r.prompt << " seed=" << r.seed
              << " plan_length=" << r.plan_length
              << " rounds=" << r.refinement_rounds
              << " chamfer " << r.initial_chamfer << " -> " << r.final_chamfer
              << "\nreport: " << r.report_path.string() << "\n";
  } else {
    std::cerr << "episode failed (" << r.error_kind << "): " << r.error_message
              << "\n";
    if (!r.report_path.empty())
      std::cerr << "report: " << r.report_path.string() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coarse-to-fine clay sculpting pipeline"};
  app.require_subcommand(1);
  bool offline_flag = false;
  app.add_flag("--offline", offline_flag,
               "forbid network backends in every subcommand");

  // ---- plan ----
  auto* plan_cmd = app.add_subcommand("plan", "plan chunk placements for a prompt");
  std::string plan_prompt, plan_out, plan_audit;
  plan_cmd->add_option("--prompt", plan_prompt, "shape prompt")->required();
  plan_cmd->add_option("--out", plan_out, "output JSON path (default stdout)");
  plan_cmd->add_option("--audit", plan_audit, "audit JSON-lines output path");
  plan_cmd->callback([&] {
    std::exit(guarded([&] {
      sculpt::ShapePrompt prompt{plan_prompt};
      sculpt::AuditLog audit;
      sculpt::PlacementPlan p =
          sculpt::plan(prompt, sculpt::template_backend(prompt),
                       sculpt::kDefaultMaxPlanIters, &audit);
      sculpt::OccupancyGrid grid;
      for (const auto& pl : p.placements) grid.set(pl.cell, true);
      std::string json = sculpt::plan_to_json(p, grid);
      if (plan_out.empty()) {
        std::cout << json << "\n";
      } else {
        std::ofstream out(plan_out);
        out << json << "\n";
      }
      if (!plan_audit.empty()) {
        std::ofstream out(plan_audit);
        out << audit.to_jsonl();
      }
      return kExitOk;
    }));
  });

  // ---- run ----
  auto* run_cmd = app.add_subcommand("run", "run one sculpting episode");
  CommonRunOpts run_opts;
  add_run_opts(run_cmd, run_opts);
  run_cmd->callback([&] {
    std::exit(guarded([&] {
      sculpt::RunConfig config = resolve_run_config(run_opts);
      if (offline_flag) config.offline = true;
      sculpt::EpisodeReport report = sculpt::run_episode(config);
      print_episode_summary(report);
      return exit_code_for(report.error_kind);
    }));
  });

  // ---- suite ----
  auto* suite_cmd = app.add_subcommand("suite", "episodes over several prompts");
  CommonRunOpts suite_opts;
  std::vector<std::string> suite_prompts{"X",      "line",     "flower", "column",
                                         "pyramid", "airplane", "chair",  "pottery"};
  int suite_repeats = 3;
  add_run_opts(suite_cmd, suite_opts);
  suite_cmd->add_option("--prompts", suite_prompts, "prompt list");
  suite_cmd->add_option("--repeats", suite_repeats, "episodes per prompt");
  bool suite_share_seed = false;
  suite_cmd->add_flag("--shared-seed", suite_share_seed,
                      "reuse the root seed for every repeat");
  suite_cmd->callback([&] {
    std::exit(guarded([&] {
      sculpt::RunConfig base = resolve_run_config(suite_opts);
      if (offline_flag) base.offline = true;
      sculpt::SuiteResult result =
          sculpt::run_suite(suite_prompts, suite_repeats, base, nullptr,
                            suite_share_seed);
      std::cout << result.csv_text;
      std::cout << "summary: " << result.summary_csv.string() << "\n";
      for (const auto& e : result.episodes)
        if (!e.success) return exit_code_for(e.error_kind);
      return kExitOk;
    }));
  });

  // ---- make-dataset ----
  auto* mk_cmd = app.add_subcommand("make-dataset",
                                    "simulator datasets for training");
  std::vector<std::string> mk_prompts{"pyramid", "cube"};
  std::string mk_out = "dataset";
  int mk_tuples = 250, mk_pairs = 4000, mk_clusters = 10, mk_points = 256;
  std::uint64_t mk_seed = 0;
  double mk_gamma = 0.5;
  mk_cmd->add_option("--prompts", mk_prompts, "template prompts to sculpt");
  mk_cmd->add_option("--out-dir", mk_out, "output directory");
  mk_cmd->add_option("--tuples", mk_tuples, "action tuples to generate");
  mk_cmd->add_option("--pairs", mk_pairs, "synthetic pre-training pairs");
  mk_cmd->add_option("--clusters", mk_clusters, "clusters per observation");
  mk_cmd->add_option("--points", mk_points, "points per cluster");
  mk_cmd->add_option("--gamma", mk_gamma, "CD weight in the mixed target");
  mk_cmd->add_option("--seed", mk_seed, "root seed");
  mk_cmd->callback([&] {
    std::exit(guarded([&] {
      sculpt::SimConfig sim;
      sculpt::ActionBounds bounds;
      sculpt::WorkspaceBounds ws{{0.0, 0.0, 0.0}, {0.075, 0.075, 0.075}};
      if (mk_tuples > 0) {
        auto tuples = sculpt::generate_action_dataset(
            mk_prompts, mk_tuples, sim, bounds, ws, mk_clusters, mk_points, mk_seed);
        sculpt::save_action_dataset(tuples, mk_out, "action");
        std::cout << "wrote " << tuples.size() << " action tuples to " << mk_out
                  << "/action.jsonl\n";
      }
      if (mk_pairs > 0) {
        auto seeds = sculpt::generate_seed_clouds(mk_prompts, mk_clusters,
                                                  mk_points, sim, ws, mk_seed + 1);
        auto pairs =
            sculpt::generate_synthetic_pairs(seeds, mk_pairs, mk_gamma, mk_seed + 2);
        sculpt::save_training_pairs(pairs, mk_out, "pairs");
        std::cout << "wrote " << pairs.size() << " training pairs to " << mk_out
                  << "/pairs.jsonl\n";
      }
      return kExitOk;
    }));
  });

  // ---- train-encoder ----
  auto* te_cmd = app.add_subcommand("train-encoder",
                                    "distance-regression pre-training");
  std::string te_pairs, te_out = "encoder.json";
  sculpt::TrainHyper te_hyper;
  te_cmd->add_option("--pairs", te_pairs, "pairs.jsonl index")->required();
  te_cmd->add_option("--out", te_out, "encoder checkpoint path");
  te_cmd->add_option("--epochs", te_hyper.epochs, "epochs");
  te_cmd->add_option("--lr", te_hyper.lr, "learning rate");
  te_cmd->add_option("--batch", te_hyper.batch, "batch size");
  te_cmd->add_option("--seed", te_hyper.seed, "seed");
  te_cmd->callback([&] {
    std::exit(guarded([&] {
      auto pairs = sculpt::load_training_pairs(te_pairs);
      sculpt::PretrainResult result =
          sculpt::pretrain_encoder(pairs, sculpt::EncoderConfig{}, te_hyper);
      sculpt::save_encoder(result.encoder, te_out);
      std::cout << "holdout loss " << result.initial_holdout_loss << " -> "
                << result.final_holdout_loss << "\ncheckpoint: " << te_out << "\n";
      return kExitOk;
    }));
  });

  // ---- train-action ----
  auto* ta_cmd = app.add_subcommand("train-action", "action-head training");
  std::string ta_dataset, ta_encoder, ta_mode = "frozen", ta_out = "action_model.json";
  sculpt::TrainHyper ta_hyper;
  ta_cmd->add_option("--dataset", ta_dataset, "action.jsonl index")->required();
  ta_cmd->add_option("--encoder", ta_encoder,
                     "encoder checkpoint (omit for a fresh random encoder)");
  ta_cmd->add_option("--mode", ta_mode, "frozen | unfrozen | end-to-end");
  ta_cmd->add_option("--out", ta_out, "model checkpoint path");
  ta_cmd->add_option("--epochs", ta_hyper.epochs, "epochs");
  ta_cmd->add_option("--lr", ta_hyper.lr, "learning rate");
  ta_cmd->add_option("--batch", ta_hyper.batch, "batch size");
  ta_cmd->add_option("--seed", ta_hyper.seed, "seed");
  ta_cmd->callback([&] {
    std::exit(guarded([&] {
      auto tuples = sculpt::load_action_dataset(ta_dataset);
      sculpt::TrainMode mode;
      if (ta_mode == "frozen") mode = sculpt::TrainMode::Frozen;
      else if (ta_mode == "unfrozen") mode = sculpt::TrainMode::Unfrozen;
      else if (ta_mode == "end-to-end") mode = sculpt::TrainMode::EndToEnd;
      else throw sculpt::InvalidArgument("unknown training mode " + ta_mode);
      sculpt::EncoderParams encoder =
          ta_encoder.empty()
              ? sculpt::EncoderParams::random_init(sculpt::EncoderConfig{},
                                                   ta_hyper.seed)
              : sculpt::load_encoder(ta_encoder);
      sculpt::WorkspaceBounds ws{{0.0, 0.0, 0.0}, {0.075, 0.075, 0.075}};
      sculpt::ActionModel model = sculpt::train_action_head(
          tuples, encoder, mode, ta_hyper, sculpt::ActionBounds{}, ws);
      sculpt::save_action_model(model, ta_out);
      std::cout << "checkpoint: " << ta_out << "\n";
      return kExitOk;
    }));
  });

  // ---- evaluate ----
  auto* ev_cmd = app.add_subcommand("evaluate", "policy comparison table");
  std::string ev_pairs, ev_train, ev_test, ev_out;
  sculpt::EvaluationConfig ev_cfg;
  ev_cmd->add_option("--pairs", ev_pairs, "pairs.jsonl index")->required();
  ev_cmd->add_option("--train", ev_train, "train action.jsonl index")->required();
  ev_cmd->add_option("--test", ev_test, "test action.jsonl index")->required();
  ev_cmd->add_option("--out", ev_out, "CSV output path (default stdout only)");
  ev_cmd->add_option("--pretrain-epochs", ev_cfg.pretrain_hyper.epochs,
                     "pre-training epochs");
  ev_cmd->add_option("--action-epochs", ev_cfg.action_hyper.epochs,
                     "action-training epochs");
  ev_cmd->add_option("--rollouts", ev_cfg.rollouts, "simulator rollouts");
  ev_cmd->add_option("--seed", ev_cfg.seed, "root seed");
  ev_cmd->callback([&] {
    std::exit(guarded([&] {
      auto pairs = sculpt::load_training_pairs(ev_pairs);
      auto train = sculpt::load_action_dataset(ev_train);
      auto test = sculpt::load_action_dataset(ev_test);
      sculpt::EvaluationTable table =
          sculpt::evaluate_models(pairs, train, test, ev_cfg);
      std::cout << table.to_csv();
      if (!ev_out.empty()) {
        std::ofstream out(ev_out);
        out << table.to_csv();
      }
      return kExitOk;
    }));
  });

  // ---- metrics ----
  auto* me_cmd = app.add_subcommand("metrics", "distances between two PLY clouds");
  std::string me_a, me_b;
  me_cmd->add_option("--a", me_a, "first PLY file")->required();
  me_cmd->add_option("--b", me_b, "second PLY file")->required();
  me_cmd->callback([&] {
    std::exit(guarded([&] {
      sculpt::PointCloud a = sculpt::read_ply(me_a);
      sculpt::PointCloud b = sculpt::read_ply(me_b);
      sculpt::DistanceReport r = sculpt::distance_report_equalized(a, b);
      std::cout << "cd " << r.cd << "\nemd " << r.emd << "\nhd " << r.hd << "\n";
      return kExitOk;
    }));
  });

  CLI11_PARSE(app, argc, argv);
  return kExitOk;
}
