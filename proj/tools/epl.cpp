// epl: command-line driver for the embedded pseudo-labeling pipeline.
//
// Every stage reads and writes plain files so a run can be resumed or
// partially repeated:
//   gen -> split -> train -> extract -> project -> propagate -> probe
// and `experiment` runs the whole C1/C2/C3 suite from one config.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "epl/checkpoint.hpp"
#include "epl/config.hpp"
#include "epl/contrastive.hpp"
#include "epl/dataset.hpp"
#include "epl/experiment.hpp"
#include "epl/metrics.hpp"
#include "epl/opf.hpp"
#include "epl/probe.hpp"
#include "epl/projection.hpp"
#include "epl/svg.hpp"

namespace {

using namespace epl;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

Dataset load(const std::string& path) { return load_features(path, format_for_path(path)); }

void print_score(const std::string& what, const ScoreReport& r) {
  std::printf("%s accuracy=%.6f kappa=%.6f\n", what.c_str(), r.accuracy, r.kappa);
}

std::vector<Label> labels_at(const LabelVector& labels, const std::vector<std::size_t>& idx) {
  std::vector<Label> out;
  for (auto i : idx) out.push_back(labels.values[i]);
  return out;
}

ContrastiveMode parse_mode(const std::string& s) {
  if (s == "simclr") return ContrastiveMode::SimCLR;
  if (s == "supcon") return ContrastiveMode::SupCon;
  throw Error("mode must be simclr, supcon or combined");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedded pseudo-labeling with contrastive features, t-SNE and optimum-path forests"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "INI configuration file");
  app.add_option("--seed", common.seed, "base seed (overrides the config)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate Gaussian blobs");
  std::string gen_out;
  std::optional<int> gen_classes, gen_per_class, gen_dims;
  std::optional<double> gen_spread, gen_dist;
  gen->add_option("--out", gen_out, "output file (.bin for raw binary)")->required();
  gen->add_option("--classes", gen_classes);
  gen->add_option("--per-class", gen_per_class);
  gen->add_option("--dims", gen_dims);
  gen->add_option("--spread", gen_spread);
  gen->add_option("--center-dist", gen_dist);

  // split
  auto* split = app.add_subcommand("split", "seeded stratified S/U/T split");
  std::string split_data, split_out;
  split->add_option("--data", split_data)->required();
  split->add_option("--out", split_out)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a contrastive encoder");
  std::string tr_data, tr_split, tr_out, tr_mode = "simclr", tr_init;
  train_cmd->add_option("--data", tr_data)->required();
  train_cmd->add_option("--split", tr_split)->required();
  train_cmd->add_option("--out", tr_out, "checkpoint path")->required();
  train_cmd->add_option("--mode", tr_mode, "simclr | supcon | combined");
  train_cmd->add_option("--init", tr_init, "start from this encoder checkpoint");

  // extract
  auto* extract = app.add_subcommand("extract", "latent features of every sample");
  std::string ex_data, ex_ckpt, ex_out;
  extract->add_option("--data", ex_data)->required();
  extract->add_option("--checkpoint", ex_ckpt)->required();
  extract->add_option("--out", ex_out)->required();

  // project
  auto* project = app.add_subcommand("project", "exact t-SNE of S u U (or all rows)");
  std::string pr_data, pr_split, pr_out, pr_svg;
  project->add_option("--data", pr_data, "feature file")->required();
  project->add_option("--split", pr_split, "restrict to S u U; only S keeps its label");
  project->add_option("--out", pr_out, "embedding CSV")->required();
  project->add_option("--svg", pr_svg, "also draw a scatter plot");

  // propagate
  auto* propagate = app.add_subcommand("propagate", "OPFSemi over an embedding's labeled rows");
  std::string pg_emb, pg_forest, pg_labels, pg_truth;
  propagate->add_option("--embedding", pg_emb)->required();
  propagate->add_option("--forest", pg_forest, "forest CSV output");
  propagate->add_option("--labels", pg_labels, "pseudo-label CSV output")->required();
  propagate->add_option("--truth", pg_truth, "dataset file to score the propagated labels against");

  // probe
  auto* probe = app.add_subcommand("probe", "train a classifier and score it on T");
  std::string pb_data, pb_split, pb_kind = "softmax", pb_labels, pb_out;
  probe->add_option("--data", pb_data)->required();
  probe->add_option("--split", pb_split)->required();
  probe->add_option("--kind", pb_kind, "linear | opfsup | softmax");
  probe->add_option("--labels", pb_labels, "pseudo-labels: train on S u U with them (softmax only)");
  probe->add_option("--out", pb_out, "model checkpoint");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run C1, C2, C3 or all");
  std::string ex_which, ex_dir, ex_mode;
  std::optional<int> ex_replicas;
  experiment->add_option("which", ex_which, "c1 | c2 | c3 | all")->required()->check(
      CLI::IsMember({"c1", "c2", "c3", "all"}));
  experiment->add_option("--out", ex_dir, "output directory");
  experiment->add_option("--replicas", ex_replicas);
  experiment->add_option("--mode", ex_mode, "simclr | supcon | both | combined");

  // report
  auto* report = app.add_subcommand("report", "aggregate result directories");
  std::vector<std::string> rp_in;
  std::string rp_out;
  report->add_option("--in", rp_in, "experiment output directories")->required();
  report->add_option("--out", rp_out, "write summary.csv and correlation.txt here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig cfg = resolve(common);

    if (*gen) {
      BlobSpec spec = cfg.blobs;
      if (gen_classes) spec.classes = *gen_classes;
      if (gen_per_class) spec.per_class = *gen_per_class;
      if (gen_dims) spec.dims = *gen_dims;
      if (gen_spread) spec.spread = *gen_spread;
      if (gen_dist) spec.center_dist = *gen_dist;
      if (common.seed) spec.seed = *common.seed;
      auto data = generate_blobs(spec);
      data.name = cfg.dataset_name;
      save_features(data, gen_out, format_for_path(gen_out));
      std::printf("wrote %zu samples, %zu dims, %d classes to %s\n", data.size(), data.dims(), data.class_count,
                  gen_out.c_str());
    } else if (*split) {
      const auto data = load(split_data);
      const auto s = stratified_split(data, cfg.fractions, cfg.seed);
      save_split(s, split_out);
      std::printf("S=%zu U=%zu T=%zu\n", s.count(Role::Supervised), s.count(Role::Unsupervised), s.count(Role::Test));
    } else if (*train_cmd) {
      auto data = load(tr_data);
      const auto s = load_split(tr_split);
      TrainConfig tc = cfg.train;
      tc.seed = cfg.seed;
      TrainResult r;
      if (tr_mode == "combined") {
        const auto base = tr_init.empty() ? train(ContrastiveMode::SimCLR, data, s, tc).params : load_encoder(tr_init);
        r = finetune_supcon(base, data, s, tc);
      } else {
        const auto mode = parse_mode(tr_mode);
        const auto idx = mode == ContrastiveMode::SimCLR ? s.indices({Role::Supervised, Role::Unsupervised})
                                                         : s.indices(Role::Supervised);
        std::optional<EncoderParams> init;
        if (!tr_init.empty()) init = load_encoder(tr_init);
        r = train_contrastive(mode, data.features, data.labels, idx, tc, init);
      }
      save_encoder(tr_out, r.params, "mode=" + tr_mode + "\n" + tc.describe());
      std::printf("best epoch %d of %zu, validation loss %.6f%s\n", r.best_epoch, r.val_loss.size(),
                  r.val_loss.empty() ? 0.0 : r.val_loss[static_cast<std::size_t>(std::max(r.best_epoch, 1) - 1)],
                  r.validation_on_training_set ? " (validated on training samples)" : "");
    } else if (*extract) {
      const auto data = load(ex_data);
      Dataset out = data;
      out.features = extract_features(load_encoder(ex_ckpt), data.features);
      save_features(out, ex_out, format_for_path(ex_out));
    } else if (*project) {
      const auto data = load(pr_data);
      std::vector<std::size_t> rows;
      LabelVector labels;
      if (!pr_split.empty()) {
        const auto s = load_split(pr_split);
        rows = s.indices({Role::Supervised, Role::Unsupervised});
        labels = LabelVector(rows.size());
        for (std::size_t j = 0; j < rows.size(); ++j) {
          if (s.roles[rows[j]] == Role::Supervised && data.has_labels()) labels.set(j, data.labels[rows[j]], Provenance::True);
        }
      } else {
        rows.resize(data.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        labels = data.has_labels() ? LabelVector::from_labels(data.labels) : LabelVector(rows.size());
      }
      ProjectionConfig pc = cfg.projection;
      pc.seed = cfg.seed;
      const auto emb = tsne_project(data.features.select_rows(rows), pc);
      write_embedding_csv(pr_out, emb.coords, rows, &labels);
      if (!pr_svg.empty()) emit_scatter(emb.coords, labels, pr_svg);
      std::printf("final KL %.6f after %d iterations\n", emb.final_kl, emb.iterations_run);
    } else if (*propagate) {
      const auto emb = read_embedding_csv(pg_emb);
      if (emb.labels.size() == 0) throw Error(pg_emb + ": embedding has no label column to seed from");
      const auto forest = opfsemi_propagate(emb.coords, emb.labels);
      const auto local = forest_labels(forest, emb.labels);
      if (!pg_forest.empty()) write_forest_csv(forest, pg_forest);
      write_labels_csv(pg_labels, local, emb.node_ids);
      if (!pg_truth.empty()) {
        const auto truth = load(pg_truth);
        LabelVector pred(truth.size());
        std::vector<std::size_t> unlabeled;
        for (std::size_t j = 0; j < emb.node_ids.size(); ++j) {
          pred.set(emb.node_ids[j], local.values[j], local.provenance[j]);
          if (!emb.labels.labeled(j)) unlabeled.push_back(emb.node_ids[j]);
        }
        print_score("propagation", score(confusion(pred, LabelVector::from_labels(truth.labels), unlabeled,
                                                   static_cast<std::size_t>(truth.class_count))));
      }
    } else if (*probe) {
      const auto data = load(pb_data);
      if (!data.has_labels()) throw Error(pb_data + ": probing needs ground-truth labels");
      const auto s = load_split(pb_split);
      const auto truth = LabelVector::from_labels(data.labels);
      const auto k = static_cast<std::size_t>(data.class_count);
      const auto sup = s.indices(Role::Supervised);
      const auto test = s.indices(Role::Test);
      LabelVector pred;
      if (pb_kind == "linear" || pb_kind == "opfsup") {
        if (!pb_labels.empty()) throw Error("--labels applies to the softmax probe only");
        const auto fs = data.features.select_rows(sup);
        const auto ls = labels_at(truth, sup);
        if (pb_kind == "linear") {
          const auto m = train_linear(fs, ls, cfg.linear);
          if (!pb_out.empty()) save_linear(pb_out, m);
          pred = predict(m, data.features);
        } else {
          pred = opfsup_classify(opfsup_train(fs, ls), data.features);
        }
      } else if (pb_kind == "softmax") {
        SoftmaxConfig sc = cfg.softmax;
        sc.seed = cfg.seed;
        SoftmaxModel m;
        if (pb_labels.empty()) {
          m = train_softmax(data.features, truth, sup, k, sc);
        } else {
          const auto pseudo = read_labels_csv(pb_labels, data.size());
          m = train_softmax(data.features, merge_labels(s, truth, pseudo), s.indices({Role::Supervised, Role::Unsupervised}),
                            k, sc);
        }
        if (!pb_out.empty()) save_softmax(pb_out, m);
        pred = predict(m, data.features);
      } else {
        throw Error("--kind must be linear, opfsup or softmax");
      }
      print_score(pb_kind, score(confusion(pred, truth, test, k)));
    } else if (*experiment) {
      if (!ex_dir.empty()) cfg.out_dir = ex_dir;
      if (ex_replicas) cfg.replicas = *ex_replicas;
      if (!ex_mode.empty()) cfg.arms = parse_arm_selection(ex_mode);
      std::vector<Experiment> which;
      if (ex_which == "c1" || ex_which == "all") which.push_back(Experiment::C1);
      if (ex_which == "c2" || ex_which == "all") which.push_back(Experiment::C2);
      if (ex_which == "c3" || ex_which == "all") which.push_back(Experiment::C3);
      const auto outcome = run_experiments(cfg, which);
      write_outputs(cfg.out_dir, cfg, outcome);
      std::cout << format_aggregates(aggregate(outcome.rows));
      for (const auto& f : outcome.failures) std::cerr << "failure: " << f << '\n';
      return outcome.partial_failure() ? kExitPartial : kExitOk;
    } else if (*report) {
      std::vector<ResultRow> rows;
      std::vector<ConsistencyRow> cons;
      for (const auto& dir : rp_in) {
        const auto r = read_results_csv(std::filesystem::path(dir) / "results.csv");
        rows.insert(rows.end(), r.begin(), r.end());
        const auto c = std::filesystem::path(dir) / "consistency.csv";
        if (std::filesystem::exists(c)) {
          const auto cr = read_consistency_csv(c);
          cons.insert(cons.end(), cr.begin(), cr.end());
        }
      }
      const auto summary = format_aggregates(aggregate(rows));
      std::string corr;
      try {
        corr = correlation_report(rows, cons).describe();
      } catch (const Error& e) {
        corr = std::string("correlation: ") + e.what() + "\n";
      }
      std::cout << summary << corr;
      if (!rp_out.empty()) {
        std::filesystem::create_directories(rp_out);
        std::ofstream(std::filesystem::path(rp_out) / "summary.csv", std::ios::binary) << summary;
        std::ofstream(std::filesystem::path(rp_out) / "correlation.txt", std::ios::binary) << corr;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "epl: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
