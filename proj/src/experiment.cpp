#include "epl/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "epl/checkpoint.hpp"
#include "epl/contrastive.hpp"
#include "epl/metrics.hpp"
#include "epl/opf.hpp"
#include "epl/probe.hpp"
#include "epl/projection.hpp"
#include "epl/svg.hpp"

namespace epl {
namespace {

// Stream tags for derive_seed; one per stochastic stage and arm.
constexpr std::uint64_t kTrainStream = 10;
constexpr std::uint64_t kProjectionStream = 20;
constexpr std::uint64_t kSoftmaxStream = 30;
constexpr std::uint64_t kLinearStream = 40;

constexpr Arm kArms[] = {Arm::SimCLR, Arm::SupCon, Arm::Combined};

std::uint64_t arm_tag(Arm a) { return static_cast<std::uint64_t>(a) + 1; }

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string shortest(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class StageTimer {
 public:
  StageTimer(ExperimentOutcome& out, std::string stage)
      : out_(out), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
    out_.timings.push_back({stage_, d.count()});
  }

 private:
  ExperimentOutcome& out_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

struct Propagation {
  LabelVector pseudo;  // full length; S true, U pseudo, T unlabeled
  ResultRow row;
  ConsistencyRow consistency;
};

// Everything one replica computes, cached so that C1, C2 and C3 share
// encoders and pseudo-labels. A failed stage caches its error message.
class Replica {
 public:
  Replica(const ExperimentConfig& cfg, const Dataset& raw, std::uint64_t seed, ExperimentOutcome& out)
      : cfg_(cfg), seed_(seed), out_(out), data_(raw) {
    split_ = stratified_split(data_, cfg.fractions, seed);
    if (cfg.standardize_inputs) standardize(data_.features, split_.indices({Role::Supervised, Role::Unsupervised}));
    truth_ = LabelVector::from_labels(data_.labels);
  }

  std::uint64_t seed() const { return seed_; }
  const Dataset& data() const { return data_; }
  const SplitAssignment& split() const { return split_; }
  const LabelVector& truth() const { return truth_; }

  const EncoderParams& encoder(Arm arm) {
    return cached(encoders_, encoder_errors_, arm, [&] { return train_encoder(arm); });
  }

  const Propagation& propagation(Arm arm) {
    return cached(propagations_, propagation_errors_, arm, [&] { return propagate(arm); });
  }

  std::filesystem::path artifact(const std::string& stem, Arm arm, const char* ext) const {
    return cfg_.out_dir / (stem + "_" + arm_name(arm) + "_" + std::to_string(seed_) + ext);
  }

 private:
  template <class T, class Make>
  const T& cached(std::map<Arm, T>& done, std::map<Arm, std::string>& failed, Arm arm, Make make) {
    if (auto it = done.find(arm); it != done.end()) return it->second;
    if (auto it = failed.find(arm); it != failed.end()) throw Error(it->second);
    try {
      return done.emplace(arm, make()).first->second;
    } catch (const std::exception& e) {
      failed[arm] = e.what();
      throw;
    }
  }

  EncoderParams train_encoder(Arm arm) {
    StageTimer t(out_, "seed " + std::to_string(seed_) + " train " + arm_name(arm));
    TrainConfig tc = cfg_.train;
    tc.seed = derive_seed(seed_, kTrainStream + arm_tag(arm));
    TrainResult r;
    switch (arm) {
      case Arm::SimCLR: r = train(ContrastiveMode::SimCLR, data_, split_, tc); break;
      case Arm::SupCon: r = train(ContrastiveMode::SupCon, data_, split_, tc); break;
      case Arm::Combined: r = finetune_supcon(encoder(Arm::SimCLR), data_, split_, tc); break;
    }
    if (!cfg_.out_dir.empty()) save_encoder(artifact("encoder", arm, ".ckpt"), r.params, tc.describe());
    return r.params;
  }

  Propagation propagate(Arm arm) {
    const auto& enc = encoder(arm);
    StageTimer t(out_, "seed " + std::to_string(seed_) + " project+propagate " + arm_name(arm));
    const auto su = split_.indices({Role::Supervised, Role::Unsupervised});
    const Matrix latent = extract_features(enc, data_.features, su);
    ProjectionConfig pc = cfg_.projection;
    pc.seed = derive_seed(seed_, kProjectionStream + arm_tag(arm));
    const auto emb = tsne_project(latent, pc);

    LabelVector seeds(su.size()), local_truth(su.size());
    for (std::size_t j = 0; j < su.size(); ++j) {
      local_truth.set(j, truth_.values[su[j]], Provenance::True);
      if (split_.roles[su[j]] == Role::Supervised) seeds.set(j, truth_.values[su[j]], Provenance::True);
    }
    const auto forest = opfsemi_propagate(emb.coords, seeds);
    const auto local = forest_labels(forest, seeds);

    Propagation p;
    p.pseudo = LabelVector(data_.size());
    for (std::size_t j = 0; j < su.size(); ++j) p.pseudo.set(su[j], local.values[j], local.provenance[j]);
    const auto u = split_.indices(Role::Unsupervised);
    const auto rep = score(confusion(p.pseudo, truth_, u, static_cast<std::size_t>(data_.class_count)));
    p.row = {data_.name, experiment_code(Experiment::C2, arm), "opfsemi", seed_, rep.accuracy, rep.kappa};
    p.consistency = {data_.name,
                     arm_name(arm),
                     seed_,
                     knn_consistency(emb.coords, local_truth, cfg_.knn_k),
                     knn_consistency(latent, local_truth, cfg_.knn_k),
                     rep.accuracy,
                     rep.kappa};

    if (!cfg_.out_dir.empty()) {
      write_embedding_csv(artifact("embedding", arm, ".csv"), emb.coords, su, &local);
      emit_scatter(emb.coords, seeds, artifact("scatter", arm, ".svg"));
    }
    return p;
  }

  const ExperimentConfig& cfg_;
  std::uint64_t seed_;
  ExperimentOutcome& out_;
  Dataset data_;
  SplitAssignment split_;
  LabelVector truth_;
  std::map<Arm, EncoderParams> encoders_;
  std::map<Arm, std::string> encoder_errors_;
  std::map<Arm, Propagation> propagations_;
  std::map<Arm, std::string> propagation_errors_;
};

ResultRow scored_row(const Replica& r, const std::string& experiment, const std::string& classifier,
                     const LabelVector& pred, const std::vector<std::size_t>& rows) {
  const auto rep = score(confusion(pred, r.truth(), rows, static_cast<std::size_t>(r.data().class_count)));
  return {r.data().name, experiment, classifier, r.seed(), rep.accuracy, rep.kappa};
}

std::vector<ResultRow> c1_rows(Replica& r, Arm arm, const ExperimentConfig& cfg) {
  const auto& enc = r.encoder(arm);
  const auto s = r.split().indices(Role::Supervised);
  const auto t = r.split().indices(Role::Test);
  const Matrix f = extract_features(enc, r.data().features);
  const Matrix fs = f.select_rows(s);
  std::vector<Label> ls;
  for (auto i : s) ls.push_back(r.truth().values[i]);
  const auto code = experiment_code(Experiment::C1, arm);

  LinearConfig lc = cfg.linear;
  lc.seed = derive_seed(r.seed(), kLinearStream + arm_tag(arm));
  const auto linear = train_linear(fs, ls, lc);
  const auto opf = opfsup_train(fs, ls);
  return {scored_row(r, code, "linear", predict(linear, f), t),
          scored_row(r, code, "opfsup", opfsup_classify(opf, f), t)};
}

ResultRow c3_row(Replica& r, std::optional<Arm> arm, const ExperimentConfig& cfg) {
  SoftmaxConfig sc = cfg.softmax;
  sc.seed = derive_seed(r.seed(), kSoftmaxStream + (arm ? arm_tag(*arm) : 0));
  const auto k = static_cast<std::size_t>(r.data().class_count);
  SoftmaxModel model;
  if (arm) {
    const auto& p = r.propagation(*arm);
    model = train_softmax(r.data().features, p.pseudo, r.split().indices({Role::Supervised, Role::Unsupervised}), k, sc);
  } else {
    model = train_softmax(r.data().features, r.truth(), r.split().indices(Role::Supervised), k, sc);
  }
  return scored_row(r, experiment_code(Experiment::C3, arm), "softmax", predict(model, r.data().features),
                    r.split().indices(Role::Test));
}

std::vector<Arm> arms_for(Experiment e, ArmSelection sel) {
  std::vector<Arm> out;
  for (Arm a : kArms) {
    if (e == Experiment::C1 && a == Arm::Combined) continue;
    if (selects(sel, a)) out.push_back(a);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ls(line);
  std::string cell;
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw Error(path.string() + " line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw Error(path.string() + " line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

template <class Row, class Parse>
std::vector<Row> read_csv(const std::filesystem::path& path, const std::string& header, std::size_t columns,
                          Parse parse) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) throw Error(path.string() + ": unexpected header");
  std::vector<Row> rows;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns) throw Error(path.string() + " line " + std::to_string(n) + ": wrong column count");
    rows.push_back(parse(cells, n));
  }
  return rows;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string experiment_code(Experiment e, std::optional<Arm> arm) {
  switch (e) {
    case Experiment::C1:
      if (!arm || *arm == Arm::Combined) throw Error("C1 has SimCLR and SupCon arms only");
      return *arm == Arm::SimCLR ? "C1a" : "C1b";
    case Experiment::C2:
      if (!arm) throw Error("C2 needs an arm");
      return std::string("C2") + static_cast<char>('a' + static_cast<int>(*arm));
    case Experiment::C3:
      return std::string("C3") + static_cast<char>(arm ? 'b' + static_cast<int>(*arm) : 'a');
  }
  return "?";
}

Dataset load_dataset(const ExperimentConfig& cfg) {
  Dataset d;
  if (cfg.data_path.empty()) {
    d = generate_blobs(cfg.blobs);
  } else {
    d = load_features(cfg.data_path, format_for_path(cfg.data_path));
    if (!d.has_labels()) throw Error(cfg.data_path.string() + ": experiments need ground-truth labels");
  }
  d.name = cfg.dataset_name;
  d.validate();
  return d;
}

ExperimentOutcome run_experiments(const ExperimentConfig& cfg, const std::vector<Experiment>& which) {
  cfg.validate();
  ExperimentOutcome out;
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);
  const Dataset raw = load_dataset(cfg);

  std::vector<std::unique_ptr<Replica>> replicas;
  for (int r = 0; r < cfg.replicas; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    out.replica_seeds.push_back(seed);
    try {
      replicas.push_back(std::make_unique<Replica>(cfg, raw, seed, out));
    } catch (const std::exception& e) {
      replicas.push_back(nullptr);
      out.failures.push_back("seed " + std::to_string(seed) + " replica aborted: " + e.what());
    }
  }

  auto attempt = [&](const std::string& what, std::uint64_t seed, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      out.failures.push_back("seed " + std::to_string(seed) + " " + what + " failed: " + e.what());
    }
  };

  for (Experiment e : which) {
    for (auto& rep : replicas) {
      if (!rep) continue;
      const auto seed = rep->seed();
      if (e == Experiment::C3) {
        attempt("C3a baseline", seed, [&] { out.rows.push_back(c3_row(*rep, std::nullopt, cfg)); });
      }
      for (Arm arm : arms_for(e, cfg.arms)) {
        const auto label = experiment_code(e, arm) + " " + arm_name(arm);
        attempt(label, seed, [&] {
          switch (e) {
            case Experiment::C1: {
              auto rows = c1_rows(*rep, arm, cfg);
              out.rows.insert(out.rows.end(), rows.begin(), rows.end());
              break;
            }
            case Experiment::C2: {
              const auto& p = rep->propagation(arm);
              out.rows.push_back(p.row);
              out.consistency.push_back(p.consistency);
              break;
            }
            case Experiment::C3: out.rows.push_back(c3_row(*rep, arm, cfg)); break;
          }
        });
      }
    }
  }
  return out;
}

ExperimentOutcome run_c1(const ExperimentConfig& config) { return run_experiments(config, {Experiment::C1}); }
ExperimentOutcome run_c2(const ExperimentConfig& config) { return run_experiments(config, {Experiment::C2}); }
ExperimentOutcome run_c3(const ExperimentConfig& config) { return run_experiments(config, {Experiment::C3}); }

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "dataset,experiment,classifier,seed,accuracy,kappa\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.experiment << ',' << r.classifier << ',' << r.seed << ',' << fixed6(r.accuracy)
        << ',' << fixed6(r.kappa) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  return read_csv<ResultRow>(path, "dataset,experiment,classifier,seed,accuracy,kappa", 6,
                             [&](const std::vector<std::string>& c, std::size_t n) {
                               return ResultRow{c[0], c[1], c[2], parse_u64(c[3], path, n),
                                                parse_double(c[4], path, n), parse_double(c[5], path, n)};
                             });
}

void write_consistency_csv(const std::filesystem::path& path, const std::vector<ConsistencyRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "dataset,arm,seed,embedding_knn,latent_knn,propagation_accuracy,propagation_kappa\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.arm << ',' << r.seed << ',' << fixed6(r.embedding_consistency) << ','
        << fixed6(r.latent_consistency) << ',' << fixed6(r.propagation_accuracy) << ',' << fixed6(r.propagation_kappa)
        << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<ConsistencyRow> read_consistency_csv(const std::filesystem::path& path) {
  return read_csv<ConsistencyRow>(
      path, "dataset,arm,seed,embedding_knn,latent_knn,propagation_accuracy,propagation_kappa", 7,
      [&](const std::vector<std::string>& c, std::size_t n) {
        return ConsistencyRow{c[0], c[1], parse_u64(c[2], path, n), parse_double(c[3], path, n),
                              parse_double(c[4], path, n), parse_double(c[5], path, n), parse_double(c[6], path, n)};
      });
}

std::vector<Aggregate> aggregate(const std::vector<ResultRow>& rows) {
  std::vector<Aggregate> out;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> samples;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) {
      return a.dataset == r.dataset && a.experiment == r.experiment && a.classifier == r.classifier;
    });
    if (it == out.end()) {
      out.push_back({r.dataset, r.experiment, r.classifier});
      samples.emplace_back();
      it = out.end() - 1;
    }
    auto& s = samples[static_cast<std::size_t>(it - out.begin())];
    s.first.push_back(r.accuracy);
    s.second.push_back(r.kappa);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].count = samples[i].first.size();
    out[i].accuracy_mean = mean_of(samples[i].first);
    out[i].accuracy_std = sample_std(samples[i].first);
    out[i].kappa_mean = mean_of(samples[i].second);
    out[i].kappa_std = sample_std(samples[i].second);
  }
  return out;
}

std::string format_aggregates(const std::vector<Aggregate>& aggs) {
  std::string s = "dataset,experiment,classifier,replicas,accuracy_mean,accuracy_std,kappa_mean,kappa_std\n";
  for (const auto& a : aggs) {
    s += a.dataset + ',' + a.experiment + ',' + a.classifier + ',' + std::to_string(a.count) + ',' +
         fixed6(a.accuracy_mean) + ',' + fixed6(a.accuracy_std) + ',' + fixed6(a.kappa_mean) + ',' +
         fixed6(a.kappa_std) + '\n';
  }
  return s;
}

CorrelationReport correlation_report(const std::vector<ResultRow>& rows,
                                     const std::vector<ConsistencyRow>& consistency) {
  struct Cell {
    std::vector<double> vs, prop, cp;
  };
  std::map<std::pair<std::string, std::string>, Cell> cells;
  for (const auto& c : consistency) {
    auto& cell = cells[{c.dataset, c.arm}];
    cell.vs.push_back(c.embedding_consistency);
    cell.prop.push_back(c.propagation_kappa);
  }
  for (const auto& r : rows) {
    if (r.experiment.size() != 3 || r.experiment.compare(0, 2, "C3") != 0 || r.experiment[2] == 'a') continue;
    const auto arm = arm_name(static_cast<Arm>(r.experiment[2] - 'b'));
    if (auto it = cells.find({r.dataset, arm}); it != cells.end()) it->second.cp.push_back(r.kappa);
  }
  std::vector<double> vs, prop, cp;
  for (const auto& [key, cell] : cells) {
    if (cell.cp.empty()) continue;
    vs.push_back(mean_of(cell.vs));
    prop.push_back(mean_of(cell.prop));
    cp.push_back(mean_of(cell.cp));
  }
  if (vs.size() < 5) {
    throw Error("correlation_report: need at least 5 (dataset, arm) cells with C2 and C3 results, have " +
                std::to_string(vs.size()));
  }
  return {vs.size(), spearman(vs, prop), spearman(vs, cp)};
}

std::string CorrelationReport::describe() const {
  auto show = [](const std::optional<double>& v) { return v ? fixed6(*v) : std::string("undefined (constant series)"); };
  return "cells=" + std::to_string(cells) + "\nspearman(knn_consistency, propagation_kappa)=" +
         show(vs_vs_propagation) + "\nspearman(knn_consistency, classifier_kappa)=" + show(vs_vs_classifier) + "\n";
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  static const char* digits = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex += digits[md[i] >> 4];
    hex += digits[md[i] & 15];
  }
  return hex;
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const ExperimentOutcome& outcome) {
  const auto path = dir / "manifest.txt";
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path() != path) files.push_back(entry.path().lexically_relative(dir));
  }
  std::sort(files.begin(), files.end());

  std::ostringstream m;
  m << "version: " << kVersion << "\n\n# resolved config\n" << config.to_ini() << "\n# seeds\nbase = " << config.seed
    << "\nreplicas =";
  for (auto s : outcome.replica_seeds) m << ' ' << s;
  m << "\n\n# stage wall-clock (s)\n";
  for (const auto& t : outcome.timings) m << t.stage << ": " << shortest(t.seconds) << '\n';
  m << "\n# failures\n";
  if (outcome.failures.empty()) m << "none\n";
  for (const auto& f : outcome.failures) m << f << '\n';
  m << "\n# files (sha256)\n";
  for (const auto& f : files) m << sha256_file(dir / f) << "  " << f.generic_string() << '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << m.str();
  if (!out) throw Error("write failed: " + path.string());
}

void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const ExperimentOutcome& outcome) {
  std::filesystem::create_directories(dir);
  write_results_csv(dir / "results.csv", outcome.rows);
  write_consistency_csv(dir / "consistency.csv", outcome.consistency);
  {
    std::ofstream s(dir / "summary.csv", std::ios::binary);
    if (!s) throw Error("cannot write " + (dir / "summary.csv").string());
    s << format_aggregates(aggregate(outcome.rows));
  }
  write_manifest(dir, config, outcome);
}

void write_labels_csv(const std::filesystem::path& path, const LabelVector& labels,
                      std::span<const std::size_t> node_ids) {
  if (!node_ids.empty() && node_ids.size() != labels.size()) throw Error("write_labels_csv: node id count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "node,label,provenance\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels.labeled(i)) continue;
    out << (node_ids.empty() ? i : node_ids[i]) << ',' << labels.values[i] << ','
        << (labels.provenance[i] == Provenance::True ? 'T' : 'P') << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

LabelVector read_labels_csv(const std::filesystem::path& path, std::size_t n) {
  LabelVector labels(n);
  const auto rows = read_csv<std::vector<std::string>>(
      path, "node,label,provenance", 3, [](const std::vector<std::string>& c, std::size_t) { return c; });
  std::size_t line = 1;
  for (const auto& c : rows) {
    ++line;
    const auto node = parse_u64(c[0], path, line);
    if (node >= n) throw Error(path.string() + " line " + std::to_string(line) + ": node out of range");
    if (c[2] != "T" && c[2] != "P") throw Error(path.string() + " line " + std::to_string(line) + ": bad provenance");
    labels.set(node, static_cast<Label>(parse_u64(c[1], path, line)),
               c[2] == "T" ? Provenance::True : Provenance::Pseudo);
  }
  return labels;
}

}  // namespace epl
