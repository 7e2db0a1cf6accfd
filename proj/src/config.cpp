#include "epl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <type_traits>

namespace epl {
namespace {

namespace pt = boost::property_tree;

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw Error("config: " + key + " = '" + text + "' is not a valid number");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error("config: " + key + " = '" + text + "' is not a boolean");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

// Setter parsing a numeric member with the member's own type.
#define EPL_NUMBER(member)                                                   \
  [](ExperimentConfig& c, const std::string& k, const std::string& v) {      \
    c.member = parse_number<std::remove_reference_t<decltype(c.member)>>(k, v); \
  }

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data.path", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.data_path = v; }},
      {"data.name", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.dataset_name = v; }},
      {"data.classes", EPL_NUMBER(blobs.classes)},
      {"data.per_class", EPL_NUMBER(blobs.per_class)},
      {"data.dims", EPL_NUMBER(blobs.dims)},
      {"data.spread", EPL_NUMBER(blobs.spread)},
      {"data.center_dist", EPL_NUMBER(blobs.center_dist)},
      {"data.seed", EPL_NUMBER(blobs.seed)},
      {"split.supervised", EPL_NUMBER(fractions.supervised)},
      {"split.unsupervised", EPL_NUMBER(fractions.unsupervised)},
      {"split.test", EPL_NUMBER(fractions.test)},
      {"experiment.seed", EPL_NUMBER(seed)},
      {"experiment.replicas", EPL_NUMBER(replicas)},
      {"experiment.mode",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.arms = parse_arm_selection(v); }},
      {"experiment.standardize",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.standardize_inputs = parse_bool(k, v); }},
      {"experiment.out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"contrastive.epochs", EPL_NUMBER(train.epochs)},
      {"contrastive.batch_size", EPL_NUMBER(train.batch_size)},
      {"contrastive.temperature", EPL_NUMBER(train.temperature)},
      {"contrastive.learning_rate", EPL_NUMBER(train.learning_rate)},
      {"contrastive.min_learning_rate", EPL_NUMBER(train.min_learning_rate)},
      {"contrastive.weight_decay", EPL_NUMBER(train.weight_decay)},
      {"contrastive.beta1", EPL_NUMBER(train.beta1)},
      {"contrastive.beta2", EPL_NUMBER(train.beta2)},
      {"contrastive.epsilon", EPL_NUMBER(train.epsilon)},
      {"contrastive.validation_fraction", EPL_NUMBER(train.validation_fraction)},
      {"contrastive.noise", EPL_NUMBER(train.augmentation.noise)},
      {"contrastive.dropout", EPL_NUMBER(train.augmentation.dropout)},
      {"contrastive.hidden", EPL_NUMBER(train.shape.hidden)},
      {"contrastive.latent", EPL_NUMBER(train.shape.latent)},
      {"contrastive.head_hidden", EPL_NUMBER(train.shape.head_hidden)},
      {"contrastive.head_out", EPL_NUMBER(train.shape.head_out)},
      {"contrastive.init",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "scratch") c.train.init = InitMode::Scratch;
         else if (v == "warm_start") c.train.init = InitMode::WarmStart;
         else throw Error("config: " + k + " must be scratch or warm_start");
       }},
      {"contrastive.checkpoint",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.train.warm_start_checkpoint = v; }},
      {"projection.perplexity", EPL_NUMBER(projection.perplexity)},
      {"projection.iterations", EPL_NUMBER(projection.iterations)},
      {"projection.learning_rate", EPL_NUMBER(projection.learning_rate)},
      {"projection.early_exaggeration", EPL_NUMBER(projection.early_exaggeration)},
      {"projection.exaggeration_iterations", EPL_NUMBER(projection.exaggeration_iterations)},
      {"projection.initial_momentum", EPL_NUMBER(projection.initial_momentum)},
      {"projection.final_momentum", EPL_NUMBER(projection.final_momentum)},
      {"projection.momentum_switch", EPL_NUMBER(projection.momentum_switch)},
      {"projection.init_sigma", EPL_NUMBER(projection.init_sigma)},
      {"projection.entropy_tolerance", EPL_NUMBER(projection.entropy_tolerance)},
      {"linear.lambda", EPL_NUMBER(linear.lambda)},
      {"linear.epochs", EPL_NUMBER(linear.epochs)},
      {"linear.step", EPL_NUMBER(linear.step)},
      {"softmax.hidden", EPL_NUMBER(softmax.hidden)},
      {"softmax.epochs", EPL_NUMBER(softmax.epochs)},
      {"softmax.learning_rate", EPL_NUMBER(softmax.learning_rate)},
      {"softmax.momentum", EPL_NUMBER(softmax.momentum)},
      {"softmax.batch_size", EPL_NUMBER(softmax.batch_size)},
      {"metrics.knn_k", EPL_NUMBER(knn_k)},
  };
  return table;
}

#undef EPL_NUMBER

}  // namespace

std::string arm_name(Arm a) {
  switch (a) {
    case Arm::SimCLR: return "simclr";
    case Arm::SupCon: return "supcon";
    case Arm::Combined: return "combined";
  }
  return "?";
}

ArmSelection parse_arm_selection(const std::string& s) {
  if (s == "simclr") return ArmSelection::SimCLR;
  if (s == "supcon") return ArmSelection::SupCon;
  if (s == "both") return ArmSelection::Both;
  if (s == "combined") return ArmSelection::Combined;
  throw Error("mode must be one of simclr, supcon, both, combined (got '" + s + "')");
}

std::string to_string(ArmSelection s) {
  switch (s) {
    case ArmSelection::SimCLR: return "simclr";
    case ArmSelection::SupCon: return "supcon";
    case ArmSelection::Both: return "both";
    case ArmSelection::Combined: return "combined";
  }
  return "?";
}

bool selects(ArmSelection s, Arm a) {
  switch (s) {
    case ArmSelection::Both: return true;
    case ArmSelection::SimCLR: return a == Arm::SimCLR;
    case ArmSelection::SupCon: return a == Arm::SupCon;
    case ArmSelection::Combined: return a == Arm::Combined;
  }
  return false;
}

void ExperimentConfig::validate() const {
  if (replicas < 1) throw Error("config: experiment.replicas must be at least 1");
  if (data_path.empty()) {
    if (blobs.classes < 2) throw Error("config: data.classes must be at least 2");
    if (blobs.per_class < 3) throw Error("config: data.per_class must be at least 3");
    if (blobs.dims < 1) throw Error("config: data.dims must be positive");
    if (!(blobs.spread > 0.0) || !(blobs.center_dist >= 0.0)) throw Error("config: data.spread must be positive");
  } else if (!std::filesystem::exists(data_path)) {
    throw Error("config: data.path " + data_path.string() + " does not exist");
  }
  const double total = fractions.supervised + fractions.unsupervised + fractions.test;
  if (!(fractions.supervised > 0.0) || !(fractions.unsupervised > 0.0) || !(fractions.test > 0.0) ||
      std::abs(total - 1.0) > 1e-9) {
    throw Error("config: split fractions must be positive and sum to 1");
  }
  train.validate();
  if (train.init == InitMode::WarmStart && !std::filesystem::exists(train.warm_start_checkpoint)) {
    throw Error("config: warm start checkpoint " + train.warm_start_checkpoint.string() + " does not exist");
  }
  if (!(projection.perplexity > 1.0) || projection.iterations < 1) {
    throw Error("config: projection.perplexity must exceed 1 and iterations be positive");
  }
  if (!(linear.step > 0.0) || linear.epochs < 0 || linear.lambda < 0.0) throw Error("config: invalid [linear] settings");
  if (softmax.hidden == 0 || softmax.batch_size == 0 || softmax.epochs < 0) throw Error("config: invalid [softmax] settings");
  if (knn_k == 0) throw Error("config: metrics.knn_k must be positive");
}

std::string ExperimentConfig::to_ini() const {
  std::ostringstream s;
  s << "[data]\n";
  if (!data_path.empty()) s << "path = " << data_path.string() << '\n';
  s << "name = " << dataset_name << "\nclasses = " << blobs.classes << "\nper_class = " << blobs.per_class
    << "\ndims = " << blobs.dims << "\nspread = " << fmt(blobs.spread) << "\ncenter_dist = " << fmt(blobs.center_dist)
    << "\nseed = " << blobs.seed << "\n\n[split]\nsupervised = " << fmt(fractions.supervised)
    << "\nunsupervised = " << fmt(fractions.unsupervised) << "\ntest = " << fmt(fractions.test)
    << "\n\n[experiment]\nseed = " << seed << "\nreplicas = " << replicas << "\nmode = " << to_string(arms)
    << "\nstandardize = " << (standardize_inputs ? "true" : "false") << "\nout = " << out_dir.string()
    << "\n\n[contrastive]\nepochs = " << train.epochs << "\nbatch_size = " << train.batch_size
    << "\ntemperature = " << fmt(train.temperature) << "\nlearning_rate = " << fmt(train.learning_rate)
    << "\nmin_learning_rate = " << fmt(train.min_learning_rate) << "\nweight_decay = " << fmt(train.weight_decay)
    << "\nbeta1 = " << fmt(train.beta1) << "\nbeta2 = " << fmt(train.beta2) << "\nepsilon = " << fmt(train.epsilon)
    << "\nvalidation_fraction = " << fmt(train.validation_fraction) << "\nnoise = " << fmt(train.augmentation.noise)
    << "\ndropout = " << fmt(train.augmentation.dropout) << "\nhidden = " << train.shape.hidden
    << "\nlatent = " << train.shape.latent << "\nhead_hidden = " << train.shape.head_hidden
    << "\nhead_out = " << train.shape.head_out
    << "\ninit = " << (train.init == InitMode::Scratch ? "scratch" : "warm_start") << '\n';
  if (!train.warm_start_checkpoint.empty()) s << "checkpoint = " << train.warm_start_checkpoint.string() << '\n';
  s << "\n[projection]\nperplexity = " << fmt(projection.perplexity) << "\niterations = " << projection.iterations
    << "\nlearning_rate = " << fmt(projection.learning_rate)
    << "\nearly_exaggeration = " << fmt(projection.early_exaggeration)
    << "\nexaggeration_iterations = " << projection.exaggeration_iterations
    << "\ninitial_momentum = " << fmt(projection.initial_momentum)
    << "\nfinal_momentum = " << fmt(projection.final_momentum) << "\nmomentum_switch = " << projection.momentum_switch
    << "\ninit_sigma = " << fmt(projection.init_sigma) << "\nentropy_tolerance = " << fmt(projection.entropy_tolerance)
    << "\n\n[linear]\nlambda = " << fmt(linear.lambda) << "\nepochs = " << linear.epochs << "\nstep = " << fmt(linear.step)
    << "\n\n[softmax]\nhidden = " << softmax.hidden << "\nepochs = " << softmax.epochs
    << "\nlearning_rate = " << fmt(softmax.learning_rate) << "\nmomentum = " << fmt(softmax.momentum)
    << "\nbatch_size = " << softmax.batch_size << "\n\n[metrics]\nknn_k = " << knn_k << '\n';
  return s.str();
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error("config: key '" + section + "' must live inside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = table.find(full);
      if (it == table.end()) throw Error("config: unknown key " + full);
      it->second(cfg, full, value.get_value<std::string>());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace epl
