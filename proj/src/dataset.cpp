#include "epl/dataset.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace epl {
namespace {

constexpr char kBinaryMagic[4] = {'E', 'P', 'L', '1'};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& cell, std::size_t line, std::size_t column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                ": malformed number '" + cell + "'");
  }
  if (!std::isfinite(v)) {
    throw Error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                ": non-finite value '" + cell + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("truncated binary dataset");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("truncated binary dataset");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return std::bit_cast<double>(v);
}

Dataset load_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind('#', 0) != 0) {
    throw Error("line 1: expected header '# d=<dims> labels=<0|1> k=<classes>'");
  }
  long dims = -1, has_labels = -1, k = -1;
  {
    std::istringstream hs(line.substr(1));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const auto key = tok.substr(0, eq);
      const long val = std::strtol(tok.c_str() + eq + 1, nullptr, 10);
      if (key == "d") dims = val;
      else if (key == "labels") has_labels = val;
      else if (key == "k") k = val;
    }
  }
  if (dims < 1 || (has_labels != 0 && has_labels != 1)) {
    throw Error("line 1: header must declare d>=1 and labels=0|1");
  }
  const std::size_t expected = static_cast<std::size_t>(dims) + (has_labels ? 1 : 0);

  Dataset data;
  data.name = path.stem().string();
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != expected) {
      throw Error("line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                  " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(dims); ++c) {
      values.push_back(parse_double(cells[c], line_no, c + 1));
    }
    if (has_labels) {
      long lab = 0;
      const auto& s = cells.back();
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), lab);
      if (ec != std::errc() || ptr != s.data() + s.size() || lab < 0) {
        throw Error("line " + std::to_string(line_no) + ", column " + std::to_string(expected) +
                    ": malformed label '" + s + "'");
      }
      data.labels.push_back(static_cast<Label>(lab));
    }
  }
  const std::size_t n = values.size() / static_cast<std::size_t>(dims);
  data.features = Matrix(n, static_cast<std::size_t>(dims));
  data.features.values() = std::move(values);
  if (has_labels) {
    const int max_label = data.labels.empty() ? -1 : *std::max_element(data.labels.begin(), data.labels.end());
    data.class_count = std::max<int>(static_cast<int>(k), max_label + 1);
  }
  data.validate();
  return data;
}

Dataset load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kBinaryMagic, 4) != 0) {
    throw Error(path.string() + ": bad magic, expected EPL1");
  }
  const std::uint32_t n = get_u32(in);
  const std::uint32_t d = get_u32(in);
  char flag = 0;
  if (!in.read(&flag, 1)) throw Error("truncated binary dataset");
  Dataset data;
  data.name = path.stem().string();
  data.features = Matrix(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double v = get_f64(in);
      if (!std::isfinite(v)) {
        throw Error("row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) +
                    ": non-finite value");
      }
      data.features(r, c) = v;
    }
  }
  if (flag) {
    data.labels.resize(n);
    int max_label = -1;
    for (std::size_t r = 0; r < n; ++r) {
      data.labels[r] = static_cast<Label>(get_u32(in));
      max_label = std::max(max_label, data.labels[r]);
    }
    data.class_count = max_label + 1;
  }
  data.validate();
  return data;
}

// Largest-remainder apportionment of `total` over `quota` (which sums to
// total). `minimum` applies only to entries with a positive quota.
std::vector<long> apportion(const std::vector<double>& quota, long total, long minimum) {
  const std::size_t k = quota.size();
  std::vector<long> alloc(k, 0);
  long sum = 0;
  for (std::size_t c = 0; c < k; ++c) {
    alloc[c] = static_cast<long>(std::floor(quota[c]));
    if (quota[c] > 0.0) alloc[c] = std::max(alloc[c], minimum);
    sum += alloc[c];
  }
  while (sum < total) {
    std::size_t best = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (quota[c] <= 0.0) continue;
      if (best == k || quota[c] - alloc[c] > quota[best] - alloc[best]) best = c;
    }
    ++alloc[best];
    ++sum;
  }
  while (sum > total) {
    std::size_t best = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (alloc[c] <= std::max(minimum, 0L) || quota[c] <= 0.0) continue;
      if (best == k || alloc[c] - quota[c] > alloc[best] - quota[best]) best = c;
    }
    if (best == k) break;  // every class is at its minimum
    --alloc[best];
    --sum;
  }
  return alloc;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 2) throw Error("dataset needs at least 2 samples");
  if (features.cols() < 1) throw Error("dataset needs at least 1 dimension");
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t c = 0; c < features.cols(); ++c) {
      if (!std::isfinite(features(r, c))) {
        throw Error("row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) +
                    ": non-finite value");
      }
    }
  }
  if (!labels.empty()) {
    if (labels.size() != features.rows()) throw Error("label count does not match sample count");
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] < 0 || labels[r] >= class_count) {
        throw Error("row " + std::to_string(r + 1) + ": label " + std::to_string(labels[r]) +
                    " outside [0, " + std::to_string(class_count) + ")");
      }
    }
  }
}

FileFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".bin" ? FileFormat::RawBinary : FileFormat::DelimitedText;
}

Dataset load_features(const std::filesystem::path& path, FileFormat format) {
  return format == FileFormat::RawBinary ? load_binary(path) : load_text(path);
}

void save_features(const Dataset& data, const std::filesystem::path& path, FileFormat format) {
  data.validate();
  if (format == FileFormat::RawBinary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(kBinaryMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    put_u32(out, static_cast<std::uint32_t>(data.dims()));
    const char flag = data.has_labels() ? 1 : 0;
    out.write(&flag, 1);
    for (double v : data.features.values()) put_f64(out, v);
    for (Label l : data.labels) put_u32(out, static_cast<std::uint32_t>(l));
    if (!out) throw Error("write failed: " + path.string());
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# d=" << data.dims() << " labels=" << (data.has_labels() ? 1 : 0)
      << " k=" << data.class_count << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < data.dims(); ++c) {
      if (c) out << ',';
      out << format_double(data.features(r, c));
    }
    if (data.has_labels()) out << ',' << data.labels[r];
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

Dataset generate_blobs(const BlobSpec& spec) {
  if (spec.classes < 2) throw Error("generate_blobs: need at least 2 classes");
  if (spec.per_class < 2) throw Error("generate_blobs: need at least 2 samples per class");
  if (spec.dims < 1) throw Error("generate_blobs: need at least 1 dimension");
  if (!(spec.spread > 0.0)) throw Error("generate_blobs: spread must be positive");
  if (spec.center_dist < 0.0) throw Error("generate_blobs: center_dist must be non-negative");

  Rng rng(spec.seed);
  const auto k = static_cast<std::size_t>(spec.classes);
  const auto d = static_cast<std::size_t>(spec.dims);
  const double per_axis = std::ceil(std::pow(static_cast<double>(k), 1.0 / static_cast<double>(d)));
  const double half_side = spec.center_dist * (per_axis + 1.0);

  Matrix centers(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      for (std::size_t j = 0; j < d; ++j) centers(c, j) = rng.uniform(-half_side, half_side);
      placed = true;
      for (std::size_t o = 0; o < c && placed; ++o) {
        if (euclidean(centers.row(c), centers.row(o)) < spec.center_dist) placed = false;
      }
    }
    if (!placed) {
      throw Error("generate_blobs: could not place center " + std::to_string(c) + " after " +
                  std::to_string(spec.max_attempts) + " attempts");
    }
  }

  Dataset data;
  data.class_count = spec.classes;
  data.features = Matrix(k * static_cast<std::size_t>(spec.per_class), d);
  data.labels.resize(data.features.rows());
  std::size_t r = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (int i = 0; i < spec.per_class; ++i, ++r) {
      for (std::size_t j = 0; j < d; ++j) {
        data.features(r, j) = centers(c, j) + spec.spread * rng.normal();
      }
      data.labels[r] = static_cast<Label>(c);
    }
  }
  std::ostringstream name;
  name << "blobs-k" << spec.classes << "-n" << spec.per_class << "-d" << spec.dims << "-s"
       << spec.spread << "-c" << spec.center_dist << "-seed" << spec.seed;
  data.name = name.str();
  return data;
}

char role_code(Role r) {
  switch (r) {
    case Role::Supervised: return 'S';
    case Role::Unsupervised: return 'U';
    case Role::Test: return 'T';
  }
  return '?';
}

Role role_from_code(char c) {
  switch (c) {
    case 'S': return Role::Supervised;
    case 'U': return Role::Unsupervised;
    case 'T': return Role::Test;
    default: throw Error(std::string("unknown role code '") + c + "'");
  }
}

std::vector<std::size_t> SplitAssignment::indices(Role r) const { return indices({r}); }

std::vector<std::size_t> SplitAssignment::indices(std::initializer_list<Role> rs) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (std::find(rs.begin(), rs.end(), roles[i]) != rs.end()) out.push_back(i);
  }
  return out;
}

std::size_t SplitAssignment::count(Role r) const {
  return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), r));
}

SplitAssignment stratified_split(const Dataset& data, SplitFractions fr, std::uint64_t seed) {
  if (!data.has_labels()) throw Error("stratified_split: dataset has no labels");
  if (!(fr.supervised > 0.0 && fr.unsupervised > 0.0 && fr.test > 0.0)) {
    throw Error("stratified_split: fractions must be positive");
  }
  if (std::abs(fr.supervised + fr.unsupervised + fr.test - 1.0) > 1e-9) {
    throw Error("stratified_split: fractions must sum to 1");
  }
  const std::size_t n = data.size();
  const auto k = static_cast<std::size_t>(data.class_count);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(data.labels[i])].push_back(i);
  for (std::size_t c = 0; c < k; ++c) {
    if (!members[c].empty() && members[c].size() < 3) {
      throw Error("stratified_split: class " + std::to_string(c) + " has " +
                  std::to_string(members[c].size()) + " samples, too small to appear in S, U and T");
    }
  }

  const double dn = static_cast<double>(n);
  // Small slack keeps exact products such as 0.01 * 300 from rounding up.
  const long t_total = static_cast<long>(std::floor(fr.test * dn + 0.5 + 1e-9));
  const long s_total = static_cast<long>(std::ceil(fr.supervised * dn - 1e-9));
  std::vector<double> t_quota(k), s_quota(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double share = static_cast<double>(members[c].size()) / dn;
    t_quota[c] = static_cast<double>(t_total) * share;
    s_quota[c] = static_cast<double>(s_total) * share;
  }
  auto t_alloc = apportion(t_quota, t_total, 0);
  auto s_alloc = apportion(s_quota, s_total, 1);

  // T and S each land within one sample of their quota, but the two errors
  // can stack in U. Trade single T or S units between classes until no U
  // count is a full sample off, or no trade keeps T and S within bounds.
  const double u_total = dn - static_cast<double>(t_total + s_total);
  auto u_error = [&](std::size_t c) {
    const double size = static_cast<double>(members[c].size());
    return size - static_cast<double>(t_alloc[c] + s_alloc[c]) - u_total * size / dn;
  };
  for (std::size_t round = 0; round < 4 * k; ++round) {
    std::size_t hi = k, lo = k;
    for (std::size_t c = 0; c < k; ++c) {
      if (members[c].empty()) continue;
      if (hi == k || u_error(c) > u_error(hi)) hi = c;
      if (lo == k || u_error(c) < u_error(lo)) lo = c;
    }
    if (hi == k || (u_error(hi) < 1.0 && u_error(lo) > -1.0) || u_error(hi) - u_error(lo) < 2.0) break;
    const auto dl = static_cast<double>(t_alloc[lo]), dh = static_cast<double>(t_alloc[hi]);
    if (dl > t_quota[lo] && dh < t_quota[hi]) {
      --t_alloc[lo];
      ++t_alloc[hi];
    } else if (s_alloc[lo] > 1 && static_cast<double>(s_alloc[lo]) > s_quota[lo] &&
               static_cast<double>(s_alloc[hi]) < s_quota[hi]) {
      --s_alloc[lo];
      ++s_alloc[hi];
    } else {
      break;
    }
  }

  SplitAssignment split;
  split.seed = seed;
  split.fractions = fr;
  split.roles.assign(n, Role::Unsupervised);
  Rng rng(seed);
  for (std::size_t c = 0; c < k; ++c) {
    auto idx = members[c];
    if (idx.empty()) continue;
    const auto t_c = static_cast<std::size_t>(t_alloc[c]);
    const auto s_c = static_cast<std::size_t>(s_alloc[c]);
    if (t_c + s_c >= idx.size()) {
      throw Error("stratified_split: class " + std::to_string(c) +
                  " too small to receive one sample in each part");
    }
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      split.roles[idx[i]] = i < t_c ? Role::Test : (i < t_c + s_c ? Role::Supervised : Role::Unsupervised);
    }
  }
  return split;
}

void save_split(const SplitAssignment& split, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# seed=" << split.seed << " s=" << format_double(split.fractions.supervised)
      << " u=" << format_double(split.fractions.unsupervised)
      << " t=" << format_double(split.fractions.test) << '\n';
  out << "index,role\n";
  for (std::size_t i = 0; i < split.roles.size(); ++i) out << i << ',' << role_code(split.roles[i]) << '\n';
}

SplitAssignment load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  SplitAssignment split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line == "index,role") continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        if (key == "seed") split.seed = std::stoull(val);
        else if (key == "s") split.fractions.supervised = std::stod(val);
        else if (key == "u") split.fractions.unsupervised = std::stod(val);
        else if (key == "t") split.fractions.test = std::stod(val);
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma + 2 != line.size()) {
      throw Error("line " + std::to_string(line_no) + ": expected 'index,role'");
    }
    const auto index = std::stoull(line.substr(0, comma));
    if (index != split.roles.size()) {
      throw Error("line " + std::to_string(line_no) + ": indices must be consecutive from 0");
    }
    split.roles.push_back(role_from_code(line[comma + 1]));
  }
  return split;
}

LabelVector merge_labels(const SplitAssignment& split, const LabelVector& true_s,
                         const LabelVector& pseudo_u) {
  const std::size_t n = split.roles.size();
  if (true_s.size() != n || pseudo_u.size() != n) throw Error("merge_labels: length mismatch");
  LabelVector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (split.roles[i]) {
      case Role::Supervised:
        if (!true_s.labeled(i)) throw Error("merge_labels: missing true label on supervised index " + std::to_string(i));
        out.set(i, true_s.values[i], Provenance::True);
        break;
      case Role::Unsupervised:
        if (!pseudo_u.labeled(i)) throw Error("merge_labels: missing pseudo-label on unsupervised index " + std::to_string(i));
        out.set(i, pseudo_u.values[i], Provenance::Pseudo);
        break;
      case Role::Test:
        break;
    }
  }
  return out;
}

void standardize(Matrix& m, std::span<const std::size_t> reference_rows) {
  std::vector<std::size_t> all;
  if (reference_rows.empty()) {
    all.resize(m.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    reference_rows = all;
  }
  const double count = static_cast<double>(reference_rows.size());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (auto r : reference_rows) mean += m(r, c);
    mean /= count;
    double var = 0.0;
    for (auto r : reference_rows) var += (m(r, c) - mean) * (m(r, c) - mean);
    const double sd = std::sqrt(var / count);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      m(r, c) -= mean;
      if (sd > 0.0) m(r, c) /= sd;
    }
  }
}

}  // namespace epl
