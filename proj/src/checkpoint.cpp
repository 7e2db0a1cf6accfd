#include "epl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace epl {
namespace {

constexpr char kMagic[8] = {'E', 'P', 'L', 'C', 'K', 'P', 'T', '1'};

template <class U>
void put(std::ostream& out, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <class U>
U get(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(U))) throw Error(path.string() + ": truncated checkpoint");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.kind));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.shape.size()));
  for (auto s : ckpt.shape) put<std::uint32_t>(out, s);
  put<std::uint64_t>(out, ckpt.values.size());
  for (double v : ckpt.values) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error(path.string() + ": not an EPLCKPT1 checkpoint");
  }
  Checkpoint c;
  c.kind = static_cast<ModelKind>(get<std::uint32_t>(in, path));
  const auto shape_count = get<std::uint32_t>(in, path);
  if (shape_count > 64) throw Error(path.string() + ": implausible shape table");
  c.shape.resize(shape_count);
  for (auto& s : c.shape) s = get<std::uint32_t>(in, path);
  const auto count = get<std::uint64_t>(in, path);
  if (count > (std::uint64_t{1} << 32)) throw Error(path.string() + ": implausible value count");
  c.values.resize(count);
  for (auto& v : c.values) v = std::bit_cast<double>(get<std::uint64_t>(in, path));
  return c;
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".manifest.txt";
  return p;
}

void save_encoder(const std::filesystem::path& path, const EncoderParams& params,
                  const std::string& manifest_text) {
  Checkpoint c;
  c.kind = ModelKind::Encoder;
  const auto& s = params.shape;
  for (auto v : {s.input, s.hidden, s.latent, s.head_hidden, s.head_out}) {
    c.shape.push_back(static_cast<std::uint32_t>(v));
  }
  c.values = params.values;
  write_checkpoint(path, c);
  std::ofstream side(sidecar_path(path));
  if (!side) throw Error("cannot write " + sidecar_path(path).string());
  side << "format=EPLCKPT1 kind=encoder\n" << manifest_text;
  if (!manifest_text.empty() && manifest_text.back() != '\n') side << '\n';
}

EncoderParams load_encoder(const std::filesystem::path& path) {
  const auto c = read_checkpoint(path);
  if (c.kind != ModelKind::Encoder || c.shape.size() != 5) {
    throw Error(path.string() + ": checkpoint does not hold an encoder");
  }
  EncoderShape s{c.shape[0], c.shape[1], c.shape[2], c.shape[3], c.shape[4]};
  EncoderParams p(s);
  if (c.values.size() != p.values.size()) throw Error(path.string() + ": encoder parameter count mismatch");
  p.values = c.values;
  return p;
}

}  // namespace epl
