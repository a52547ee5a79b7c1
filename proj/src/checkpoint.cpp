#include "scatterhsd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "scatterhsd/error.hpp"
#include "scatterhsd/optim.hpp"

namespace scatterhsd::checkpoint {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[8] = {'S', 'H', 'S', 'D', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <class T>
  void pod(const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

  template <class T>
  T pod() {
    T v{};
    raw(&v, sizeof(T));
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  void raw(void* dst, std::size_t n) {
    if (pos_ + n > in_.size()) throw IoError("checkpoint truncated");
    std::memcpy(dst, in_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint capture(const ad::ParameterSet& params, std::map<std::string, std::string> meta) {
  Checkpoint ckpt;
  ckpt.meta = std::move(meta);
  for (const auto& [name, t] : params.entries()) {
    ckpt.tensors.push_back({name, t.shape(), {t.data().begin(), t.data().end()}});
  }
  return ckpt;
}

void restore(const Checkpoint& ckpt, ad::ParameterSet& params) {
  if (ckpt.tensors.size() != params.size()) {
    throw InvalidInput("checkpoint has " + std::to_string(ckpt.tensors.size()) +
                       " tensors, model expects " + std::to_string(params.size()));
  }
  for (const auto& nt : ckpt.tensors) {
    ad::Tensor t = params.get(nt.name);
    if (t.shape() != nt.shape) {
      throw ShapeError("checkpoint tensor '" + nt.name + "' has shape " + ad::shape_string(nt.shape) +
                       ", model expects " + ad::shape_string(t.shape()));
    }
    auto dst = t.mutable_data();
    std::copy(nt.values.begin(), nt.values.end(), dst.begin());
  }
}

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.pod(kFormatVersion);
  w.pod(static_cast<std::uint64_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.str(k);
    w.str(v);
  }
  w.pod(static_cast<std::uint64_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    if (ad::numel(t.shape) != t.values.size()) throw ShapeError("tensor '" + t.name + "' size mismatch");
    w.str(t.name);
    w.pod(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.pod(static_cast<std::uint64_t>(d));
    w.raw(t.values.data(), t.values.size() * sizeof(double));
  }
  return w.take();
}

Checkpoint deserialize(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw IoError("not a checkpoint file");
  const auto version = r.pod<std::uint32_t>();
  if (version != kFormatVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const auto meta_count = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < meta_count; ++i) {
    auto k = r.str();
    ckpt.meta[k] = r.str();
  }
  const auto count = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str();
    const auto rank = r.pod<std::uint32_t>();
    for (std::uint32_t d = 0; d < rank; ++d) t.shape.push_back(r.pod<std::uint64_t>());
    t.values.resize(ad::numel(t.shape));
    r.raw(t.values.data(), t.values.size() * sizeof(double));
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw IoError("trailing bytes after checkpoint");
  return ckpt;
}

void save(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = serialize(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::string content_hash(const Checkpoint& ckpt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : serialize(ckpt)) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace scatterhsd::checkpoint
