#include "ftmixer/checkpoint.hpp"

#include "ftmixer/errors.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace ftmixer {

namespace {

constexpr char kMagic[8] = {'F', 'T', 'M', 'X', 'C', 'K', 'P', 'T'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename U>
  U get_le(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string get_bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("checkpoint truncated while reading ") + what + " at byte " +
                       std::to_string(pos_));
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const CheckpointEntry* Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, ckpt.format_version);
  put_le<std::uint64_t>(out, ckpt.metadata.size());
  out += ckpt.metadata;
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    if (e.values.size() != shape_size(e.shape)) {
      throw DimensionError("checkpoint entry '" + e.name + "' has " + std::to_string(e.values.size()) +
                           " values for shape " + shape_string(e.shape));
    }
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) put_le<std::uint64_t>(out, d);
    for (double v : e.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.get_bytes(sizeof(kMagic), "magic") != std::string(kMagic, sizeof(kMagic))) {
    throw ParseError("not a checkpoint file (bad magic)");
  }
  Checkpoint ckpt;
  ckpt.format_version = r.get_le<std::uint32_t>("version");
  if (ckpt.format_version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(ckpt.format_version));
  }
  const auto meta_len = r.get_le<std::uint64_t>("metadata length");
  ckpt.metadata = r.get_bytes(meta_len, "metadata");
  const auto count = r.get_le<std::uint32_t>("entry count");
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    e.name = r.get_bytes(r.get_le<std::uint32_t>("name length"), "name");
    const auto rank = r.get_le<std::uint32_t>("rank");
    for (std::uint32_t d = 0; d < rank; ++d) e.shape.push_back(r.get_le<std::uint64_t>("extent"));
    const auto n = shape_size(e.shape);
    e.values.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      e.values.push_back(std::bit_cast<double>(r.get_le<std::uint64_t>("payload")));
    }
    ckpt.entries.push_back(std::move(e));
  }
  if (!r.done()) throw ParseError("trailing bytes after checkpoint entries");
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto bytes = encode_checkpoint(ckpt);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace ftmixer
