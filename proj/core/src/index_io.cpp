#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <type_traits>

#include "mmlsh/errors.hpp"
#include "mmlsh/lsh.hpp"

// Layout (little-endian):
//   magic "MMLSHIDX" | u32 version | params | u64 seed | u64 dim | u64 n
//   per projection: f64 a[dim] | f64 b | f64 w | u64 count | (i32 bucket, u32 point)[count]
//   u32 crc32 of every preceding byte

namespace mmlsh {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'M', 'L', 'S', 'H', 'I', 'D', 'X'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const unsigned char*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    bytes_.insert(bytes_.end(), p, p + size);
  }
  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T value;
    get_bytes(&value, sizeof(T));
    return value;
  }
  void get_bytes(void* out, std::size_t size) {
    if (pos_ + size > bytes_.size()) throw FormatError("index file truncated");
    std::memcpy(out, bytes_.data() + pos_, size);
    pos_ += size;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::span<const unsigned char> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto len = static_cast<uInt>(std::min(kChunk, bytes.size() - off));
    crc = crc32(crc, bytes.data() + off, len);
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_index(const LshIndex& index, const std::filesystem::path& path) {
  Writer out;
  out.put_bytes(kMagic.data(), kMagic.size());
  out.put(kVersion);

  const auto& p = index.params();
  out.put(static_cast<std::int32_t>(p.c));
  for (double v : {p.w, p.delta, p.beta, p.p1, p.p2, p.z, p.alpha}) out.put(v);
  out.put(static_cast<std::uint32_t>(p.m));
  out.put(static_cast<std::uint32_t>(p.l));
  out.put(static_cast<std::uint64_t>(index.seed()));
  out.put(static_cast<std::uint64_t>(index.dimension()));
  out.put(static_cast<std::uint64_t>(index.point_count()));

  for (std::size_t g = 0; g < index.projection_count(); ++g) {
    const auto& table = index.table(g);
    const auto& fn = table.function();
    out.put_bytes(fn.a.data(), fn.a.size() * sizeof(double));
    out.put(fn.b);
    out.put(fn.w);
    const auto entries = table.entries();
    out.put(static_cast<std::uint64_t>(entries.size()));
    for (const auto& e : entries) {
      out.put(e.bucket);
      out.put(e.point);
    }
  }
  const auto crc = checksum(out.bytes());

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw FormatError("cannot write index file " + path.string());
  file.write(reinterpret_cast<const char*>(out.bytes().data()), static_cast<std::streamsize>(out.bytes().size()));
  file.write(reinterpret_cast<const char*>(&crc), sizeof crc);
  if (!file) throw FormatError("write failed for " + path.string());
}

LshIndex load_index(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw FormatError("cannot open index file " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

  if (bytes.size() < kMagic.size() + sizeof(std::uint32_t) * 2) throw FormatError("index file truncated");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw FormatError("not an mmlsh index file");

  const std::span<const unsigned char> body(bytes.data(), bytes.size() - sizeof(std::uint32_t));
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, bytes.data() + body.size(), sizeof stored_crc);

  Reader in(body);
  std::array<char, 8> magic{};
  in.get_bytes(magic.data(), magic.size());
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("index format version " + std::to_string(version) + " unsupported (expected " +
                      std::to_string(kVersion) + ")");
  }
  if (checksum(body) != stored_crc) throw FormatError("index checksum mismatch");

  LshParams p;
  p.c = in.get<std::int32_t>();
  for (double* v : {&p.w, &p.delta, &p.beta, &p.p1, &p.p2, &p.z, &p.alpha}) *v = in.get<double>();
  p.m = in.get<std::uint32_t>();
  p.l = in.get<std::uint32_t>();
  const auto seed = in.get<std::uint64_t>();
  const auto dim = in.get<std::uint64_t>();
  const auto n = in.get<std::uint64_t>();

  std::vector<ProjectionTable> tables;
  tables.reserve(p.m);
  for (std::size_t g = 0; g < p.m; ++g) {
    HashFunction fn;
    fn.a.resize(dim);
    in.get_bytes(fn.a.data(), dim * sizeof(double));
    fn.b = in.get<double>();
    fn.w = in.get<double>();
    const auto count = in.get<std::uint64_t>();
    if (count != n) throw FormatError("projection " + std::to_string(g) + " does not cover every point");
    std::vector<BucketEntry> entries(count);
    for (auto& e : entries) {
      e.bucket = in.get<std::int32_t>();
      e.point = in.get<std::uint32_t>();
    }
    tables.emplace_back(std::move(fn), std::move(entries));
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes in index file");
  return LshIndex(p, seed, dim, n, std::move(tables));
}

}  // namespace mmlsh
