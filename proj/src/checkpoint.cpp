#include "hypernca/checkpoint.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hypernca/errors.hpp"

namespace hypernca {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class Writer {
 public:
  template <typename T>
  void put(T v) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    bytes.insert(bytes.end(), raw, raw + sizeof(T));
  }
  void put_doubles(const std::vector<double>& v) {
    for (double x : v) put(x);
  }
  void put_text(const std::string& s) { bytes.insert(bytes.end(), s.begin(), s.end()); }

  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, data_ + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }
  std::vector<double> get_doubles(std::uint64_t n) {
    if (n > (size_ - pos_) / sizeof(double)) throw FormatError("checkpoint truncated");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = get<double>();
    return v;
  }
  std::string get_text(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > size_ - pos_) throw FormatError("checkpoint truncated");
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.put_text("HNCA");
  w.put<std::uint32_t>(kCheckpointVersion);
  const std::string text = to_text(ckpt.config);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.put_text(text);
  w.put<std::uint64_t>(ckpt.genome.size());
  w.put_doubles(ckpt.genome);
  w.put<double>(ckpt.best_fitness);
  w.put<std::uint64_t>(ckpt.generation);
  w.put<std::uint8_t>(ckpt.state ? 1 : 0);
  if (ckpt.state) {
    const EsState& s = *ckpt.state;
    s.validate();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(s.dimension));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(s.constants.lambda));
    w.put<double>(s.sigma);
    w.put<std::int64_t>(s.generation);
    w.put<std::int64_t>(s.eigen_generation);
    w.put_doubles(s.mean);
    w.put_doubles(s.covariance);
    w.put_doubles(s.eigenvectors);
    w.put_doubles(s.axis_lengths);
    w.put_doubles(s.p_sigma);
    w.put_doubles(s.p_c);
  }
  w.put<std::uint32_t>(crc32_of(w.bytes.data(), w.bytes.size()));
  return std::move(w.bytes);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12) throw FormatError("checkpoint truncated");
  if (std::memcmp(bytes.data(), "HNCA", 4) != 0) throw FormatError("not a checkpoint (bad magic)");
  const std::size_t body = bytes.size() - 4;
  {
    Reader tail(bytes.data() + body, 4);
    if (tail.get<std::uint32_t>() != crc32_of(bytes.data(), body)) {
      throw FormatError("checkpoint checksum mismatch");
    }
  }
  Reader r(bytes.data() + 4, body - 4);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  const auto text_len = r.get<std::uint32_t>();
  c.config = parse_config(r.get_text(text_len));
  c.genome = r.get_doubles(r.get<std::uint64_t>());
  c.best_fitness = r.get<double>();
  c.generation = r.get<std::uint64_t>();
  const auto has_state = r.get<std::uint8_t>();
  if (has_state > 1) throw FormatError("checkpoint state flag corrupt");
  if (has_state) {
    const auto d = r.get<std::uint32_t>();
    const auto lambda = r.get<std::uint32_t>();
    if (d == 0 || lambda < 2) throw FormatError("checkpoint strategy state corrupt");
    EsState s;
    s.dimension = static_cast<int>(d);
    s.constants = CmaConstants::standard(s.dimension, static_cast<int>(lambda));
    s.sigma = r.get<double>();
    s.generation = r.get<std::int64_t>();
    s.eigen_generation = r.get<std::int64_t>();
    const std::uint64_t dd = static_cast<std::uint64_t>(d) * d;
    s.mean = r.get_doubles(d);
    s.covariance = r.get_doubles(dd);
    s.eigenvectors = r.get_doubles(dd);
    s.axis_lengths = r.get_doubles(d);
    s.p_sigma = r.get_doubles(d);
    s.p_c = r.get_doubles(d);
    c.state = std::move(s);
  }
  if (r.remaining() != 0) throw FormatError("checkpoint has trailing bytes");
  return c;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("cannot write checkpoint '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read checkpoint '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace hypernca
