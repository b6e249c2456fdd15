#include <conceptpose/io/csal.hpp>

#include <conceptpose/error.hpp>

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace conceptpose::io {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s, const char* what) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorKind::Format, std::string(what) + " longer than 65535 bytes");
  }
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }
  [[noreturn]] static void fail_at(std::size_t offset, const std::string& what) {
    throw Error(ErrorKind::Format, "CSAL: " + what + " at byte " + std::to_string(offset));
  }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) fail(std::string("truncated ") + what);
  }

  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string string(const char* what) {
    const std::size_t n = u16(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  const std::uint8_t* take(std::size_t n, const char* what) {
    need(n, what);
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_csal(const SaliencyTensor& tensor) {
  if (tensor.labels.empty()) throw Error(ErrorKind::Format, "CSAL: tensor has no channels");
  if (tensor.height <= 0 || tensor.width <= 0) {
    throw Error(ErrorKind::Format, "CSAL: tensor has an empty raster");
  }
  const std::size_t expected =
      tensor.labels.size() * static_cast<std::size_t>(tensor.height) * tensor.width;
  if (tensor.data.size() != expected) {
    throw Error(ErrorKind::Format, "CSAL: payload size does not match L x H x W");
  }

  std::vector<std::uint8_t> out;
  out.reserve(kCsalFixedHeader + 64 + expected * 4);
  out.insert(out.end(), {'C', 'S', 'A', 'L'});
  put_u32(out, kCsalVersion);
  put_u32(out, static_cast<std::uint32_t>(tensor.labels.size()));
  put_u32(out, static_cast<std::uint32_t>(tensor.height));
  put_u32(out, static_cast<std::uint32_t>(tensor.width));
  put_string(out, tensor.object_category, "category");
  for (const auto& label : tensor.labels) put_string(out, label, "label");
  for (float f : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

SaliencyTensor decode_csal(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const std::uint8_t* magic = in.take(4, "magic");
  if (magic[0] != 'C' || magic[1] != 'S' || magic[2] != 'A' || magic[3] != 'L') {
    Reader::fail_at(0, "bad magic");
  }
  const std::size_t version_at = in.offset();
  const std::uint32_t version = in.u32("version");
  if (version != kCsalVersion) {
    Reader::fail_at(version_at, "unsupported version " + std::to_string(version));
  }
  const std::size_t dims_at = in.offset();
  const std::uint64_t l = in.u32("dimensions");
  const std::uint64_t h = in.u32("dimensions");
  const std::uint64_t w = in.u32("dimensions");
  if (l == 0 || h == 0 || w == 0) Reader::fail_at(dims_at, "zero dimension");
  if (h > static_cast<std::uint64_t>(std::numeric_limits<int>::max()) ||
      w > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    Reader::fail_at(dims_at, "dimension overflow");
  }
  // l, h, w < 2^32 each, so l*h fits in 64 bits; check the rest before multiplying.
  const std::uint64_t lh = l * h;
  if (lh > std::numeric_limits<std::uint64_t>::max() / (4 * w)) {
    Reader::fail_at(dims_at, "dimension overflow");
  }
  const std::uint64_t payload = lh * w * 4;
  // Every label needs at least its 2-byte length.
  if (l * 2 > in.remaining()) Reader::fail_at(dims_at, "dimension overflow");

  SaliencyTensor t;
  t.object_category = in.string("category");
  t.labels.reserve(l);
  for (std::uint64_t i = 0; i < l; ++i) t.labels.push_back(in.string("label"));
  if (payload > in.remaining()) in.fail("truncated payload");
  if (payload < in.remaining()) Reader::fail_at(in.offset() + payload, "trailing bytes");
  t.height = static_cast<int>(h);
  t.width = static_cast<int>(w);
  const std::size_t count = static_cast<std::size_t>(payload / 4);
  const std::uint8_t* p = in.take(static_cast<std::size_t>(payload), "payload");
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* b = p + 4 * i;
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                               (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    t.data[i] = std::bit_cast<float>(bits);
  }
  return t;
}

void write_saliency(const std::filesystem::path& path, const SaliencyTensor& tensor) {
  const auto bytes = encode_csal(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Ingestion, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Ingestion, "short write to " + path.string());
}

SaliencyTensor read_saliency(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Ingestion, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_csal(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace conceptpose::io
