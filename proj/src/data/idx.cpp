#include <cmath>
#include <fstream>
#include <iterator>

#include "yopo/data.hpp"
#include "yopo/error.hpp"

namespace yopo {
namespace {

constexpr std::uint8_t kUnsignedByte = 0x08;

void need(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t count,
          const char* what) {
  if (bytes.size() < offset + count) {
    throw ParseError(IdxError::truncated, bytes.size(),
                     std::string("idx: truncated ") + what + " (need " +
                         std::to_string(offset + count) + " bytes, have " +
                         std::to_string(bytes.size()) + ")");
  }
}

}  // namespace

std::string_view idx_error_name(IdxError e) noexcept {
  switch (e) {
    case IdxError::bad_magic:
      return "bad_magic";
    case IdxError::unsupported_type:
      return "unsupported_type";
    case IdxError::bad_header:
      return "bad_header";
    case IdxError::truncated:
      return "truncated";
    case IdxError::trailing_bytes:
      return "trailing_bytes";
  }
  return "unknown";
}

ParseError::ParseError(IdxError kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " [" + std::string(idx_error_name(kind)) + " at byte " +
                         std::to_string(offset) + "]"),
      kind_(kind),
      offset_(offset) {}

IdxArray parse_idx_raw(std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < 2; ++i) {
    need(bytes, i, 1, "magic");
    if (bytes[i] != 0) throw ParseError(IdxError::bad_magic, i, "idx: magic bytes must be zero");
  }
  need(bytes, 2, 1, "type code");
  if (bytes[2] != kUnsignedByte) {
    throw ParseError(IdxError::unsupported_type, 2,
                     "idx: type code " + std::to_string(bytes[2]) + " unsupported (only 0x08)");
  }
  need(bytes, 3, 1, "rank");
  const std::size_t rank = bytes[3];
  if (rank == 0) throw ParseError(IdxError::bad_header, 3, "idx: rank must be at least 1");

  IdxArray out;
  std::size_t count = 1;
  std::size_t offset = 4;
  for (std::size_t r = 0; r < rank; ++r, offset += 4) {
    need(bytes, offset, 4, "dimension");
    const std::uint32_t d = (std::uint32_t{bytes[offset]} << 24) |
                            (std::uint32_t{bytes[offset + 1]} << 16) |
                            (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
    if (d == 0) throw ParseError(IdxError::bad_header, offset, "idx: zero extent");
    out.dims.push_back(d);
    count *= d;
  }
  need(bytes, offset, count, "payload");
  if (bytes.size() > offset + count) {
    throw ParseError(IdxError::trailing_bytes, offset + count, "idx: bytes after payload");
  }
  out.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return out;
}

std::vector<std::uint8_t> write_idx_raw(const IdxArray& array) {
  if (array.dims.empty() || array.dims.size() > 255) throw ArgumentError("idx: rank must be 1..255");
  std::size_t count = 1;
  for (std::size_t d : array.dims) {
    if (d == 0 || d > 0xFFFFFFFFu) throw ArgumentError("idx: extent out of range");
    count *= d;
  }
  if (count != array.payload.size()) throw ShapeError("idx: payload does not match extents");
  std::vector<std::uint8_t> out{0, 0, kUnsignedByte, static_cast<std::uint8_t>(array.dims.size())};
  for (std::size_t d : array.dims) {
    out.push_back(static_cast<std::uint8_t>(d >> 24));
    out.push_back(static_cast<std::uint8_t>(d >> 16));
    out.push_back(static_cast<std::uint8_t>(d >> 8));
    out.push_back(static_cast<std::uint8_t>(d));
  }
  out.insert(out.end(), array.payload.begin(), array.payload.end());
  return out;
}

Tensor parse_idx(std::span<const std::uint8_t> bytes) {
  IdxArray raw = parse_idx_raw(bytes);
  std::vector<double> values(raw.payload.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = raw.payload[i] / 255.0;
  return Tensor(std::move(raw.dims), std::move(values));
}

std::vector<std::uint8_t> write_idx(const Tensor& t) {
  if (t.empty()) throw ArgumentError("write_idx: empty tensor");
  IdxArray raw{t.shape(), std::vector<std::uint8_t>(t.size())};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = t[i];
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("write_idx: values must lie in [0, 1]");
    raw.payload[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return write_idx_raw(raw);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const Tensor img = parse_idx(read_file(images));
  const IdxArray lab = parse_idx_raw(read_file(labels));
  if (lab.dims.size() != 1) throw ShapeError("idx labels must be rank 1");
  const std::size_t n = img.shape()[0];
  if (lab.dims[0] != n) throw ShapeError("idx: image and label counts differ");

  Dataset ds;
  ds.inputs = img.reshaped({n, img.size() / n});
  ds.labels.assign(lab.payload.begin(), lab.payload.end());
  int max_label = 0;
  for (int l : ds.labels) max_label = std::max(max_label, l);
  ds.classes = static_cast<std::size_t>(max_label) + 1;
  ds.normalization = {1.0 / 255.0, 0.0};
  ds.validate();
  return ds;
}

}  // namespace yopo
