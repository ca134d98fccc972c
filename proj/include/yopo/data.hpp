#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "yopo/loss.hpp"
#include "yopo/tensor.hpp"

namespace yopo {

// x_stored = x_raw * scale + offset.
struct Normalization {
  double scale = 1.0;
  double offset = 0.0;
};

struct Dataset {
  Tensor inputs;  // [N, d_0]
  std::vector<int> labels;
  std::size_t classes = 0;
  Normalization normalization;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return inputs.cols(); }

  Dataset subset(std::span<const std::size_t> indices) const;
  Targets targets() const { return Targets::classes(labels); }

  // Finite inputs, labels in [0, classes), one label per row.
  void validate() const;
};

// ---------------------------------------------------------------------------
// IDX container (MNIST). Layout:
//   byte 0-1  zero
//   byte 2    type code; only 0x08 (unsigned byte) is supported
//   byte 3    rank r >= 1
//   4*r bytes big-endian uint32 extents, each > 0
//   payload   prod(extents) bytes, nothing after it
// ---------------------------------------------------------------------------

enum class IdxError { bad_magic, unsupported_type, bad_header, truncated, trailing_bytes };

std::string_view idx_error_name(IdxError e) noexcept;

class ParseError : public std::runtime_error {
 public:
  ParseError(IdxError kind, std::size_t offset, const std::string& what);
  IdxError kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  IdxError kind_;
  std::size_t offset_;
};

struct IdxArray {
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> payload;
};

IdxArray parse_idx_raw(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_idx_raw(const IdxArray& array);

// Payload mapped to [0, 1] by /255.
Tensor parse_idx(std::span<const std::uint8_t> bytes);
// Inverse of parse_idx: values must lie in [0, 1]; stored as round(v * 255).
std::vector<std::uint8_t> write_idx(const Tensor& t);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Images [N, ...] flattened to [N, d]; labels as raw class ids.
Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

// ---------------------------------------------------------------------------
// Synthetic data for desk-scale runs. Labels alternate 0, 1, 0, 1, ...
//   two_gaussians: class c centred at (+-margin/2, 0, ..., 0), N(0, noise^2) per coordinate.
//   two_moons:     interleaved half circles in the first two coordinates (class 1
//                  shifted down by `margin`), N(0, noise^2) on every coordinate.
// Inputs are stored unnormalised (identity Normalization).
// ---------------------------------------------------------------------------

enum class SyntheticKind { two_gaussians, two_moons };

std::string_view synthetic_name(SyntheticKind k) noexcept;
SyntheticKind parse_synthetic(std::string_view name);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::two_gaussians;
  std::size_t dim = 2;
  std::size_t examples = 1000;
  double margin = 2.0;
  double noise = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

Dataset gen_synthetic(const SyntheticSpec& spec);

// Seeded permutation of [0, n) for (seed, epoch), cut into ceil(n / batch)
// consecutive slices; the last may be short.
std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch, std::uint64_t seed,
                                              std::size_t epoch);
inline std::vector<std::vector<std::size_t>> batches(const Dataset& ds, std::size_t batch,
                                                     std::uint64_t seed, std::size_t epoch) {
  return batches(ds.size(), batch, seed, epoch);
}

}  // namespace yopo
