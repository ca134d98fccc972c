#include <numeric>
#include <string>

#include "yopo/data.hpp"
#include "yopo/error.hpp"
#include "yopo/rng.hpp"

namespace yopo {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.inputs = inputs.select_rows(indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  out.classes = classes;
  out.normalization = normalization;
  return out;
}

void Dataset::validate() const {
  if (inputs.rows() != labels.size()) {
    throw ShapeError("dataset: " + std::to_string(inputs.rows()) + " inputs but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (!inputs.all_finite()) throw ArgumentError("dataset: non-finite input");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) {
      throw ArgumentError("dataset: label " + std::to_string(l) + " outside [0, classes)");
    }
  }
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch, std::uint64_t seed,
                                              std::size_t epoch) {
  if (batch == 0) throw ArgumentError("batches: batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng(seed).split(epoch);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t end = std::min(n, start + batch);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace yopo
