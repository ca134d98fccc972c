#include "yopo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "yopo/error.hpp"

namespace yopo {
namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor extents must be positive");
    n *= d;
  }
  return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != element_count(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const noexcept {
  if (shape_.empty()) return 0;
  return shape_.size() == 1 ? 1 : shape_[0];
}

std::size_t Tensor::cols() const noexcept {
  const std::size_t r = rows();
  return r == 0 ? 0 : data_.size() / r;
}

double& Tensor::at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
double Tensor::at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(data_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::select_rows(std::span<const std::size_t> indices) const {
  const std::size_t c = cols();
  std::vector<std::size_t> shape = shape_;
  if (shape.size() == 1) shape = {1, c};
  shape[0] = indices.size();
  std::vector<double> out;
  out.reserve(indices.size() * c);
  for (std::size_t i : indices) {
    if (i >= rows()) throw ShapeError("row index " + std::to_string(i) + " out of range");
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return Tensor(std::move(shape), std::move(out));
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape(*this, other, "operator+=");
  std::transform(data_.begin(), data_.end(), other.data_.begin(), data_.begin(), std::plus<>());
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  require_same_shape(*this, other, "operator-=");
  std::transform(data_.begin(), data_.end(), other.data_.begin(), data_.begin(), std::minus<>());
  return *this;
}

Tensor& Tensor::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(double s, Tensor a) { return a *= s; }

Tensor zeros_like(const Tensor& t) {
  if (t.empty()) return {};
  return Tensor(t.shape(), 0.0);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

double max_abs(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  return max_abs_diff(a, b) / std::max(1.0, max_abs(b));
}

double relative_error(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "relative_error");
  return relative_error(a.values(), b.values());
}

}  // namespace yopo
