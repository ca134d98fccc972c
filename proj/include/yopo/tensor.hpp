#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace yopo {

// Dense row-major array of doubles.
//
// A default-constructed Tensor is the empty tensor (no shape, no data); it is
// what parameter-free layers return for their parameter gradient. Every other
// tensor has a non-empty shape of positive extents.
//
// Batches are rank-2 tensors [examples, features]. Rank-1 tensors are treated
// as a single example wherever a batch is expected.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Batch view: leading extent is the example count, the rest is flattened.
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  Tensor reshaped(std::vector<std::size_t> shape) const;
  Tensor select_rows(std::span<const std::size_t> indices) const;

  bool all_finite() const noexcept;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double s) noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double s, Tensor a);

// Same shape, zero-filled. The empty tensor maps to itself.
Tensor zeros_like(const Tensor& t);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

double max_abs(std::span<const double> v) noexcept;
double max_abs_diff(std::span<const double> a, std::span<const double> b);

// ||a - b||_inf / max(1, ||b||_inf); the error measure used by every oracle check.
double relative_error(std::span<const double> a, std::span<const double> b);
double relative_error(const Tensor& a, const Tensor& b);

}  // namespace yopo
