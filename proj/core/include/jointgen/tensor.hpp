#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace jointgen {

/// Scalar type for all model math. Finite-difference checks need 64 bits.
using Real = double;

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array. Rank 1 holds vectors (scalars are shape {1}),
/// rank 2 holds matrices.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = 0.0);
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor vector(std::initializer_list<Real> values);
  static Tensor vector(std::vector<Real> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<Real> values);
  static Tensor scalar(Real value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::size_t rows() const;
  std::size_t cols() const;

  Real& operator[](std::size_t i) noexcept { return values_[i]; }
  Real operator[](std::size_t i) const noexcept { return values_[i]; }
  Real& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  Real at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<Real> values() noexcept { return values_; }
  std::span<const Real> values() const noexcept { return values_; }
  std::span<const Real> row(std::size_t r) const;
  std::span<Real> row(std::size_t r);

  void fill(Real value);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<Real> values_;
};

}  // namespace jointgen
