#include "jointgen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "jointgen/errors.hpp"

namespace jointgen {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, "x"));
}

Tensor::Tensor(Shape shape, Real fill)
    : shape_(std::move(shape)), values_(shape_size(shape_), fill) {
  for (std::size_t extent : shape_) {
    if (extent == 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           shape_to_string(shape_));
    }
  }
}

Tensor::Tensor(Shape shape, std::vector<Real> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_size(shape_) != values_.size()) {
    throw DimensionError(fmt::format("shape {} holds {} values, got {}",
                                     shape_to_string(shape_),
                                     shape_size(shape_), values_.size()));
  }
}

Tensor Tensor::vector(std::initializer_list<Real> values) {
  return Tensor({values.size()}, std::vector<Real>(values));
}

Tensor Tensor::vector(std::vector<Real> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<Real> values) {
  return Tensor({rows, cols}, std::vector<Real>(values));
}

Tensor Tensor::scalar(Real value) { return Tensor({1}, std::vector<Real>{value}); }

std::size_t Tensor::rows() const {
  if (rank() != 2) {
    throw DimensionError("rows() on non-matrix " + shape_to_string(shape_));
  }
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) {
    throw DimensionError("cols() on non-matrix " + shape_to_string(shape_));
  }
  return shape_[1];
}

std::span<const Real> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const Real>(values_).subspan(r * c, c);
}

std::span<Real> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<Real>(values_).subspan(r * c, c);
}

void Tensor::fill(Real value) { std::fill(values_.begin(), values_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](Real v) { return std::isfinite(v); });
}

}  // namespace jointgen
