#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "jointgen/random.hpp"
#include "jointgen/tensor.hpp"

namespace jointgen {

/// A trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor gradient;

  Parameter(std::string name, Shape shape)
      : name(std::move(name)), value(shape), gradient(std::move(shape)) {}

  void zero_gradient() { gradient.fill(0.0); }
};

/// Owns every parameter of a model, in creation order, addressed by a
/// unique dotted name. Parameter addresses are stable for the store's
/// lifetime.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter& create(const std::string& name, Shape shape);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  Parameter& at(const std::string& name);

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t value_count() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_gradients();
  /// Dense weights uniform in [-scale, scale]; names ending in ".b" or
  /// "_bias" are biases and start at zero.
  void initialize_uniform(Rng& rng, Real scale);
  double gradient_norm() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, Parameter*, std::less<>> by_name_;
};

bool is_bias_name(const std::string& name);

}  // namespace jointgen
