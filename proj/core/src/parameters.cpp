#include "jointgen/parameters.hpp"

#include <cmath>

#include "jointgen/errors.hpp"

namespace jointgen {

Parameter& ParameterStore::create(const std::string& name, Shape shape) {
  if (by_name_.count(name) != 0) {
    throw ContractError("duplicate parameter name '" + name + "'");
  }
  params_.push_back(std::make_unique<Parameter>(name, std::move(shape)));
  Parameter& p = *params_.back();
  by_name_.emplace(name, &p);
  return p;
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

Parameter& ParameterStore::at(const std::string& name) {
  if (Parameter* p = find(name)) {
    return *p;
  }
  throw ContractError("unknown parameter '" + name + "'");
}

std::size_t ParameterStore::value_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    n += p->value.size();
  }
  return n;
}

void ParameterStore::zero_gradients() {
  for (auto& p : params_) {
    p->zero_gradient();
  }
}

bool is_bias_name(const std::string& name) {
  auto ends_with = [&](std::string_view suffix) {
    return name.size() >= suffix.size() &&
           name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".b") || ends_with("_bias");
}

void ParameterStore::initialize_uniform(Rng& rng, Real scale) {
  for (auto& p : params_) {
    if (is_bias_name(p->name)) {
      p->value.fill(0.0);
      continue;
    }
    for (Real& v : p->value.values()) {
      v = rng.uniform(-scale, scale);
    }
  }
}

double ParameterStore::gradient_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) {
    for (Real g : p->gradient.values()) {
      sq += g * g;
    }
  }
  return std::sqrt(sq);
}

}  // namespace jointgen
