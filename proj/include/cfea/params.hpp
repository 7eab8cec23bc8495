#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfea/tensor.hpp"

namespace cfea {

// Named ordered collection of parameter arrays. The name set and per-array
// shapes are fixed once frozen; values stay mutable for optimizer updates.
class ParameterSet {
 public:
  void add(const std::string& name, Tensor t);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::size_t count() const { return order_.size(); }

  std::int64_t iteration() const { return iteration_; }
  void set_iteration(std::int64_t it) { iteration_ = it; }

  std::int64_t total_size() const;
  bool all_finite() const;
  // Same names in the same order with the same shapes.
  bool same_structure(const ParameterSet& other) const;
  bool values_equal(const ParameterSet& other) const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Tensor> arrays_;
  std::int64_t iteration_ = 0;
  bool frozen_ = false;
};

}  // namespace cfea
