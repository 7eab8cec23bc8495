#include "cfea/params.hpp"

#include "cfea/error.hpp"

namespace cfea {

void ParameterSet::add(const std::string& name, Tensor t) {
  if (frozen_) throw StructuralError("ParameterSet: cannot add to a frozen set");
  if (index_.count(name)) throw StructuralError("ParameterSet: duplicate name " + name);
  index_[name] = order_.size();
  order_.push_back(name);
  arrays_.push_back(std::move(t));
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw StructuralError("ParameterSet: unknown name " + name);
  return arrays_[it->second];
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw StructuralError("ParameterSet: unknown name " + name);
  return arrays_[it->second];
}

std::int64_t ParameterSet::total_size() const {
  std::int64_t n = 0;
  for (const auto& t : arrays_) n += t.size();
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& t : arrays_)
    if (!t.all_finite()) return false;
  return true;
}

bool ParameterSet::same_structure(const ParameterSet& other) const {
  if (order_ != other.order_) return false;
  for (std::size_t i = 0; i < arrays_.size(); ++i)
    if (arrays_[i].shape() != other.arrays_[i].shape()) return false;
  return true;
}

bool ParameterSet::values_equal(const ParameterSet& other) const {
  if (!same_structure(other)) return false;
  for (std::size_t i = 0; i < arrays_.size(); ++i)
    if (!(arrays_[i] == other.arrays_[i])) return false;
  return true;
}

}  // namespace cfea
