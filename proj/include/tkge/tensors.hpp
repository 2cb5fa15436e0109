#pragma once
// Named parameter tensors and initialization helpers.

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tkge {

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using ArrX = Eigen::Array<S, Eigen::Dynamic, 1>;

// An ordered collection of named matrices. Order is the creation order and
// is part of the checkpoint contract.
template <class S>
class NamedTensors {
 public:
  using Item = std::pair<std::string, MatX<S>>;

  MatX<S>& add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (index_.count(name)) {
      throw std::logic_error("duplicate tensor name: " + name);
    }
    index_.emplace(name, items_.size());
    items_.emplace_back(name, MatX<S>::Zero(rows, cols));
    return items_.back().second;
  }

  MatX<S>& at(const std::string& name) {
    return items_[checked_index(name)].second;
  }
  const MatX<S>& at(const std::string& name) const {
    return items_[checked_index(name)].second;
  }

  bool has(const std::string& name) const { return index_.count(name) > 0; }
  std::size_t size() const { return items_.size(); }
  std::vector<Item>& items() { return items_; }
  const std::vector<Item>& items() const { return items_; }

  void set_zero() {
    for (auto& [name, m] : items_) m.setZero();
  }

  bool all_finite() const {
    for (const auto& [name, m] : items_) {
      if (!m.allFinite()) return false;
    }
    return true;
  }

  static NamedTensors zeros_like(const NamedTensors& other) {
    NamedTensors out;
    for (const auto& [name, m] : other.items_) {
      out.add(name, m.rows(), m.cols());
    }
    return out;
  }

 private:
  std::size_t checked_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw std::out_of_range("no tensor named " + name);
    }
    return it->second;
  }

  std::vector<Item> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Xavier-uniform fill: bound sqrt(6 / (rows + cols)). Draws in double so a
// float tensor gets the rounded values of the double stream.
template <class S>
void xavier_fill(MatX<S>& m, std::mt19937_64& rng) {
  if (m.size() == 0) return;
  const double bound = std::sqrt(6.0 / double(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = static_cast<S>(dist(rng));
    }
  }
}

template <class S>
double xavier_bound(const MatX<S>& m) {
  return std::sqrt(6.0 / double(m.rows() + m.cols()));
}

}  // namespace tkge
