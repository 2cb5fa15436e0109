#pragma once
// Dense string <-> id vocabulary.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tkge {

class Vocab {
 public:
  std::int32_t intern(std::string_view s) {
    auto it = index_.find(std::string(s));
    if (it != index_.end()) return it->second;
    const auto id = static_cast<std::int32_t>(names_.size());
    names_.emplace_back(s);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::int32_t> find(std::string_view s) const {
    auto it = index_.find(std::string(s));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(std::int32_t id) const {
    if (id < 0 || id >= size()) {
      throw std::out_of_range("vocab id " + std::to_string(id) +
                              " out of range [0, " + std::to_string(size()) +
                              ")");
    }
    return names_[static_cast<std::size_t>(id)];
  }

  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> index_;
};

}  // namespace tkge
