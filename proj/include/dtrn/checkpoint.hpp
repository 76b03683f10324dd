#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "dtrn/tensor.hpp"

namespace dtrn {

// Portable model container. Binary layout, all integers unsigned 64-bit
// little-endian, all reals 64-bit little-endian IEEE-754:
//   magic "DTRN" | format_version | tensor count
//   per tensor: name length | UTF-8 name | rank | extents... | data...
// load(save(x)) reproduces every tensor bit-exactly; magic and version are
// validated before any tensor is read.
class ModelCheckpoint {
 public:
  static constexpr std::uint64_t kFormatVersion = 1;

  void add(const std::string& name, Tensor tensor);
  bool has(const std::string& name) const;
  const Tensor& get(const std::string& name) const;  // throws IoError if absent

  // Names in insertion/file order.
  const std::vector<std::string>& names() const { return order_; }
  std::size_t size() const { return order_.size(); }

  void save(const std::string& path) const;
  static ModelCheckpoint load(const std::string& path);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> tensors_;
};

}  // namespace dtrn
