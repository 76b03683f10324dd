#include "dtrn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dtrn/error.hpp"

namespace dtrn {

namespace {

constexpr char kMagic[4] = {'D', 'T', 'R', 'N'};

void put_u64(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw IoError(path + ": truncated checkpoint");
  std::uint64_t value = 0;
  for (int i = 7; i >= 0; --i) value = (value << 8) | bytes[i];
  return value;
}

}  // namespace

void ModelCheckpoint::add(const std::string& name, Tensor tensor) {
  if (tensors_.contains(name)) throw ValidationError("duplicate checkpoint tensor '" + name + "'");
  order_.push_back(name);
  tensors_.emplace(name, std::move(tensor));
}

bool ModelCheckpoint::has(const std::string& name) const { return tensors_.contains(name); }

const Tensor& ModelCheckpoint::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw IoError("checkpoint is missing required tensor '" + name + "'");
  return it->second;
}

void ModelCheckpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open checkpoint for writing");
  out.write(kMagic, 4);
  put_u64(out, kFormatVersion);
  put_u64(out, order_.size());
  for (const std::string& name : order_) {
    const Tensor& tensor = tensors_.at(name);
    put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, tensor.rank());
    for (std::size_t extent : tensor.shape()) put_u64(out, extent);
    for (double v : tensor.flat()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw IoError(path + ": checkpoint write failed");
}

ModelCheckpoint ModelCheckpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open checkpoint");

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(path + ": not a DTRN checkpoint (bad magic)");
  }
  const std::uint64_t version = get_u64(in, path);
  if (version != kFormatVersion) {
    throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
  }

  ModelCheckpoint checkpoint;
  const std::uint64_t count = get_u64(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t name_len = get_u64(in, path);
    if (name_len > 4096) throw IoError(path + ": implausible tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    if (!in) throw IoError(path + ": truncated checkpoint");

    const std::uint64_t rank = get_u64(in, path);
    if (rank > 8) throw IoError(path + ": implausible tensor rank");
    std::vector<std::size_t> shape(rank);
    std::uint64_t numel = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<std::size_t>(get_u64(in, path));
      if (shape[d] == 0 || shape[d] > (1ull << 32)) {
        throw IoError(path + ": implausible tensor extent");
      }
      numel *= shape[d];
    }
    Tensor tensor(shape);
    for (std::uint64_t v = 0; v < numel; ++v) {
      tensor[v] = std::bit_cast<double>(get_u64(in, path));
    }
    if (checkpoint.has(name)) throw IoError(path + ": duplicate tensor '" + name + "'");
    checkpoint.add(name, std::move(tensor));
  }
  return checkpoint;
}

}  // namespace dtrn
