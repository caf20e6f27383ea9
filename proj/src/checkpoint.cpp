#include "hinimp/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "hinimp/errors.hpp"

namespace hinimp {

namespace {

constexpr char kMagic[8] = {'H', 'I', 'N', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& f, T& v) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw DataError("checkpoint: truncated file");
}

}  // namespace

Checkpoint Checkpoint::from_params(const std::vector<std::pair<std::string, Tensor>>& params,
                                   std::string manifest_json) {
  Checkpoint ck;
  ck.manifest_json = std::move(manifest_json);
  for (const auto& [name, p] : params) {
    ck.shapes.emplace_back(name, p.shape());
    ck.values[name] = p.data();
  }
  return ck;
}

void Checkpoint::restore_into(const std::vector<std::pair<std::string, Tensor>>& params) const {
  for (auto [name, p] : params) {
    const auto it = values.find(name);
    if (it == values.end()) throw DataError("checkpoint: missing parameter '" + name + "'");
    if (it->second.size() != p.data().size())
      throw DataError("checkpoint: shape mismatch for parameter '" + name + "'");
    p.data() = it->second;
  }
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write checkpoint: " + path);
  f.write(kMagic, sizeof(kMagic));
  write_pod<uint64_t>(f, ck.manifest_json.size());
  f.write(ck.manifest_json.data(), static_cast<std::streamsize>(ck.manifest_json.size()));
  write_pod<uint32_t>(f, static_cast<uint32_t>(ck.shapes.size()));
  for (const auto& [name, shape] : ck.shapes) {
    write_pod<uint16_t>(f, static_cast<uint16_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<uint8_t>(f, static_cast<uint8_t>(shape.size()));
    for (const int64_t d : shape) write_pod<int64_t>(f, d);
    const auto& data = ck.values.at(name);
    write_pod<uint64_t>(f, data.size());
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!f) throw DataError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw DataError("not a checkpoint file: " + path);
  Checkpoint ck;
  uint64_t mlen = 0;
  read_pod(f, mlen);
  ck.manifest_json.resize(mlen);
  f.read(ck.manifest_json.data(), static_cast<std::streamsize>(mlen));
  uint32_t count = 0;
  read_pod(f, count);
  for (uint32_t i = 0; i < count; ++i) {
    uint16_t nlen = 0;
    read_pod(f, nlen);
    std::string name(nlen, '\0');
    f.read(name.data(), nlen);
    uint8_t ndim = 0;
    read_pod(f, ndim);
    std::vector<int64_t> shape(ndim);
    for (auto& d : shape) read_pod(f, d);
    uint64_t numel = 0;
    read_pod(f, numel);
    std::vector<double> data(numel);
    f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(numel * sizeof(double)));
    if (!f) throw DataError("checkpoint: truncated parameter '" + name + "'");
    ck.shapes.emplace_back(name, shape);
    ck.values[name] = std::move(data);
  }
  return ck;
}

}  // namespace hinimp
