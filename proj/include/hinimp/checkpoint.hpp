#pragma once

#include <map>
#include <string>
#include <vector>

#include "hinimp/tensor.hpp"

namespace hinimp {

// Named-parameter container: little-endian f64 payloads plus a JSON manifest
// (hyperparameters, seeds, the frozen reference values).
struct Checkpoint {
  std::string manifest_json;
  std::vector<std::pair<std::string, std::vector<int64_t>>> shapes;
  std::map<std::string, std::vector<double>> values;

  static Checkpoint from_params(const std::vector<std::pair<std::string, Tensor>>& params,
                                std::string manifest_json);
  // Copies stored values into matching parameters; missing/mismatched names throw.
  void restore_into(const std::vector<std::pair<std::string, Tensor>>& params) const;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hinimp
