#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "augraph/nn.hpp"

namespace augraph {

constexpr uint32_t kCheckpointVersion = 1;

struct StoredTensor {
  int64_t rows = 0, cols = 0;
  std::vector<double> values;
};

struct CheckpointData {
  nlohmann::json manifest;
  std::vector<std::string> names;  // manifest order
  std::unordered_map<std::string, StoredTensor> tensors;
};

// Container layout: magic "AUGCKPT\0", u32 format version, u64 manifest
// length, manifest JSON, then one little-endian f64 blob per parameter in
// manifest order. The manifest echoes the run config, step count and a
// metric snapshot so other tools can read training provenance without
// parsing the blobs.
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& config_echo, int64_t step,
                     const nlohmann::json& metrics);

CheckpointData load_checkpoint(const std::string& path);

// Copies every stored tensor into the store; all names must match.
void apply_checkpoint(const CheckpointData& data, ParamStore& store);

// Copies stored tensors whose name starts with src_prefix into store entries
// named dst_prefix + remainder; returns how many were copied.
int apply_checkpoint_prefix(const CheckpointData& data, ParamStore& store,
                            const std::string& src_prefix,
                            const std::string& dst_prefix);

}  // namespace augraph
