#include "augraph/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "augraph/check.hpp"

namespace augraph {

namespace {

constexpr char kMagic[8] = {'A', 'U', 'G', 'C', 'K', 'P', 'T', '\0'};

void write_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}

void write_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_f64_block(std::ostream& os, const std::vector<double>& values) {
  for (double d : values) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(os, bits);
  }
}

void read_f64_block(std::istream& is, std::vector<double>& values) {
  for (double& d : values) {
    const uint64_t bits = read_u64(is);
    std::memcpy(&d, &bits, 8);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& config_echo, int64_t step,
                     const nlohmann::json& metrics) {
  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["byte_order"] = "little";
  manifest["step"] = step;
  manifest["config"] = config_echo;
  manifest["metrics"] = metrics;
  nlohmann::json plist = nlohmann::json::array();
  for (const auto& [name, t] : params.items())
    plist.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
  manifest["params"] = plist;
  const std::string mtext = manifest.dump();

  std::ofstream os(path, std::ios::binary);
  AUG_CHECK(os.good(), "cannot write checkpoint ", path);
  os.write(kMagic, 8);
  write_u32(os, kCheckpointVersion);
  write_u64(os, mtext.size());
  os.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
  for (const auto& [name, t] : params.items()) write_f64_block(os, t.values());
  AUG_CHECK(os.good(), "write failed for checkpoint ", path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  AUG_CHECK(is.good(), "cannot read checkpoint ", path);
  char magic[8];
  is.read(magic, 8);
  AUG_CHECK(is.good() && std::memcmp(magic, kMagic, 8) == 0,
            path, " is not a checkpoint file");
  const uint32_t version = read_u32(is);
  AUG_CHECK(version == kCheckpointVersion, "checkpoint ", path,
            " has format version ", version, ", this build reads ",
            kCheckpointVersion);
  const uint64_t mlen = read_u64(is);
  std::string mtext(mlen, '\0');
  is.read(mtext.data(), static_cast<std::streamsize>(mlen));
  AUG_CHECK(is.good(), "truncated checkpoint manifest in ", path);

  CheckpointData data;
  data.manifest = nlohmann::json::parse(mtext);
  AUG_CHECK(data.manifest.value("byte_order", "") == "little",
            "checkpoint ", path, " declares an unsupported byte order");
  for (const auto& p : data.manifest.at("params")) {
    StoredTensor st;
    st.rows = p.at("rows").get<int64_t>();
    st.cols = p.at("cols").get<int64_t>();
    AUG_CHECK(st.rows > 0 && st.cols > 0, "bad tensor shape in ", path);
    st.values.resize(static_cast<size_t>(st.rows * st.cols));
    read_f64_block(is, st.values);
    AUG_CHECK(is.good(), "truncated tensor data in ", path);
    const std::string name = p.at("name").get<std::string>();
    data.names.push_back(name);
    data.tensors.emplace(name, std::move(st));
  }
  return data;
}

void apply_checkpoint(const CheckpointData& data, ParamStore& store) {
  AUG_CHECK(data.names.size() == store.items().size(),
            "checkpoint holds ", data.names.size(), " tensors, model has ",
            store.items().size());
  for (const auto& [name, t] : store.items()) {
    auto it = data.tensors.find(name);
    AUG_CHECK(it != data.tensors.end(), "checkpoint is missing ", name);
    const StoredTensor& st = it->second;
    AUG_CHECK(st.rows == t.rows() && st.cols == t.cols(), "parameter ", name,
              " is [", t.rows(), "x", t.cols(), "] in the model but [",
              st.rows, "x", st.cols, "] in the checkpoint");
    Tensor* dst = store.find(name);
    dst->mutable_values() = st.values;
  }
}

int apply_checkpoint_prefix(const CheckpointData& data, ParamStore& store,
                            const std::string& src_prefix,
                            const std::string& dst_prefix) {
  int copied = 0;
  for (const auto& name : data.names) {
    if (name.rfind(src_prefix, 0) != 0) continue;
    const std::string dst_name = dst_prefix + name.substr(src_prefix.size());
    Tensor* dst = store.find(dst_name);
    if (dst == nullptr) continue;
    const StoredTensor& st = data.tensors.at(name);
    AUG_CHECK(st.rows == dst->rows() && st.cols == dst->cols(), "parameter ",
              dst_name, " is [", dst->rows(), "x", dst->cols(),
              "] in the model but [", st.rows, "x", st.cols,
              "] in the checkpoint");
    dst->mutable_values() = st.values;
    ++copied;
  }
  return copied;
}

}  // namespace augraph
