#include "hoie/training/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace hoie::train {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "hoie-checkpoint-1";

json read_manifest(const std::string& path) {
  std::ifstream in(path + ".json");
  if (!in) throw std::runtime_error("cannot open checkpoint manifest " + path + ".json");
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed checkpoint manifest " + path + ".json: " + e.what());
  }
  if (m.value("format", "") != kFormat) throw std::runtime_error(path + ".json is not a " + std::string(kFormat) + " manifest");
  return m;
}

CheckpointInfo info_of(const json& m) {
  return {m.at("config").dump(), m.at("seed").get<std::uint64_t>()};
}

}  // namespace

void save_checkpoint(const std::string& path, const num::ParameterStore& store, const std::string& config_json,
                     std::uint64_t seed) {
  json m;
  m["format"] = kFormat;
  m["seed"] = seed;
  m["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  m["tensors"] = json::array();
  std::ofstream bin(path + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + path + ".bin");
  std::size_t offset = 0;
  for (const auto& p : store) {
    m["tensors"].push_back({{"name", p->name}, {"shape", p->value.shape()}, {"offset", offset}});
    auto d = p->value.data();
    bin.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
    offset += d.size();
  }
  std::ofstream(path + ".json") << m.dump(2) << '\n';
}

CheckpointInfo read_checkpoint_info(const std::string& path) { return info_of(read_manifest(path)); }

CheckpointInfo load_checkpoint(const std::string& path, num::ParameterStore& store) {
  const json m = read_manifest(path);
  std::ifstream bin(path + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + path + ".bin");
  std::vector<double> blob;
  for (double x; bin.read(reinterpret_cast<char*>(&x), sizeof x);) blob.push_back(x);

  std::map<std::string, const json*> by_name;
  for (const auto& t : m.at("tensors")) by_name[t.at("name").get<std::string>()] = &t;
  for (auto& p : store) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint has no tensor '" + p->name + "'");
    const auto shape = it->second->at("shape").get<num::Shape>();
    if (shape != p->value.shape()) {
      throw std::runtime_error("tensor '" + p->name + "' has shape " + num::shape_string(shape) + " in the checkpoint, " +
                               num::shape_string(p->value.shape()) + " in the model");
    }
    const auto offset = it->second->at("offset").get<std::size_t>();
    auto d = p->value.data();
    if (offset + d.size() > blob.size()) throw std::runtime_error(path + ".bin is truncated");
    std::copy(blob.begin() + static_cast<long>(offset), blob.begin() + static_cast<long>(offset + d.size()), d.begin());
    ++p->version;
  }
  return info_of(m);
}

}  // namespace hoie::train
