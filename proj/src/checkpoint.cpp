#include "gsdn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gsdn {

std::string params_to_json(const std::vector<ad::Param*>& params) {
  nlohmann::json root;
  root["format"] = "gsdn-checkpoint-v1";
  nlohmann::json list = nlohmann::json::array();
  for (const ad::Param* p : params) {
    nlohmann::json entry;
    entry["name"] = p->name;
    std::vector<int> shape;
    for (int i = 0; i < std::max(p->value.ndim(), 2); ++i) shape.push_back(p->value.dim(i));
    entry["shape"] = shape;
    entry["data"] = p->value.raw();
    list.push_back(std::move(entry));
  }
  root["params"] = std::move(list);
  return root.dump();
}

void params_from_json(const std::string& json_text, const std::vector<ad::Param*>& params) {
  const nlohmann::json root = nlohmann::json::parse(json_text);
  if (!root.contains("params")) throw std::runtime_error("checkpoint: missing params array");
  for (ad::Param* p : params) {
    bool found = false;
    for (const auto& entry : root["params"]) {
      if (entry.at("name").get<std::string>() != p->name) continue;
      const auto data = entry.at("data").get<std::vector<double>>();
      if (data.size() != p->value.size())
        throw std::runtime_error("checkpoint: shape mismatch for parameter '" + p->name + "'");
      for (size_t i = 0; i < data.size(); ++i) p->value[i] = data[i];
      found = true;
      break;
    }
    if (!found) throw std::runtime_error("checkpoint: parameter '" + p->name + "' not found");
  }
}

void save_checkpoint(const std::vector<ad::Param*>& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << params_to_json(params);
}

void load_checkpoint(const std::string& path, const std::vector<ad::Param*>& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  params_from_json(text, params);
}

}  // namespace gsdn
