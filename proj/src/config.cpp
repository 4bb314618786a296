#include "cpa/config.hpp"

#include <fstream>

namespace cpa {

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  SystemConfig cfg = j.get<SystemConfig>();
  cfg.validate();
  return cfg;
}

void save_config(const SystemConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open config file for writing: " + path);
  nlohmann::json j = cfg;
  out << j.dump(2) << '\n';
}

}  // namespace cpa
