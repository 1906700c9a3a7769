#include "mrsq/harness/config.h"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "mrsq/common/errors.h"

namespace mrsq::harness {

namespace {

template <typename T>
void ParseInto(const std::string& key, const std::string& text, T& out) {
  if constexpr (std::is_same_v<T, std::string>) {
    out = text;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1") {
      out = true;
    } else if (text == "false" || text == "0") {
      out = false;
    } else {
      throw ConfigError("config: '" + key + "' expects true/false, got '" + text + "'");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
      throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
    }
    out = v;
  } else {
    T v{};
    // Accept integral values written with an exponent or separators, e.g. 1e6.
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      char* end = nullptr;
      const double d = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || d != static_cast<double>(static_cast<T>(d))) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
      }
      v = static_cast<T>(d);
    }
    out = v;
  }
}

bool SetField(RunConfig& c, const std::string& key, const std::string& value) {
  bool found = false;
  ForEachField(c, [&](const char* name, auto& field) {
    if (!found && key == name) {
      ParseInto(key, value, field);
      found = true;
    }
  });
  return found;
}

double ParseDouble(const std::string& key, const std::string& text) {
  double v = 0.0;
  ParseInto(key, text, v);
  return v;
}

}  // namespace

void RunConfig::Validate() const {
  if (replay_ratio != 1) throw ConfigError("config: replay_ratio must be 1");
  if (total_steps < 0) throw ConfigError("config: total_steps must be >= 0");
  if (initial_random_steps < 0) throw ConfigError("config: initial_random_steps must be >= 0");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (encoder_horizon < 1 || multistep_horizon < 1) throw ConfigError("config: horizons must be >= 1");
  if (replay_capacity < batch_size) throw ConfigError("config: replay_capacity < batch_size");
  if (target_update_frequency < 1) throw ConfigError("config: target_update_frequency must be >= 1");
  if (exploration_noise < 0) throw ConfigError("config: exploration_noise must be >= 0");
  if (eval_interval < 0 || eval_episodes < 0) throw ConfigError("config: bad eval settings");
  if (checkpoint_interval < 0) throw ConfigError("config: checkpoint_interval must be >= 0");
  if (policy_change_interval < 0 || policy_change_probes < 0) {
    throw ConfigError("config: bad policy-change settings");
  }
  if (ensemble_size < 1) throw ConfigError("config: ensemble_size must be >= 1");
  if (sem_enabled && zs_dim % sem_group != 0) {
    throw ConfigError("config: zs_dim must be divisible by sem_group");
  }
  if (!(discount >= 0 && discount <= 1)) throw ConfigError("config: discount must be in [0, 1]");
}

RunConfig ConfigFromYaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML parse error: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (key == "env_params") {
      if (kv.second.IsNull()) continue;
      if (!kv.second.IsMap()) throw ConfigError("config: env_params must be a mapping");
      for (const auto& p : kv.second) {
        const std::string pk = p.first.as<std::string>();
        c.env_params[pk] = ParseDouble("env_params." + pk, p.second.as<std::string>());
      }
      continue;
    }
    if (!kv.second.IsScalar()) throw ConfigError("config: '" + key + "' must be a scalar");
    if (!SetField(c, key, kv.second.as<std::string>())) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c = ConfigFromYaml(ss.str());
  c.Validate();
  return c;
}

void ApplyOverride(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override: expected key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  const std::string prefix = "env_params.";
  if (key.rfind(prefix, 0) == 0) {
    config.env_params[key.substr(prefix.size())] = ParseDouble(key, value);
    return;
  }
  if (!SetField(config, key, value)) throw ConfigError("override: unknown key '" + key + "'");
}

nlohmann::json ToJson(const RunConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  ForEachField(config, [&](const char* name, const auto& field) { j[name] = field; });
  j["env_params"] = nlohmann::json::object();
  for (const auto& [k, v] : config.env_params) j["env_params"][k] = v;
  return j;
}

RunConfig FromJson(const nlohmann::json& j) {
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "env_params") {
      for (const auto& [pk, pv] : value.items()) c.env_params[pk] = pv.get<double>();
      continue;
    }
    bool found = false;
    ForEachField(c, [&](const char* name, auto& field) {
      if (!found && key == name) {
        field = value.get<std::remove_reference_t<decltype(field)>>();
        found = true;
      }
    });
    if (!found) throw ConfigError("config: unknown key '" + key + "' in manifest");
  }
  return c;
}

std::string ToYaml(const RunConfig& config) {
  std::ostringstream out;
  ForEachField(config, [&](const char* name, const auto& field) {
    using T = std::remove_cvref_t<decltype(field)>;
    out << name << ": ";
    if constexpr (std::is_same_v<T, bool>) {
      out << (field ? "true" : "false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      out << nlohmann::json(field).dump();
    } else {
      out << nlohmann::json(field).dump();
    }
    out << "\n";
  });
  out << "env_params:";
  if (config.env_params.empty()) out << " {}";
  out << "\n";
  for (const auto& [k, v] : config.env_params) out << "  " << k << ": " << nlohmann::json(v).dump() << "\n";
  return out.str();
}

std::string ConfigHash(const RunConfig& config) {
  nlohmann::json j = ToJson(config);
  j.erase("output_dir");
  const std::string text = j.dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int WorkerThreads() {
  const char* v = std::getenv("MRSQ_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

}  // namespace mrsq::harness
