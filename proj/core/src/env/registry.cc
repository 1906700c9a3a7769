#include "mrsq/env/registry.h"

#include <set>

#include "mrsq/common/errors.h"
#include "mrsq/env/cartbalance.h"
#include "mrsq/env/nchain.h"
#include "mrsq/env/pendulum.h"

namespace mrsq::env {

namespace {

void CheckKeys(const std::string& env, const EnvParams& params,
               const std::set<std::string>& allowed) {
  for (const auto& [key, value] : params) {
    if (!allowed.count(key)) throw ConfigError(env + ": unknown parameter '" + key + "'");
  }
}

double Get(const EnvParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

std::unique_ptr<Environment> MakeEnvironment(const std::string& name,
                                             const EnvParams& params) {
  if (name == "nchain") {
    CheckKeys(name, params, {"n", "actions", "gamma", "max_episode_steps"});
    NChainSpec spec;
    spec.n = static_cast<int>(Get(params, "n", spec.n));
    spec.actions = static_cast<int>(Get(params, "actions", spec.actions));
    spec.gamma = Get(params, "gamma", spec.gamma);
    spec.max_episode_steps =
        static_cast<int>(Get(params, "max_episode_steps", spec.max_episode_steps));
    return std::make_unique<NChainEnv>(spec);
  }
  if (name == "pendulum") {
    CheckKeys(name, params, {"gravity", "mass", "length", "dt", "max_speed",
                             "max_torque", "max_episode_steps"});
    PendulumParams p;
    p.gravity = Get(params, "gravity", p.gravity);
    p.mass = Get(params, "mass", p.mass);
    p.length = Get(params, "length", p.length);
    p.dt = Get(params, "dt", p.dt);
    p.max_speed = Get(params, "max_speed", p.max_speed);
    p.max_torque = Get(params, "max_torque", p.max_torque);
    p.max_episode_steps =
        static_cast<int>(Get(params, "max_episode_steps", p.max_episode_steps));
    return std::make_unique<PendulumEnv>(p);
  }
  if (name == "cartbalance") {
    CheckKeys(name, params, {"gravity", "cart_mass", "pole_mass", "half_length",
                             "force_mag", "dt", "angle_limit", "position_limit",
                             "max_episode_steps"});
    CartBalanceParams p;
    p.gravity = Get(params, "gravity", p.gravity);
    p.cart_mass = Get(params, "cart_mass", p.cart_mass);
    p.pole_mass = Get(params, "pole_mass", p.pole_mass);
    p.half_length = Get(params, "half_length", p.half_length);
    p.force_mag = Get(params, "force_mag", p.force_mag);
    p.dt = Get(params, "dt", p.dt);
    p.angle_limit = Get(params, "angle_limit", p.angle_limit);
    p.position_limit = Get(params, "position_limit", p.position_limit);
    p.max_episode_steps =
        static_cast<int>(Get(params, "max_episode_steps", p.max_episode_steps));
    return std::make_unique<CartBalanceEnv>(p);
  }
  throw ConfigError("unknown environment '" + name + "'");
}

}  // namespace mrsq::env
