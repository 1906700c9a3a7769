#ifndef MRSQ_ENV_REGISTRY_H_
#define MRSQ_ENV_REGISTRY_H_

#include <map>
#include <memory>
#include <string>

#include "mrsq/env/env.h"

namespace mrsq::env {

// Per-environment parameter table, e.g. {"n": 5, "actions": 2}.
using EnvParams = std::map<std::string, double>;

// Known names: "nchain", "pendulum", "cartbalance". Unknown names or
// parameters throw ConfigError.
std::unique_ptr<Environment> MakeEnvironment(const std::string& name,
                                             const EnvParams& params = {});

}  // namespace mrsq::env

#endif  // MRSQ_ENV_REGISTRY_H_
