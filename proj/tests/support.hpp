#pragma once

#include <cmath>
#include <string>

#include "rtx/config.hpp"

#ifndef RTX_CONFIG_DIR
#define RTX_CONFIG_DIR "configs"
#endif

namespace rtx::test {

inline std::string config_path(const std::string& name) { return std::string(RTX_CONFIG_DIR) + "/" + name; }

inline ConfigFile paper_file(const std::string& name = "paper_fig2a.cfg")
{
    return ConfigFile::parse(config_path(name));
}

inline TransducerConfig paper_config(const std::string& name = "paper_fig2a.cfg")
{
    return load_config(config_path(name));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace rtx::test
