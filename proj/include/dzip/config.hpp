#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dzip/engine.hpp"
#include "dzip/error.hpp"
#include "dzip/innovations.hpp"
#include "dzip/simulate.hpp"

namespace dzip {

/// Everything needed to re-run a CLI invocation. Keys of the flat key-value
/// form match the long CLI flag names.
struct RunConfig {
  std::string command;
  std::string input;
  std::vector<Variant> models{Variant::sv};
  std::uint64_t burn = 5000;
  std::uint64_t draws = 50000;
  std::uint64_t thin = 10;
  std::size_t windows = 250;
  std::uint64_t seed = 42;
  std::string out = "out";
  bool conditional = true;
  bool svg = false;
  std::size_t workers = 0;
  std::string dataset;
  Z0Prior z0_prior = Z0Prior::weak_proper;
  GeneratorConfig generator;

  McmcConfig mcmc(Variant v) const {
    McmcConfig c;
    c.n_burn = burn;
    c.n_draws = draws;
    c.thin = thin;
    c.seed = seed;
    c.variant = v;
    c.priors.z0 = z0_prior;
    return c;
  }

  std::map<std::string, std::string> to_map() const {
    std::map<std::string, std::string> m;
    m["command"] = command;
    m["input"] = input;
    std::string models_text;
    for (Variant v : models) {
      if (!models_text.empty()) models_text += ',';
      models_text += variant_name(v);
    }
    m["model"] = models_text;
    m["burn"] = std::to_string(burn);
    m["draws"] = std::to_string(draws);
    m["thin"] = std::to_string(thin);
    m["windows"] = std::to_string(windows);
    m["seed"] = std::to_string(seed);
    m["out"] = out;
    m["conditional"] = conditional ? "true" : "false";
    m["svg"] = svg ? "true" : "false";
    m["workers"] = std::to_string(workers);
    m["dataset"] = dataset;
    m["z0-prior"] = z0_prior == Z0Prior::flat ? "flat" : "weak";
    const auto num = [](double x) {
      std::ostringstream s;
      s.precision(17);
      s << x;
      return s.str();
    };
    const auto& g = generator;
    m["length"] = std::to_string(g.length);
    m["pi"] = num(g.pi);
    m["z0"] = num(g.z0);
    m["sigma2"] = num(g.sigma2);
    m["nu"] = num(g.nu);
    m["mu"] = num(g.mu);
    m["phi"] = num(g.phi);
    m["sigma-xi2"] = num(g.sigma_xi2);
    return m;
  }

  void set(const std::string& key, const std::string& value) {
    try {
      if (key == "command") command = value;
      else if (key == "input") input = value;
      else if (key == "model") models = parse_models(value);
      else if (key == "burn") burn = std::stoull(value);
      else if (key == "draws") draws = std::stoull(value);
      else if (key == "thin") thin = std::stoull(value);
      else if (key == "windows") windows = std::stoull(value);
      else if (key == "seed") seed = std::stoull(value);
      else if (key == "out") out = value;
      else if (key == "conditional") conditional = parse_bool(value);
      else if (key == "unconditional") conditional = !parse_bool(value);
      else if (key == "svg") svg = parse_bool(value);
      else if (key == "workers") workers = std::stoull(value);
      else if (key == "dataset") dataset = value;
      else if (key == "z0-prior") {
        if (value != "flat" && value != "weak") throw UsageError("z0-prior must be flat or weak");
        z0_prior = value == "flat" ? Z0Prior::flat : Z0Prior::weak_proper;
      } else if (key == "length") generator.length = std::stoull(value);
      else if (key == "pi") generator.pi = std::stod(value);
      else if (key == "z0") generator.z0 = std::stod(value);
      else if (key == "sigma2") generator.sigma2 = std::stod(value);
      else if (key == "nu") generator.nu = std::stod(value);
      else if (key == "mu") generator.mu = std::stod(value);
      else if (key == "phi") generator.phi = std::stod(value);
      else if (key == "sigma-xi2") generator.sigma_xi2 = std::stod(value);
      else throw UsageError("unknown config key '" + key + "'");
    } catch (const std::logic_error&) {
      throw UsageError("invalid value '" + value + "' for config key '" + key + "'");
    }
  }

  static std::vector<Variant> parse_models(const std::string& text) {
    if (text == "all") return {all_variants.begin(), all_variants.end()};
    std::vector<Variant> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto v = parse_variant(item);
      if (!v) throw UsageError("unknown model '" + item + "' (gaussian|student_t|mixture|sv|all)");
      out.push_back(*v);
    }
    if (out.empty()) throw UsageError("no model given");
    return out;
  }

  static bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw UsageError("expected a boolean, got '" + v + "'");
  }
};

/// Applies a `key = value` file (# comments allowed) onto `cfg`.
inline void apply_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    if (strip(line).empty()) continue;
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(row) + ": expected key = value");
    }
    cfg.set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
}

}  // namespace dzip
