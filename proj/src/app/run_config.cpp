#include <fstream>
#include <set>

#include "illum/error.hpp"
#include "illum/run_config.hpp"

namespace illum {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::configuration, where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw Error(ErrorKind::configuration, "unknown key '" + key + "' in " + where);
}

LossConfig loss_from_json(const json& j) {
  check_keys(j, {"alpha", "beta", "ssim_window", "ssim_sigma", "dynamic_range", "c1", "c2"}, "loss");
  LossConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.beta = j.value("beta", c.beta);
  c.ssim_window = j.value("ssim_window", c.ssim_window);
  c.ssim_sigma = j.value("ssim_sigma", c.ssim_sigma);
  c.dynamic_range = j.value("dynamic_range", c.dynamic_range);
  if (j.contains("c1")) c.c1 = j["c1"].get<double>();
  if (j.contains("c2")) c.c2 = j["c2"].get<double>();
  try {
    validate(c);
  } catch (const Error& e) {
    throw Error(ErrorKind::configuration, std::string("loss: ") + e.what());
  }
  return c;
}

ServerOptions server_from_json(const json& j) {
  check_keys(j, {"host", "port", "log_dir", "static_dir", "restore"}, "server");
  ServerOptions s;
  s.host = j.value("host", s.host);
  s.port = j.value("port", s.port);
  if (j.contains("log_dir")) s.log_dir = j["log_dir"].get<std::string>();
  if (j.contains("static_dir") && !j["static_dir"].is_null())
    s.static_dir = j["static_dir"].get<std::string>();
  s.restore = j.value("restore", s.restore);
  if (s.port < 0 || s.port > 65535)
    throw Error(ErrorKind::configuration, "server.port must be in [0, 65535]");
  return s;
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  check_keys(j,
             {"seed", "sweep", "out_dir", "families", "augment_target", "threshold", "loss",
              "server"},
             "run config");
  try {
    RunConfig c;
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("sweep")) c.sweep = sweep_config_from_json(j["sweep"]);
    if (c.seed) c.sweep.seed = *c.seed;
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("families"))
      for (const auto& f : j["families"]) c.families.push_back(family_from_string(f.get<std::string>()));
    c.augment_target = j.value("augment_target", c.augment_target);
    c.threshold = j.value("threshold", c.threshold);
    if (!(c.threshold >= 0 && c.threshold <= 1))
      throw Error(ErrorKind::configuration, "threshold must be in [0, 1]");
    if (j.contains("loss")) c.loss = loss_from_json(j["loss"]);
    if (j.contains("server")) c.server = server_from_json(j["server"]);
    return c;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::configuration, std::string("malformed run config: ") + ex.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::configuration, path.string() + ": " + ex.what());
  }
  return run_config_from_json(j);
}

json to_json(const RunConfig& c) {
  json families = json::array();
  for (Family f : c.families) families.push_back(std::string(to_string(f)));
  json loss{{"alpha", c.loss.alpha},
            {"beta", c.loss.beta},
            {"ssim_window", c.loss.ssim_window},
            {"ssim_sigma", c.loss.ssim_sigma},
            {"dynamic_range", c.loss.dynamic_range}};
  if (c.loss.c1) loss["c1"] = *c.loss.c1;
  if (c.loss.c2) loss["c2"] = *c.loss.c2;
  json server{{"host", c.server.host},
              {"port", c.server.port},
              {"log_dir", c.server.log_dir.string()},
              {"restore", c.server.restore}};
  server["static_dir"] = c.server.static_dir ? json(c.server.static_dir->string()) : json(nullptr);
  json j{{"sweep", to_json(c.sweep)},
         {"out_dir", c.out_dir.string()},
         {"families", families},
         {"augment_target", c.augment_target},
         {"threshold", c.threshold},
         {"loss", loss},
         {"server", server}};
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

}  // namespace illum
