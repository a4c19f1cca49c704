#include <doctest.h>

#include <cstdio>
#include <sys/wait.h>

#include <json.hpp>

#include "helpers.hpp"
#include "illum/version.hpp"

using nlohmann::json;
using testing_support::slurp;
using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(ILLUM_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t pngs_under(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& f : fs::recursive_directory_iterator(dir))
    n += f.path().extension() == ".png" && f.path().parent_path().filename() == "images";
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("version and usage errors") {
  const auto v = cli("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find(illum::kVersion) != std::string::npos);
  CHECK(cli("").code != 0);
  CHECK(cli("generate --no-such-flag").code != 0);
  CHECK(cli("frobnicate").code != 0);
}

TEST_CASE("generate from a config file") {
  TempDir dir("cli_gen");
  const auto out = dir.path() / "corpus";
  write(dir.path() / "tiny.json",
        json{{"seed", 3},
             {"out_dir", out.string()},
             {"sweep", {{"targets", {{"sbc", 4}, {"white", 2}, {"grating", 2}, {"grid", 2}}}}}}
            .dump());
  const auto r = cli("--config " + q(dir.path() / "tiny.json") + " generate");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["images"] == 10);
  CHECK(pngs_under(out) == 10);
  CHECK(fs::exists(j["manifest"].get<std::string>()));

  // Flags override the file.
  const auto other = dir.path() / "other";
  REQUIRE(cli("--config " + q(dir.path() / "tiny.json") + " generate -o " + q(other)).code == 0);
  CHECK(slurp(other / "manifest.jsonl") == slurp(out / "manifest.jsonl"));
}

TEST_CASE("config errors map to exit codes") {
  TempDir dir("cli_cfg");
  write(dir.path() / "bad.json", json{{"seed", 1}, {"colour", "red"}}.dump());
  CHECK(cli("--config " + q(dir.path() / "bad.json") + " generate -o " + q(dir.path() / "x")).code == 2);
  write(dir.path() / "broken.json", "{");
  CHECK(cli("--config " + q(dir.path() / "broken.json") + " generate").code == 2);
  CHECK(cli("split -m " + q(dir.path() / "missing")).code == 3);
  CHECK(cli("fit -s " + q(dir.path() / "missing.jsonl")).code == 3);
}

TEST_CASE("simulate then fit recovers the injected reduction") {
  TempDir dir("cli_sim");
  const auto pipe = cli("simulate --reduction 35.03 --sigma 10 --trials 1000 --seed 1 | " +
                        std::string(ILLUM_CLI) + " fit");
  REQUIRE(pipe.code == 0);
  const auto j = json::parse(pipe.out);
  CHECK(std::abs(j["reduction"]["reduction"].get<double>() - 35.03) <= 2.0);
  CHECK(j["fit"]["n_trials"] == 1000);

  const auto log = dir.path() / "s1.jsonl";
  REQUIRE(cli("simulate --reduction 35.03 --sigma 10 --trials 1000 --seed 1 -o " + q(log)).code == 0);
  const auto from_file = cli("fit -s " + q(log));
  REQUIRE(from_file.code == 0);
  CHECK(json::parse(from_file.out)["reduction"] == j["reduction"]);
  CHECK(cli("simulate --reduction 35.03 -o " + q(log)).code != 0);  // refuses to overwrite

  // A log with no answers yet cannot be fitted.
  const auto few = dir.path() / "few.jsonl";
  REQUIRE(cli("simulate --reduction 10 --trials 11 --seed 2 -o " + q(few)).code == 0);
  const auto text = slurp(few);
  write(few, text.substr(0, text.find('\n') + 1));
  CHECK(cli("fit -s " + q(few)).code == 5);
}

TEST_CASE("table from a directory of logs") {
  TempDir dir("cli_table");
  const auto logs = dir.path() / "logs";
  fs::create_directories(logs);
  int seed = 1;
  for (const std::string subject : {"a", "b"})
    for (const std::string family : {"sbc", "grid"})
      REQUIRE(cli("simulate --reduction 30 --trials 600 --seed " + std::to_string(seed++) +
                  " --subject " + subject + " --family " + family + " -o " +
                  q(logs / (subject + "_" + family + ".jsonl")))
                  .code == 0);
  const auto r = cli("table --sessions " + q(logs) + " -o " + q(dir.path() / "t"));
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("subject,sbc,white,grating,grid\n", 0) == 0);
  CHECK(r.out.find("\na,") != std::string::npos);
  CHECK(r.out.find("\naverage,") != std::string::npos);
  CHECK(slurp(dir.path() / "t.csv") == r.out);
  const auto j = json::parse(slurp(dir.path() / "t.json"));
  CHECK(j["rows"].size() == 2);
  CHECK(j["average"]["white"].is_null());
  CHECK(std::abs(j["average"]["sbc"].get<double>() - 30) < 3);
  CHECK(cli("table --sessions " + q(dir.path() / "empty")).code == 3);
}

}  // TEST_SUITE
