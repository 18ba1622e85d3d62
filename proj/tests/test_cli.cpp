#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "catval/env.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = CATVAL_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string command =
      kCli + " " + args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.stdout_text = slurp(out);
  result.stderr_text = slurp(err);
  return result;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("catval_cli_test_" + std::to_string(std::rand()) + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_env(const fs::path& dir, const catval::EnvConfig& config) {
  const fs::path path = dir / "env.json";
  catval::save_env_config(config, path.string());
  return path;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("unknown flags exit 1 with usage on stderr") {
  TempDir tmp;
  const auto result = run_cli("distance-sweep --bogus 1", tmp.path);
  CHECK(result.exit_code == 1);
  CHECK(result.stderr_text.find("Usage") != std::string::npos);
}

TEST_CASE("missing subcommand exits 1") {
  TempDir tmp;
  CHECK(run_cli("", tmp.path).exit_code == 1);
}

TEST_CASE("missing input files exit 2") {
  TempDir tmp;
  const auto ann = run_cli("annotate --env " + (tmp.path / "nope.json").string() +
                               " --problems 1 --solutions 1 --out " +
                               (tmp.path / "d.jsonl").string(),
                           tmp.path);
  CHECK(ann.exit_code == 2);

  const auto ent = run_cli("entropy --data " + (tmp.path / "nope.jsonl").string() + " --out " +
                               (tmp.path / "e.csv").string(),
                           tmp.path);
  CHECK(ent.exit_code == 2);
}

TEST_CASE("validation failures exit 1 and leave no partial outputs") {
  TempDir tmp;
  const auto env_path = write_env(tmp.path, {3, 4, 9, 0.0, 0.2});
  const fs::path data = tmp.path / "d.jsonl";
  auto ok = run_cli("annotate --env " + env_path.string() +
                        " --problems 2 --solutions 2 --k 4 --seed 1 --out " + data.string(),
                    tmp.path);
  REQUIRE(ok.exit_code == 0);

  const fs::path model = tmp.path / "m.json";
  const auto bad_loss = run_cli("train --env " + env_path.string() + " --data " + data.string() +
                                    " --loss nonsense --out " + model.string(),
                                tmp.path);
  CHECK(bad_loss.exit_code == 1);
  CHECK_FALSE(fs::exists(model));

  // malformed dataset content is a validation failure, not an IO failure
  std::ofstream(tmp.path / "broken.jsonl") << "{\"k\":4, oops\n";
  const auto broken = run_cli("train --env " + env_path.string() + " --data " +
                                  (tmp.path / "broken.jsonl").string() + " --loss scalar-mse --out " +
                                  model.string(),
                              tmp.path);
  CHECK(broken.exit_code == 1);
  CHECK_FALSE(fs::exists(model));
}

TEST_CASE("distance-sweep emits the expected grid and a manifest") {
  TempDir tmp;
  const fs::path out = tmp.path / "sweep.csv";
  const auto result = run_cli(
      "distance-sweep --posterior one-hot,gauss-dynamic --k 8 --grid 0.05 --out " + out.string(),
      tmp.path);
  REQUIRE(result.exit_code == 0);
  const std::string csv = slurp(out);
  CHECK(count_lines(csv) == 1 + 2 * 21);  // header + 2 specs x 21 grid points
  CHECK(csv.rfind("spec,p,distance\n", 0) == 0);
  CHECK(fs::exists(tmp.path / "sweep.csv.manifest.json"));

  // reruns are byte-identical
  const fs::path again = tmp.path / "sweep2.csv";
  run_cli("distance-sweep --posterior one-hot,gauss-dynamic --k 8 --grid 0.05 --out " +
              again.string(),
          tmp.path);
  CHECK(slurp(again) == csv);
}

TEST_CASE("env-info prints config, hash, and probe statistics") {
  TempDir tmp;
  const auto env_path = write_env(tmp.path, {4, 6, 33, 0.9, 0.8});
  const auto result =
      run_cli("env-info --env " + env_path.string() + " --probe 10", tmp.path);
  REQUIRE(result.exit_code == 0);
  CHECK(result.stdout_text.find("\"hash\"") != std::string::npos);
  CHECK(result.stdout_text.find("\"leaves_per_problem\": 4096") != std::string::npos);
  CHECK(result.stdout_text.find("mean_root_value") != std::string::npos);
}

TEST_CASE("full pipeline runs and is byte-reproducible") {
  TempDir tmp;
  const auto env_path = write_env(tmp.path, {3, 4, 15, 0.5, 0.3});

  auto pipeline = [&](const std::string& suffix) {
    const fs::path data = tmp.path / ("d" + suffix + ".jsonl");
    const fs::path model = tmp.path / ("m" + suffix + ".json");
    const fs::path bon = tmp.path / ("bon" + suffix + ".csv");
    const fs::path beam = tmp.path / ("beam" + suffix + ".csv");
    const fs::path entropy = tmp.path / ("ent" + suffix + ".csv");

    REQUIRE(run_cli("annotate --env " + env_path.string() +
                        " --problems 5 --solutions 3 --k 4 --seed 7 --out " + data.string(),
                    tmp.path)
                .exit_code == 0);
    REQUIRE(run_cli("train --env " + env_path.string() + " --data " + data.string() +
                        " --loss hl --posterior gauss-dynamic --epochs 3 --batch 16 --seed 2 " +
                        "--hidden 8,8 --lr 0.003 --out " + model.string(),
                    tmp.path)
                .exit_code == 0);
    REQUIRE(run_cli("eval-bon --model " + model.string() + " --env " + env_path.string() +
                        " --n 2,4 --problems 20 --seed 1 --problem-offset 100 --out " +
                        bon.string(),
                    tmp.path)
                .exit_code == 0);
    REQUIRE(run_cli("eval-beam --model " + model.string() + " --env " + env_path.string() +
                        " --beams 2 --width 2 --problems 10 --seed 1 --problem-offset 100 --out " +
                        beam.string(),
                    tmp.path)
                .exit_code == 0);
    REQUIRE(run_cli("entropy --data " + data.string() + " --out " + entropy.string(), tmp.path)
                .exit_code == 0);
    return slurp(data) + "\x01" + slurp(model) + "\x01" + slurp(bon) + "\x01" +
           slurp(tmp.path / ("bon" + suffix + ".json")) + "\x01" + slurp(beam) + "\x01" +
           slurp(entropy);
  };

  const std::string first = pipeline("1");
  const std::string second = pipeline("2");
  CHECK(first == second);
  CHECK(first.find("method,N,M,success_rate") != std::string::npos);

  // manifests exist beside every primary output
  CHECK(fs::exists(tmp.path / "d1.jsonl.manifest.json"));
  CHECK(fs::exists(tmp.path / "m1.json.manifest.json"));
  CHECK(fs::exists(tmp.path / "bon1.csv.manifest.json"));
  CHECK(fs::exists(tmp.path / "beam1.csv.manifest.json"));
  CHECK(fs::exists(tmp.path / "ent1.csv.manifest.json"));
}

TEST_CASE("train rejects a dataset annotated under a different env") {
  TempDir tmp;
  const auto env_a = write_env(tmp.path, {3, 4, 15, 0.5, 0.3});
  const fs::path env_b = tmp.path / "env_b.json";
  catval::save_env_config({3, 4, 16, 0.5, 0.3}, env_b.string());

  const fs::path data = tmp.path / "d.jsonl";
  REQUIRE(run_cli("annotate --env " + env_a.string() +
                      " --problems 2 --solutions 2 --k 4 --seed 7 --out " + data.string(),
                  tmp.path)
              .exit_code == 0);
  const auto result = run_cli("train --env " + env_b.string() + " --data " + data.string() +
                                  " --loss scalar-mse --out " + (tmp.path / "m.json").string(),
                              tmp.path);
  CHECK(result.exit_code == 1);
}

TEST_CASE("version flag prints the tool version") {
  TempDir tmp;
  const auto result = run_cli("--version", tmp.path);
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("0.1.0") != std::string::npos);
}
