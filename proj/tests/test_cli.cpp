#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qoc/serialize.hpp"

using namespace qoc;
namespace fs = std::filesystem;

namespace {

const std::string kCli = QOC_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qoc_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string run_capture(const std::string& args) {
  TempDir scratch;
  const fs::path log = scratch.path / "log.txt";
  const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string write_qubit_problem(const fs::path& dir) {
  const std::string text = R"({
    "units": {"frequency": "MHz", "two_pi": false},
    "drift": {"dim": 2, "entries": []},
    "controls": [{"hamiltonian": {"scale": 0.5, "of": {"builder": "pauli_x"}}, "bound": 50.0}],
    "constraints": [{"psi_in": {"dim": 2, "basis": 0}, "psi_out": {"dim": 2, "basis": 1}}],
    "grid": {"steps": 100, "tau_us": 0.01}
  })";
  const fs::path path = dir / "qubit.json";
  std::ofstream(path) << text;
  return path.string();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("a missing problem file exits with the input code and names the path") {
  const std::string out = run_capture("optimize /nonexistent/problem.json --out /tmp/qoc_none");
  CHECK(out.find("/nonexistent/problem.json") != std::string::npos);
  CHECK(run("optimize /nonexistent/problem.json --out /tmp/qoc_none") == 2);
}

TEST_CASE("closed optimization of the pi-rotation fixture converges") {
  TempDir dir;
  const std::string problem = write_qubit_problem(dir.path);
  const std::string out = (dir.path / "run").string();
  REQUIRE(run("optimize " + problem + " --mode closed --seed 3 --out " + out +
              " --max-iterations 300") == 0);
  const auto result = read_json_file(out + "/result.json");
  CHECK(result.at("final_report").at("phi").get<double>() < 1e-6);
  CHECK(fs::exists(out + "/pulse.csv"));
  CHECK(fs::exists(out + "/manifest.json"));
  CHECK(result.at("manifest").get<std::string>() == "manifest.json");
}

TEST_CASE("runs are deterministic in the seed") {
  TempDir dir;
  const std::string problem = write_qubit_problem(dir.path);
  const std::string out_a = (dir.path / "a").string();
  const std::string out_b = (dir.path / "b").string();
  const std::string flags = " --mode closed --init random --seed 7 --max-iterations 40 --out ";
  REQUIRE(run("optimize " + problem + flags + out_a) == 0);
  REQUIRE(run("optimize " + problem + flags + out_b) == 0);
  CHECK(read_file(out_a + "/pulse.csv") == read_file(out_b + "/pulse.csv"));
}

TEST_CASE("evaluation of an optimal closed pulse matches its objective") {
  TempDir dir;
  const std::string problem = write_qubit_problem(dir.path);
  const std::string opt_out = (dir.path / "opt").string();
  REQUIRE(run("optimize " + problem + " --mode closed --seed 5 --out " + opt_out +
              " --max-iterations 300") == 0);
  const std::string eval_out = (dir.path / "eval").string();
  REQUIRE(run("evaluate " + problem + " " + opt_out + "/pulse.csv --out " + eval_out) == 0);
  const auto result = read_json_file(opt_out + "/result.json");
  const auto eval = read_json_file(eval_out + "/evaluation.json");
  const double phi = result.at("final_report").at("phi").get<double>();
  const double infidelity = eval.at("infidelity").get<double>();
  CHECK(std::abs(phi - infidelity) < 1e-6);
}

TEST_CASE("a pulse with the wrong grid is rejected") {
  TempDir dir;
  const std::string problem = write_qubit_problem(dir.path);
  Pulse wrong;
  wrong.grid = {60, 0.01};
  wrong.amplitudes = RealMatrix::Zero(60, 1);
  const fs::path pulse_path = dir.path / "wrong.csv";
  save_pulse_csv(wrong, pulse_path.string());
  CHECK(run("evaluate " + problem + " " + pulse_path.string() + " --out " +
            (dir.path / "eval").string()) == 2);
}

TEST_CASE("a single-seed batch composes optimize and evaluate") {
  TempDir dir;
  const std::string problem = write_qubit_problem(dir.path);
  const std::string batch_out = (dir.path / "batch").string();
  REQUIRE(run("batch " + problem + " --seeds 9..9 --modes closed --max-iterations 300 --out " +
              batch_out) == 0);
  const auto records = load_batch_records(batch_out + "/records.jsonl");
  REQUIRE(records.size() == 1);
  CHECK(records[0].seed == 9);
  CHECK(records[0].mode == "closed");

  const std::string opt_out = (dir.path / "opt9").string();
  REQUIRE(run("optimize " + problem + " --mode closed --seed 9 --out " + opt_out +
              " --max-iterations 300") == 0);
  const auto result = read_json_file(opt_out + "/result.json");
  CHECK(records[0].phi ==
        doctest::Approx(result.at("final_report").at("phi").get<double>()).epsilon(1e-12));

  const std::string eval_out = (dir.path / "eval9").string();
  REQUIRE(run("evaluate " + problem + " " + opt_out + "/pulse.csv --out " + eval_out) == 0);
  const auto eval = read_json_file(eval_out + "/evaluation.json");
  CHECK(records[0].infidelity ==
        doctest::Approx(eval.at("infidelity").get<double>()).epsilon(1e-12));
}

TEST_CASE("an empty seed range is an input error") {
  TempDir dir;
  const std::string problem = write_qubit_problem(dir.path);
  CHECK(run("batch " + problem + " --seeds 5..4 --out " + (dir.path / "b").string()) == 2);
}

TEST_CASE("a sweep over two scale factors writes two rows") {
  TempDir dir;
  const std::string problem = write_qubit_problem(dir.path);
  Pulse pulse;
  pulse.grid = {100, 0.01};
  pulse.amplitudes = RealMatrix::Zero(100, 1);
  const fs::path pulse_path = dir.path / "zero.csv";
  save_pulse_csv(pulse, pulse_path.string());
  const std::string out = (dir.path / "sweep").string();
  REQUIRE(run("sweep " + problem + " " + pulse_path.string() + " --sf 0 1 --sm 1 --out " + out) ==
          0);
  const std::string csv = read_file(out + "/sweep.csv");
  int rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 2 + 2);  // manifest comment + header + two data rows
}

TEST_CASE("fixtures are written and load back") {
  TempDir dir;
  const std::string out = (dir.path / "fixtures").string();
  REQUIRE(run("fixtures --out " + out) == 0);
  for (const std::string name :
       {"fig2_encoding", "dd_transverse", "experiment_initialize", "experiment_decode",
        "experiment_ry_pi"}) {
    CHECK(fs::exists(out + "/" + name + ".json"));
  }
  const ControlProblem p = load_problem(out + "/fig2_encoding.json");
  CHECK(p.dim() == 60);
  CHECK(p.grid.steps == 600);
}
