#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spex/extract.hpp"
#include "spex/gbt.hpp"
#include "spex/identify.hpp"
#include "spex/indices.hpp"
#include "spex/io.hpp"
#include "spex/synth.hpp"

using namespace spex;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / ("spex_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome spex_cli(const Workdir& w, const std::string& args) {
  const std::string cmd = std::string(SPEX_CLI) + " " + args + " > " + (w / "stdout") + " 2> " +
                          (w / "stderr");
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, io::read_file(w / "stdout"),
          io::read_file(w / "stderr")};
}

json first_json_line(const std::string& text) {
  return json::parse(text.substr(0, text.find('\n')));
}

// The provider's own stderr is inherited, so our error line comes last.
json last_json_line(std::string text) {
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return json::parse(text.substr(text.rfind('\n') + 1));
}

}  // namespace

TEST_CASE("synth, sample, eval, fit, extract agree with library calls") {
  Workdir w;
  REQUIRE(spex_cli(w, "synth --family complete_hierarchy --n 10 --num-sets 2 --cardinality 3 --seed 4 --out " +
                          (w / "vf.json") + " --truth " + (w / "truth.jsonl"))
              .code == 0);
  REQUIRE(spex_cli(w, "sample --n 10 --count 300 --seed 9 --out " + (w / "masks.jsonl")).code == 0);
  REQUIRE(spex_cli(w, "eval --vf " + (w / "vf.json") + " --masks " + (w / "masks.jsonl") + " --out " +
                          (w / "data.jsonl"))
              .code == 0);
  REQUIRE(spex_cli(w, "fit --data " + (w / "data.jsonl") + " --max-depth 3 --trees 40 --lr 0.2 --out " +
                          (w / "model.json"))
              .code == 0);
  REQUIRE(spex_cli(w, "extract --model " + (w / "model.json") + " --out " + (w / "spec.jsonl")).code == 0);

  const auto syn = make_synthetic({SyntheticFamily::complete_hierarchy, 10, 2, 3, 4});
  const auto data = evaluate_dataset(*syn.vf, sample_masks(10, 300, 9));
  std::ifstream df(w / "data.jsonl");
  const auto cli_data = io::read_dataset(df);
  REQUIRE(cli_data.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(cli_data[i].mask == data[i].mask);
    CHECK(cli_data[i].value == data[i].value);
  }

  FitConfig cfg;
  cfg.max_depth = 3;
  cfg.num_trees = 40;
  cfg.learning_rate = 0.2;
  std::ostringstream expected;
  io::write_spectrum(expected, extract_model(fit_gbt(data, cfg)));
  CHECK(io::read_file(w / "spec.jsonl") == expected.str());

  std::ostringstream truth;
  io::write_spectrum(truth, syn.truth);
  CHECK(io::read_file(w / "truth.jsonl") == truth.str());
}

TEST_CASE("convert: shapley of a constant is zero") {
  Workdir w;
  io::write_text_file(w / "c.jsonl", "{\"n\":4,\"basis\":\"fourier\"}\n{\"set\":[],\"coef\":2.5}\n");
  const auto r = spex_cli(w, "convert --spectrum " + (w / "c.jsonl") + " --index shapley");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j.at("kind") == "shapley");
  for (const auto& e : j.at("entries")) CHECK(e.at("value").get<double>() == 0.0);
}

TEST_CASE("convert and identify match library results") {
  Workdir w;
  const auto syn = make_synthetic({SyntheticFamily::peak, 12, 3, 3, 2});
  std::ofstream(w / "s.jsonl") << [&] {
    std::ostringstream ss;
    io::write_spectrum(ss, syn.truth);
    return ss.str();
  }();

  auto r = spex_cli(w, "convert --spectrum " + (w / "s.jsonl") + " --index faith_banzhaf --order 2");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out) == io::index_report_to_json(compute_index(syn.truth, IndexKind::faith_banzhaf, 2)));

  r = spex_cli(w, "identify --spectrum " + (w / "s.jsonl") + " --remove 3 --method bnb --direction max");
  REQUIRE(r.code == 0);
  const auto bnb = json::parse(r.out);
  r = spex_cli(w, "identify --spectrum " + (w / "s.jsonl") + " --remove 3 --method brute --direction max");
  REQUIRE(r.code == 0);
  const auto brute = json::parse(r.out);
  CHECK(bnb.at("objective").get<double>() == doctest::Approx(brute.at("objective").get<double>()));
  const auto lib = solve(build_program(syn.truth, 3, Direction::max), SolveMethod::bnb);
  CHECK(bnb.at("mask") == io::mask_to_json(lib.mask));
}

TEST_CASE("run produces a report and a csv table") {
  Workdir w;
  REQUIRE(spex_cli(w, "synth --family complete_hierarchy --n 12 --num-sets 2 --cardinality 3 --out " +
                          (w / "vf.json"))
              .code == 0);
  const auto r = spex_cli(w, "run --vf " + (w / "vf.json") + " --test-masks 100 --k 30 --report " +
                                 (w / "report.json") + " --csv " + (w / "m.csv"));
  REQUIRE(r.code == 0);
  const auto rep = io::read_json_file(w / "report.json");
  CHECK(rep.at("n") == 12);
  CHECK(rep.at("queries").at("test") == 100);
  CHECK(io::read_file(w / "m.csv").rfind("name,value,params\n", 0) == 0);
}

TEST_CASE("exit codes and error lines") {
  Workdir w;
  auto r = spex_cli(w, "sample --count 3");
  CHECK(r.code == 1);
  CHECK(first_json_line(r.err).at("error") == "usage-error");

  r = spex_cli(w, "sparsify --spectrum " + (w / "missing.jsonl") + " --k 3");
  CHECK(r.code == 2);
  CHECK(first_json_line(r.err).contains("message"));

  io::write_text_file(w / "bad.json", R"({"kind":"external","n":3,"cmd":")" + std::string(SPEX_TEST_DATA) +
                                          R"(/bad_reply.sh"})");
  REQUIRE(spex_cli(w, "sample --n 3 --count 2 --out " + (w / "m.jsonl")).code == 0);
  r = spex_cli(w, "eval --vf " + (w / "bad.json") + " --masks " + (w / "m.jsonl"));
  CHECK(r.code == 2);
  CHECK(last_json_line(r.err).at("error") == "provider-error");
}
