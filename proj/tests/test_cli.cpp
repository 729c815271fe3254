#include "doctest.h"

#include "support/dataset_files.hpp"
#include "support/temp_dir.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using t2gnn::testing::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli(const TempDir& dir, const std::string& args) {
  const auto out = dir.path() / "stdout.txt", err = dir.path() / "stderr.txt";
  const std::string cmd = std::string("'") + T2GNN_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("cli: usage errors exit 2, help exits 0") {
  TempDir dir;
  CHECK(cli(dir, "").code == 2);
  CHECK(cli(dir, "frobnicate").code == 2);
  CHECK(cli(dir, "run").code == 2);
  CHECK(cli(dir, "--help").code == 0);
  CHECK(cli(dir, "run --help").code == 0);
  Outcome v = cli(dir, "--version");
  CHECK(v.code == 0);
  CHECK_FALSE(v.out.empty());
}

TEST_CASE("cli: config errors exit 2 naming the field") {
  TempDir dir;
  const auto config = t2gnn::testing::write_toy_experiment(dir.path()).string();
  Outcome missing = cli(dir, "run -c '" + (dir.path() / "nope.json").string() + "'");
  CHECK(missing.code == 2);
  Outcome lambda = cli(dir, "run -q -c '" + config + "' --set distill.lambda=1.5");
  CHECK(lambda.code == 2);
  CHECK(lambda.err.find("distill.lambda") != std::string::npos);
  Outcome path = cli(dir, "run -q -c '" + config + "' --set dataset.paths.edges=/missing.txt");
  CHECK(path.code == 2);
  CHECK(path.err.find("dataset.paths.edges") != std::string::npos);
  CHECK(cli(dir, "run -q -c '" + config + "' --set novalue").code == 2);
  CHECK(cli(dir, "sweep -q -c '" + config + "'").code == 2);
  CHECK(cli(dir, "report '" + (dir.path() / "empty").string() + "'").code != 0);
}

TEST_CASE("cli: runtime failures exit 1") {
  TempDir dir;
  const auto config = t2gnn::testing::write_toy_experiment(dir.path()).string();
  std::ofstream(dir.path() / "data" / "toy" / "features.csv") << "1,0\nx,1\n";
  Outcome r = cli(dir, "run -q -c '" + config + "'");
  CHECK(r.code == 1);
  CHECK(r.err.find("features.csv") != std::string::npos);
}

TEST_CASE("cli: run twice gives byte-identical result.json; flags override the config") {
  TempDir dir;
  const auto config = t2gnn::testing::write_toy_experiment(dir.path()).string();
  const auto a = dir.path() / "a", b = dir.path() / "b";
  Outcome first = cli(dir, "run -c '" + config + "' --out '" + a.string() + "'");
  REQUIRE(first.code == 0);
  CHECK(first.out.find("test accuracy") != std::string::npos);
  CHECK_FALSE(first.err.empty());
  REQUIRE(cli(dir, "run -q -c '" + config + "' -o '" + b.string() + "' --jobs 2").code == 0);
  CHECK(slurp(a / "result.json") == slurp(b / "result.json"));

  REQUIRE(cli(dir, "run -q -c '" + config + "' -o '" + b.string() + "' --set distill.lambda=0.9").code == 0);
  CHECK(slurp(b / "result.json").find("\"lambda\": 0.9") != std::string::npos);

  Outcome rep = cli(dir, "report '" + a.string() + "'");
  REQUIRE(rep.code == 0);
  CHECK(rep.out.find("toy") != std::string::npos);
  CHECK(std::filesystem::exists(a / "report.csv"));
}

TEST_CASE("cli: sweep, ablate, mask, ppr") {
  TempDir dir;
  const auto config = t2gnn::testing::write_toy_experiment(dir.path(), 45).string();
  const auto out = dir.path() / "sweep";
  Outcome s = cli(dir, "sweep -q -c '" + config + "' -o '" + out.string() + "' --set 'sweep.lambda=[0.2,0.8]'");
  REQUIRE(s.code == 0);
  CHECK(std::filesystem::exists(out / "lambda0.2" / "result.json"));
  CHECK(std::filesystem::exists(out / "lambda0.8" / "result.json"));
  CHECK(std::filesystem::exists(out / "sweep_summary.json"));

  const auto abl = dir.path() / "ablate";
  REQUIRE(cli(dir, "ablate -q -c '" + config + "' -o '" + abl.string() + "'").code == 0);
  for (const char* v : {"full", "no_teacher_str", "no_teacher_fea", "no_distill_log", "no_distill_mid"})
    CHECK(std::filesystem::exists(abl / v / "result.json"));
  CHECK_FALSE(std::filesystem::exists(abl / "online"));

  const auto art = dir.path() / "art";
  Outcome m = cli(dir, "mask -q -c '" + config + "' -o '" + art.string() + "'");
  REQUIRE(m.code == 0);
  CHECK(m.out.find("masked_graph.json") != std::string::npos);
  Outcome p = cli(dir, "ppr -q -c '" + config + "' -o '" + art.string() + "' --set ppr.top_k=3");
  REQUIRE(p.code == 0);
  CHECK(std::filesystem::file_size(art / "enhanced_adjacency.txt") > 0);
}
