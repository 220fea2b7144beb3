#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sl2lab/json_io.hpp"

using namespace sl2lab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(SL2LAB_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string scenario(const std::string& name) { return std::string(SL2LAB_SCENARIOS) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("sl2lab_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(JsonIo, RejectsUnknownScenarioField) {
  json j = {{"schema", "sl2lab.scenario/1"}, {"operation", "bands"}, {"bogus", 1}};
  try {
    io::parse_scenario(j);
    FAIL();
  } catch (const Failure& f) {
    EXPECT_EQ(f.kind(), FailureKind::schema);
  }
}

TEST(JsonIo, RejectsWrongSchemaAndOperation) {
  EXPECT_THROW(io::parse_scenario({{"schema", "sl2lab.scenario/2"}, {"operation", "bands"}}), Failure);
  EXPECT_THROW(io::parse_scenario({{"schema", "sl2lab.scenario/1"}, {"operation", "nope"}}), Failure);
}

TEST(JsonIo, ScenarioHashIgnoresOutAndThreads) {
  auto a = io::parse_scenario({{"schema", "sl2lab.scenario/1"}, {"operation", "bands"}});
  auto b = a;
  b.out = "/tmp/x";
  b.threads = 8;
  EXPECT_EQ(io::scenario_hash(a), io::scenario_hash(b));
  b.seed = 2;
  EXPECT_NE(io::scenario_hash(a), io::scenario_hash(b));
}

TEST(JsonIo, ParsesBasesPotentialsAndComplexNumbers) {
  EXPECT_TRUE(io::parse_base({{"family", "rotation"}, {"alpha", "golden"}}).is_rotation());
  EXPECT_TRUE(io::parse_base({{"family", "bernoulli"}, {"probabilities", {0.5, 0.5}}}).is_shift());
  EXPECT_THROW(io::parse_base({{"family", "rotation"}, {"alpha", 0.3}, {"extra", 1}}), Failure);
  EXPECT_EQ(io::parse_complex(json::array({1.0, -2.0}), "z"), cplx(1.0, -2.0));
  EXPECT_EQ(io::parse_complex(json(3.0), "z"), cplx(3.0, 0.0));
  const auto b = io::parse_base({{"family", "periodic"}, {"orbits", {{{"period", 1}}}}});
  const auto p = io::parse_potential({{"kind", "constant"}, {"value", {0.0, 1.0}}}, b);
  EXPECT_EQ(p(b, BasePoint{OrbitPoint{}}), cplx(0.0, 1.0));
  EXPECT_THROW(io::parse_potential({{"kind", "table"}, {"values", {1.0}}, {"junk", 0}}, b), Failure);
}

TEST(Cli, ScenarioFieldsHaveFlags) {
  const auto help = cli("lyapunov --help").out;
  for (const auto& f : io::scenario_fields()) {
    if (f == "schema" || f == "operation") continue;
    EXPECT_NE(help.find("--" + f), std::string::npos) << f;
  }
}

TEST(Cli, BandsFreeOperatorCsvAndSvg) {
  const auto dir = scratch("bands");
  const auto r = cli("bands --scenario " + scenario("bands_zero.json") + " --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["schema"], "sl2lab.results/1");
  EXPECT_EQ(j["operation"], "bands");
  const auto csv = slurp(dir / "bands.csv");
  EXPECT_EQ(csv.rfind("# sl2lab.bands/1", 0), 0u);
  EXPECT_NE(csv.find("-2,2,4"), std::string::npos);
  EXPECT_NE(slurp(dir / "bands.svg").find("data-schema=\"sl2lab.plot/1\""), std::string::npos);
  const auto rec = json::parse(slurp(dir / "record.json"));
  EXPECT_EQ(rec["schema"], "sl2lab.record/1");
  EXPECT_EQ(rec["scenario_hash"], j["scenario_hash"]);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("bands --scenario /nonexistent.json").code, 2);
  EXPECT_EQ(cli("bands --potential '{\"kind\":\"table\",\"values\":[0],\"x\":1}'").code, 2);
  EXPECT_EQ(cli("bands --potential '{\"kind\":\"table\",\"values\":[0]}' --params '{\"nope\":1}'").code, 2);
  EXPECT_EQ(cli("bands --scenario " + scenario("lyapunov_diag.json")).code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("search --scenario " + scenario("search_schrodinger.json") + " --params '{\"kind\":\"schrodinger\",\"budget\":0}'").code, 4);
  EXPECT_EQ(cli("certify --base '{\"family\":\"periodic\",\"orbits\":[{\"period\":1}]}' "
                "--cocycle '{\"kind\":\"schrodinger\",\"potential\":{\"kind\":\"constant\",\"value\":0},\"energy\":0}' "
                "--params '{\"cone\":\"upper\",\"n_max\":4}'").code,
            3);
}

TEST(Cli, LyapunovDiagonal) {
  const auto r = cli("lyapunov --scenario " + scenario("lyapunov_diag.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["payload"]["estimate"]["value"].get<double>(), std::log(2.0), 1e-12);
}

TEST(Cli, ByteIdenticalAcrossRunsAndThreads) {
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  const std::string s = scenario("lyapunov_curve.json");
  const auto a = cli("lyapunov --scenario " + s + " --threads 1 --out " + d1.string());
  const auto b = cli("lyapunov --scenario " + s + " --threads 4 --out " + d2.string());
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(d1 / "results.json"), slurp(d2 / "results.json"));
  EXPECT_EQ(slurp(d1 / "lyapunov.csv"), slurp(d2 / "lyapunov.csv"));
}

TEST(Cli, PhiBoundaryRecord) {
  const auto r = cli("phi --scenario " + scenario("phi_boundary.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto p = json::parse(r.out)["payload"];
  EXPECT_TRUE(p.contains("phi"));
  EXPECT_TRUE(p.contains("phi_boundary"));
}

TEST(Cli, ReproduceDetectsMutatedWeight) {
  const auto good = cli("reproduce --params '{\"criteria\":[1,2]}'");
  EXPECT_EQ(good.code, 0) << good.out;
  EXPECT_NE(good.out.find("[PASS]  1"), std::string::npos);
  const auto bad = cli("reproduce --params '{\"criteria\":[1],\"mutate_weight\":true}'");
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.out.find("[FAIL]  1"), std::string::npos);
}
