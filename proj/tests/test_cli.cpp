#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "kharm/cli/run.hpp"

using namespace kharm;
using namespace kharm::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "kharm_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int parse_error_line(const std::string& text) {
  try {
    auto c = parse_config(text);
    validate(c);
  } catch (const ParseError& e) {
    return e.line;
  }
  return -1;
}

const char* kMinimal = R"(command = tension
[geometry]
kind = euclidean
n = 2
[domain]
N = 256
[map]
shape = circle
radius = 1
)";

}  // namespace

TEST(Config, MinimalTension) {
  auto c = parse_config(kMinimal);
  validate(c);
  EXPECT_EQ(*c.command, Command::Tension);
  EXPECT_EQ(c.domain.N, 256);
  EXPECT_EQ(c.map.shape, "circle");
  EXPECT_EQ(c.curvature(), 0.0);
  EXPECT_EQ(c.line("map.radius"), 9);
  ASSERT_EQ(c.echo.size(), 6u);
  EXPECT_EQ(c.echo[1].first, "geometry.kind");
}

TEST(Config, UnknownKeyNamesLine) {
  std::string text = "command = tension\n[geometry]\n# comment\ncurvture = 1\n";
  try {
    parse_config(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 4);
    std::string msg = e.what();
    EXPECT_NE(msg.find("unknown key"), std::string::npos);
    EXPECT_NE(msg.find("line 4"), std::string::npos);
  }
}

TEST(Config, SyntaxAndTypeErrors) {
  EXPECT_EQ(parse_error_line("k = two\n"), 1);
  EXPECT_EQ(parse_error_line("\n[domain]\nN = 1.5\n"), 3);
  EXPECT_EQ(parse_error_line("[nowhere]\n"), 1);
  EXPECT_EQ(parse_error_line("[map\n"), 1);
  EXPECT_EQ(parse_error_line("command = tension\njust words\n"), 2);
  EXPECT_EQ(parse_error_line("seed = 1\nseed = 2\n"), 2);
  EXPECT_EQ(parse_error_line("command = fly\n"), 1);
  EXPECT_EQ(parse_error_line("precision = half\n"), 1);
}

TEST(Config, ValidationNamesKeyLine) {
  EXPECT_EQ(parse_error_line("command = tension\n[geometry]\nkind = sphere\nK = -1\n"), 4);
  EXPECT_EQ(parse_error_line("command = tension\n[domain]\nN = 4\n"), 3);
  EXPECT_EQ(parse_error_line("command = flow\n\n[flow]\nstep = 0\n"), 4);
  EXPECT_EQ(parse_error_line("command = tension\n[map]\nshape = blob\n"), 3);
  EXPECT_EQ(parse_error_line("command = verify\n[verify]\nsuite = everything\n"), 3);
  EXPECT_EQ(parse_error_line("command = verify\n[verify]\nsuite = jiang\nspaces = sphere, torus\n"), 4);
  // Missing required keys have no line.
  EXPECT_EQ(parse_error_line("command = classify\n[classify]\nk = 2\n"), 0);
  EXPECT_EQ(parse_error_line("command = verify\n"), 0);
}

TEST(Config, SweepBlock) {
  auto c = parse_config(
      "command = sweep\n[map]\nshape = circle\n[sweep]\nparameter = r\nfrom = 0.5\nto = 2.0\nsteps = 16\n");
  validate(c);
  EXPECT_EQ(c.sweep.parameter, "r");
  EXPECT_EQ(c.sweep.steps, 16);
  auto v = kharm::cli::detail::sweep_values(c.sweep);
  ASSERT_EQ(v.size(), 16u);
  EXPECT_EQ(v.front(), 0.5);
  EXPECT_EQ(v.back(), 2.0);
  EXPECT_EQ(v[1], 0.6);
}

TEST(Run, TensionOfCircle) {
  auto c = parse_config(std::string(kMinimal) + "[check]\nmin_tau_sup = 0.99\n");
  validate(c);
  auto b = run(c);
  EXPECT_TRUE(b.passed());
  EXPECT_NEAR(b.report["result"]["tau_sup"].get<double>(), 1.0, 1e-3);
  EXPECT_EQ(b.report["command"], "tension");
  EXPECT_EQ(b.report["config"]["map.shape"], "circle");
}

TEST(Run, ShapeMustMatchGeometry) {
  auto c = parse_config("command = tension\n[geometry]\nkind = sphere\n[map]\nshape = circle\n");
  validate(c);
  EXPECT_THROW(run(c), ParseError);
}

TEST(Run, ClassifyK3N3) {
  auto c = parse_config("command = classify\n[classify]\nk = 3\nn = 3\n");
  validate(c);
  auto b = run(c);
  EXPECT_TRUE(b.passed());
  EXPECT_EQ(b.report["result"]["verdict"], "StraightLine");
  bool found = false;
  for (const auto& [suffix, content] : b.files)
    if (suffix == "certificate.txt") {
      found = true;
      EXPECT_EQ(std::count(content.begin(), content.end(), '\n'), 4);
      EXPECT_EQ(content.substr(0, 2), "5 ");
    }
  EXPECT_TRUE(found);
}

TEST(Run, HyperbolicFlowEnergyMonotone) {
  auto c = parse_config(R"(command = flow
k = 3
seed = 4
[geometry]
kind = hyperbolic
[domain]
N = 32
[map]
shape = perturbed_geodesic
[flow]
step = 1e-2
growth = 1.1
max_iters = 200
stop_tol = 1e-3
)");
  validate(c);
  auto b = run(c);
  ASSERT_TRUE(b.run.error.empty()) << b.run.error;
  EXPECT_TRUE(b.passed());
  std::string csv;
  for (const auto& [suffix, content] : b.files)
    if (suffix == "energy.csv") csv = content;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,energy");
  double prev = 1e300;
  int rows = 0;
  while (std::getline(in, line)) {
    double e = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(e, prev * (1 + 1e-12));
    prev = e;
    ++rows;
  }
  EXPECT_EQ(rows, 201);
}

TEST(Run, StalledFlowIsACheckFailure) {
  // A huge fixed step on a stiff E_6 flow cannot decrease within 30 halvings.
  auto c = parse_config(R"(command = flow
k = 6
[geometry]
kind = euclidean
[domain]
N = 256
[map]
shape = circle
[flow]
step = 1e12
max_iters = 5
)");
  validate(c);
  auto b = run(c);
  EXPECT_FALSE(b.passed());
  EXPECT_NE(b.run.error.find("did not decrease"), std::string::npos);
  EXPECT_EQ(b.report["passed"], false);
}

TEST(Run, SweepIsOrderedAndDeterministic) {
  auto c = parse_config(
      "command = sweep\nk = 2\n[map]\nshape = circle\n[sweep]\nparameter = r\nfrom = 0.5\nto = 2.0\nsteps = 16\nthreads = 4\n");
  validate(c);
  auto a = run(c);
  c.sweep.threads = 1;
  auto b = run(c);
  ASSERT_EQ(a.files.size(), b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) EXPECT_EQ(a.files[i], b.files[i]);
  const auto& entries = a.report["result"]["entries"];
  ASSERT_EQ(entries.size(), 16u);
  // Fixed domain per radius: |tau_2| = r^-3 for the circle.
  for (const auto& e : entries) {
    double r = e["parameter"].get<double>();
    EXPECT_NEAR(e["metrics"]["tau_k_sup"].get<double>() * r * r * r, 1.0, 1e-3);
  }
}

TEST(Emit, AtomicFilesUnderPrefix) {
  auto dir = scratch("emit");
  auto c = parse_config(kMinimal);
  validate(c);
  auto b = run(c);
  emit(b, dir / "sub" / "circle");
  EXPECT_TRUE(fs::exists(dir / "sub" / "circle.report.json"));
  EXPECT_TRUE(fs::exists(dir / "sub" / "circle.field.csv"));
  for (const auto& e : fs::directory_iterator(dir / "sub"))
    EXPECT_NE(e.path().extension(), ".tmp");
  auto j = json::parse(slurp(dir / "sub" / "circle.report.json"));
  EXPECT_EQ(j["tool"], "kharm");
}

TEST(Emit, ReportsAreByteIdentical) {
  auto dir = scratch("determinism");
  auto c = parse_config(R"(command = verify
seed = 3
[domain]
N = 64
[verify]
suite = jiang
maps = 12
)");
  validate(c);
  emit(run(c), dir / "a");
  emit(run(c), dir / "b");
  for (const char* s : {".report.json", ".checks.csv", ".jiang.csv"})
    EXPECT_EQ(slurp(dir / (std::string("a") + s)), slurp(dir / (std::string("b") + s))) << s;
}

#ifdef KHARM_TOOL
namespace {

int tool(const std::string& args) {
  std::string cmd = std::string(KHARM_TOOL) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Tool, ExitCodes) {
  auto dir = scratch("tool");
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  auto ok = write("ok.conf", kMinimal);
  auto typo = write("typo.conf", "command = tension\n[geometry]\ncurvture = 1\n");
  auto fails = write("fails.conf", std::string(kMinimal) + "[check]\nmax_sup = 0.5\n");
  const std::string out = " --out " + (dir / "o").string();
  EXPECT_EQ(tool("tension --config " + ok + out), 0);
  EXPECT_EQ(tool("tension --config " + typo + out), 2);
  EXPECT_EQ(tool("tension --config " + fails + out), 1);
  EXPECT_EQ(tool("energy --config " + ok + out), 2);  // config is for tension
  EXPECT_EQ(tool("tension"), 2);
  EXPECT_EQ(tool("explode --config " + ok), 2);
  EXPECT_EQ(tool("tension --config " + (dir / "missing.conf").string()), 2);
  EXPECT_EQ(tool("tension --config " + ok + " --seed x"), 2);
}
#endif
