#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(MATCHPORT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(MATCHPORT_DATA_DIR) + "/" + name; }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("matchport_cli_" + name)).string();
}

nlohmann::json parse(const std::string& s) { return nlohmann::json::parse(s); }

}  // namespace

TEST_CASE("line solve of the interleaved market reports the four pieces") {
  auto r = run("solve --method line --rational " + data("interleaved.mm"));
  REQUIRE(r.code == 0);
  auto j = parse(r.out);
  CHECK(j["ok"] == true);
  const auto& pieces = j["matching"]["pieces"];
  REQUIRE(pieces.size() == 4);
  const char* expect[4][4] = {{"-2", "-10/7", "-1", "1"},
                              {"-10/7", "-1", "-1", "-2"},
                              {"0", "2/7", "-2", "0"},
                              {"2/7", "1", "-2", "3"}};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(pieces[i]["lo"] == expect[i][0]);
    CHECK(pieces[i]["hi"] == expect[i][1]);
    CHECK(pieces[i]["slope"] == expect[i][2]);
    CHECK(pieces[i]["intercept"] == expect[i][3]);
  }
}

TEST_CASE("every fixture solves with its default method") {
  for (const auto& e : std::filesystem::directory_iterator(MATCHPORT_DATA_DIR)) {
    if (e.path().extension() != ".mm") continue;
    std::string name = e.path().filename().string();
    if (name.find("preferences") != std::string::npos || name.find("cycle") != std::string::npos) continue;
    INFO(name);
    auto r = run("solve " + e.path().string());
    CHECK(r.code == 0);
    CHECK(parse(r.out)["kind"] == "solve_report");
  }
}

TEST_CASE("sweep prints one row per alpha with the bound column") {
  auto r = run("sweep --alphas -10,-5,0,5,10 " + data("diagonal.mm"));
  REQUIRE(r.code == 0);
  auto rows = parse(r.out)["rows"];
  REQUIRE(rows.size() == 5);
  CHECK(rows[0]["alpha"] == -10.0);
  CHECK(rows[0]["theoretical_eps"].get<double>() == doctest::Approx(std::log(10.0) / 10.0));
  CHECK(rows[2]["theoretical_eps"].is_null());
  CHECK(rows[4]["theoretical_eps"].get<double>() == doctest::Approx(std::log(2.0) / 10.0));
  auto t = run("sweep --alphas -10,-5,0,5,10 --format table " + data("diagonal.mm"));
  CHECK(t.code == 0);
  CHECK(std::count(t.out.begin(), t.out.end(), '\n') >= 6);
}

TEST_CASE("potential command") {
  auto cyc = run("potential " + data("planted_cycle.mm"));
  CHECK(cyc.code == 3);
  auto j = parse(cyc.out);
  CHECK(j["kind"] == "improvement_cycle");
  CHECK(j["couples"].size() == 4);

  auto ok = run("potential " + data("aligned_preferences.mm"));
  REQUIRE(ok.code == 0);
  auto u = parse(ok.out)["u"];
  CHECK(u[0][0] == "7/8");
  CHECK(u[1][1] == "7/16");
}

TEST_CASE("exit codes") {
  auto bad = temp_path("bad.mm");
  std::ofstream(bad) << "{\n  nope\n";
  CHECK(run("solve " + bad).code == 2);
  CHECK(run("solve " + data("missing.mm")).code == 2);
  CHECK(run("solve --method nonsense " + data("diagonal.mm")).code == 2);
  CHECK(run("solve --method kmarginal " + data("diagonal.mm")).code == 2);

  // A 1e-6 utility gap asks stable_limit for alpha far beyond the exponent guard.
  auto tiny = temp_path("tiny_gap.mm");
  std::ofstream(tiny) << R"({"schema": "matchport/1", "kind": "discrete",
  "utility": {"family": "table", "values": [[1, 0.999999], [0, 1]]},
  "x": {"masses": [1, 1]}, "y": {"masses": [1, 1]}})";
  CHECK(run("solve --stable-limit " + tiny).code == 4);

  // The assortative matching crosses, so the nocrossing audit fails.
  CHECK(run("solve --method assortative --audit nocrossing " + data("uniform_halves.mm")).code == 3);
  std::filesystem::remove(bad);
  std::filesystem::remove(tiny);
}

TEST_CASE("outputs are byte-identical across runs") {
  auto svg1 = temp_path("a.svg"), svg2 = temp_path("b.svg");
  auto a = run("solve --method line --svg " + svg1 + " " + data("uniform_halves.mm"));
  auto b = run("solve --method line --svg " + svg2 + " " + data("uniform_halves.mm"));
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  std::ifstream f1(svg1), f2(svg2);
  std::string s1((std::istreambuf_iterator<char>(f1)), {}), s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK_FALSE(s1.empty());
  CHECK(s1 == s2);
  std::filesystem::remove(svg1);
  std::filesystem::remove(svg2);
}
