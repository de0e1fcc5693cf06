#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dirac_loc/cli.hpp"
#include "dirac_loc/errors.hpp"

using namespace dirac_loc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dirac_loc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run_binary(const std::string& args) {
  const char* bin = std::getenv("DIRACLOC_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd = std::string("\"") + bin + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto kv = parse_config_text("# comment\nn = 2\n  case=5 # trailing\n\nell = 0.1\n");
  REQUIRE(kv.size() == 3);
  CHECK(kv[0] == std::pair<std::string, std::string>{"n", "2"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"case", "5"});
  const auto js = parse_config_text(R"({"n": 1, "case": 2, "L_list": [40, 80], "disorder": {"support": [0, 1], "probs": [0.3, 0.7]}})");
  std::map<std::string, std::string> m(js.begin(), js.end());
  CHECK(m.at("n") == "1");
  CHECK(m.at("L_list") == "40,80");
  const ExperimentConfig c = make_config("green", js);
  CHECK(c.model.N == 1);
  CHECK(c.params.at("L_list") == "40,80");
  CHECK_THROWS_AS(parse_config_text("n = 1\nn = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{\"n\": "), ConfigError);
}

TEST_CASE("config validation") {
  using KV = std::vector<std::pair<std::string, std::string>>;
  const ExperimentConfig ok = make_config("scan", KV{{"n", "1"}, {"case", "2"}, {"grid", "0.5:1.5:3"}, {"seed", "9"}});
  CHECK(ok.seed == 9);
  CHECK(ok.params.at("steps") == "20000");
  CHECK_THROWS_AS(make_config("scan", KV{{"n", "1"}, {"bogus", "1"}}), ConfigError);
  CHECK_THROWS_AS(make_config("scan", KV{{"n", "1"}, {"grid", "1.0,0.5"}}), ConfigError);
  CHECK_THROWS_AS(make_config("scan", KV{{"n", "1"}, {"ell", "-1"}}), ConfigError);
  CHECK_THROWS_AS(make_config("scan", KV{{"n", "0"}}), ConfigError);
  CHECK_THROWS_AS(make_config("nope", KV{}), ConfigError);
  CHECK_THROWS_AS(make_config("lie", KV{{"command", "scan"}}), ConfigError);
  CHECK_THROWS_AS(make_config("wegner", KV{{"beta", "1.5"}}), ConfigError);
  CHECK_THROWS_AS(make_config("lie", KV{{"disorder", "0,1;0.5"}}), ConfigError);
}

TEST_CASE("execute tables") {
  using KV = std::vector<std::pair<std::string, std::string>>;
  const auto ly = execute(make_config("lyapunov", KV{{"n", "2"}, {"case", "2"}, {"steps", "2000"}, {"batches", "10"}}));
  CHECK(ly.table.columns.size() == 1 + 2 * 4);
  CHECK(ly.table.rows.size() == 1);
  const auto lie = execute(make_config("lie", KV{{"n", "2"}, {"case", "5"}}));
  REQUIRE(lie.table.rows.size() == 1);
  const auto& cols = lie.table.columns;
  const auto at = [&](const std::string& name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    REQUIRE(it != cols.end());
    return lie.table.rows[0][static_cast<std::size_t>(it - cols.begin())];
  };
  CHECK(at("dim") == "4");
  CHECK(at("classification") == "OrthoSymplectic");
  const auto sc = execute(make_config("scan", KV{{"n", "1"}, {"case", "2"}, {"grid", "0.8:1.2:3"}, {"steps", "2000"}}));
  REQUIRE(sc.plot.has_value());
  CHECK(*sc.plot == PlotKind::GammaVsE);
  const std::string pd = plot_data(sc.table, PlotKind::GammaVsE);
  CHECK(pd.rfind("#", 0) == 0);
  CHECK(std::count(pd.begin(), pd.end(), '\n') == 4);
  CHECK_THROWS_AS(plot_data(sc.table, PlotKind::Decay), ConfigError);
  Table empty{{"L", "median_log_norm", "q25", "q75", "samples"}, {}, {}};
  const std::string e = plot_data(empty, PlotKind::Decay);
  CHECK(std::count(e.begin(), e.end(), '\n') == 1);
}

TEST_CASE("number formatting and hashing") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(content_hash("") == "cbf29ce484222325");
  CHECK(content_hash("a") != content_hash("b"));
}

TEST_CASE("executable") {
  const fs::path dir = fresh_dir("exe");
  SUBCASE("lie run writes data and manifest and exits 0") {
    write_file(dir / "lie.cfg", "n = 2\ncase = 5\n");
    CHECK(run_binary("lie --config " + (dir / "lie.cfg").string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "lie.csv"));
    CHECK(fs::exists(dir / "lie.manifest"));
    const std::string manifest = slurp(dir / "lie.manifest");
    CHECK(manifest.find(content_hash(slurp(dir / "lie.csv"))) != std::string::npos);
  }
  SUBCASE("config errors exit 2 and write nothing") {
    write_file(dir / "bad.cfg", "n = 1\nell = -0.5\n");
    CHECK(run_binary("lyapunov --config " + (dir / "bad.cfg").string() + " --out " + dir.string()) == 2);
    write_file(dir / "unknown.cfg", "n = 1\ncolour = red\n");
    CHECK(run_binary("lyapunov --config " + (dir / "unknown.cfg").string() + " --out " + dir.string()) == 2);
    CHECK(run_binary("lyapunov --config " + (dir / "missing.cfg").string() + " --out " + dir.string()) == 2);
    CHECK(run_binary("frobnicate") == 2);
    CHECK_FALSE(fs::exists(dir / "lyapunov.csv"));
    CHECK_FALSE(fs::exists(dir / "lyapunov.manifest"));
  }
  SUBCASE("output is byte-identical across worker counts") {
    write_file(dir / "scan.cfg", "n = 1\ncase = 2\ngrid = 0.6:1.4:5\nsteps = 4000\nseed = 11\n");
    const fs::path a = dir / "w1", b = dir / "seedflag";
    fs::create_directories(a);
    fs::create_directories(b);
    CHECK(run_binary("scan --config " + (dir / "scan.cfg").string() + " --out " + a.string()) == 0);
    CHECK(run_binary("scan --config " + (dir / "scan.cfg").string() + " --out " + b.string() +
                     " --seed 11") == 0);
    setenv("DIRACLOC_WORKERS", "4", 1);
    const fs::path c = dir / "w4env";
    fs::create_directories(c);
    CHECK(run_binary("scan --config " + (dir / "scan.cfg").string() + " --out " + c.string()) == 0);
    unsetenv("DIRACLOC_WORKERS");
    CHECK(slurp(a / "scan.csv") == slurp(b / "scan.csv"));
    CHECK(slurp(a / "scan.csv") == slurp(c / "scan.csv"));
    CHECK(slurp(a / "scan.plot.dat") == slurp(c / "scan.plot.dat"));
    CHECK(slurp(c / "scan.manifest").find("workers=4") != std::string::npos);
  }
  fs::remove_all(dir);
}
