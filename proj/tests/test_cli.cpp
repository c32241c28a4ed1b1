#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& work() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / "ltree_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    std::ofstream(p / "yule.toml") << "kappa = 0.7\nalpha = 1.0\nbeta = 0.0\n";
    std::ofstream(p / "quad.toml") << "alpha = -1.0\nbeta = 1.0\n";
    std::ofstream(p / "sub.toml") << "alpha = 1.0\nbeta = 1.0\n";
    std::ofstream(p / "small.toml") << "n_trees = 50\n";
    std::ofstream(p / "bad.toml") << "n_trees = 5\n";
    return p;
  }();
  return d;
}

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const fs::path log = work() / "stdout.txt";
  const std::string cmd = "cd " + work().string() + " && " + env + " " + LTREE_CLI_PATH + " " + args + " > " +
                          log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, ss.str()};
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string s;
  std::getline(in, s);
  return s;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("bogus").code == 2);
  CHECK(run("simulate yule --r 1").code == 2);
  CHECK(run("simulate yule --psi missing.toml --r 1").code == 2);
  CHECK(run("simulate tree --psi yule.toml --r 1").code == 2);
  CHECK(run("simulate nu-r --psi sub.toml --r 1 --out o_sub").code == 2);
}

TEST_CASE("list-experiments") {
  const Run r = run("list-experiments");
  CHECK(r.code == 0);
  CHECK(r.out ==
        "yule-geometric\ngrafting-equivalence\nspine-spacings\nskeleton-roundtrip\nlamperti-cb\nray-knight\n"
        "twotype-rates\ntwotype-generator\ncross-construction\ndiscrete-generations\npruning-compatibility\n");
  const Run v = run("list-experiments --verbose");
  CHECK(v.out.find("skeleton-roundtrip\t") != std::string::npos);
}

TEST_CASE("simulate yule") {
  CHECK(run("simulate yule --psi yule.toml --r 1 --samples 10 --seed 3 --out o_yule").code == 0);
  for (int i = 0; i < 10; ++i) CHECK(fs::exists(work() / "o_yule" / ("yule_" + std::to_string(i) + ".csv")));
  CHECK(first_line(work() / "o_yule" / "yule_functionals.csv") ==
        "sample,lifetime,tips,max_value,jumps,terminal,lines");
  CHECK(run("simulate yule --psi yule.toml --r 1 --samples 10 --seed 3 --out o_yule2").code == 0);
  std::ifstream a(work() / "o_yule" / "yule_functionals.csv"), b(work() / "o_yule2" / "yule_functionals.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("simulate branching processes") {
  CHECK(run("simulate cb --psi quad.toml --x0 1 --t 0.5 --samples 20 --out o_cb").code == 0);
  CHECK(first_line(work() / "o_cb" / "cb_terminal.csv") == "sample,t,n,z,integral,terminal");
  CHECK(run("simulate twotype --psi quad.toml --x0 1 --n0 1 --t 0.5 --samples 5 --paths --out o_tt").code == 0);
  CHECK(fs::exists(work() / "o_tt" / "twotype_terminal.csv"));
}

TEST_CASE("default output directory") {
  CHECK(run("simulate cb --psi quad.toml --samples 3", "LTREE_OUT=o_env").code == 0);
  CHECK(fs::exists(work() / "o_env" / "cb_terminal.csv"));
}

TEST_CASE("verify") {
  const Run r = run("verify discrete-generations --config small.toml --out o_ver");
  CHECK(r.out.find("discrete-generations: ") == 0);
  CHECK((r.code == 0) == (r.out.find(": PASS") != std::string::npos));
  const auto j = nlohmann::json::parse(std::ifstream(work() / "o_ver" / "discrete-generations.json"));
  CHECK(j["name"] == "discrete-generations");
  CHECK(j["seed"] == 110);
  CHECK(run("verify nope").code == 2);
  CHECK(run("verify yule-geometric --config bad.toml").code == 2);
}

TEST_CASE("export") {
  CHECK(run("export tree --psi quad.toml --r 1 --seed 5 --out o_exp").code == 0);
  CHECK(fs::exists(work() / "o_exp" / "upsilon_contour.csv"));
  CHECK(fs::exists(work() / "o_exp" / "tree.json"));
  CHECK(run("export genealogy --psi quad.toml --x 1 --out o_gen").code == 0);
  CHECK(fs::exists(work() / "o_gen" / "genealogy.json"));
}
