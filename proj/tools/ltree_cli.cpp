// ltree: simulate splitting trees and branching processes, run the named
// verification experiments and export tree structures.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltree/branching_proc.hpp"
#include "ltree/errors.hpp"
#include "ltree/genealogy.hpp"
#include "ltree/levy_model.hpp"
#include "ltree/path_engine.hpp"
#include "ltree/splitting_sim.hpp"
#include "ltree/tree_core.hpp"
#include "ltree/verify_harness.hpp"

namespace fs = std::filesystem;
using namespace ltree;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

std::string default_out() {
  if (const char* env = std::getenv("LTREE_OUT"); env && *env) return env;
  return "out";
}

bool is_usage_error(const Error& e) {
  static const std::vector<std::string> kinds = {"InvalidExponent", "ConfigError",          "OutOfDomain",
                                                 "UnknownExperiment", "SubcriticalInput",   "NonGrey",
                                                 "GridExceedsTruncation", "EpsilonBelowResolution"};
  for (const auto& k : kinds)
    if (e.kind() == k) return true;
  return false;
}

void write_text(const fs::path& p, const std::string& s) { write_file_atomic(p.string(), s); }

std::string path_csv(const CadlagPath& f) {
  std::ostringstream os;
  f.write_csv(os);
  return os.str();
}

struct SimulateArgs {
  std::string kind;
  std::string psi_file;
  double r = 1.0;
  double x = 1.0;
  double x0 = 1.0;
  long n0 = 1;
  double t = 1.0;
  double A = 2.0;
  double h = 1e-3;
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  std::string out;
  unsigned jobs = 0;
  bool paths = false;
};

int run_simulate(const SimulateArgs& a) {
  const LaplaceExponent psi = load_exponent(a.psi_file);
  const fs::path out(a.out);
  fs::create_directories(out);
  const auto rng_for = [&](std::size_t i) { return Rng(a.seed, i); };
  const bool is_tree = a.kind == "yule" || a.kind == "nu-r" || a.kind == "sin" || a.kind == "upsilon-tree" ||
                       a.kind == "eta-x";
  if (is_tree) {
    TreeOptions opt;
    opt.sim.h = a.h;
    std::vector<CadlagPath> contours(a.samples);
    std::vector<long> lines(a.samples, -1);
    parallel_for(a.samples, a.jobs, [&](std::size_t i) {
      Rng rng = rng_for(i);
      if (a.kind == "yule") {
        contours[i] = simulate_yule_contour(psi.b(), a.r, rng);
        return;
      }
      const SplittingModel model(psi, opt);
      if (a.kind == "nu-r") {
        contours[i] = model.nu_r(a.r, rng);
      } else if (a.kind == "sin") {
        contours[i] = model.sin_tree(a.r, rng);
      } else if (a.kind == "upsilon-tree") {
        UpsilonTree u = model.upsilon_tree(a.r, rng);
        lines[i] = static_cast<long>(u.lines.size());
        contours[i] = std::move(u.contour);
      } else {
        EtaForest f = model.eta_x(a.x, a.A, rng);
        long k = 0;
        for (const auto& p : f.prolific) k += static_cast<long>(p.size());
        lines[i] = k;
        contours[i] = std::move(f.contour);
      }
    });
    std::ostringstream fun;
    fun.precision(17);
    fun << "sample,lifetime,tips,max_value,jumps,terminal,lines\n";
    for (std::size_t i = 0; i < a.samples; ++i) {
      const CadlagPath& f = contours[i];
      std::size_t jumps = 0;
      for (const auto& k : f.knots) jumps += k.value != k.left;
      fun << i << ',' << f.lifetime() << ',' << f.tips.size() << ',' << (f.empty() ? 0.0 : f.max_value()) << ','
          << jumps << ',' << to_string(f.terminal) << ',' << lines[i] << '\n';
      write_text(out / (a.kind + "_" + std::to_string(i) + ".csv"), path_csv(f));
    }
    write_text(out / (a.kind + "_functionals.csv"), fun.str());
    std::cout << "simulate " << a.kind << ": " << a.samples << " contours written to " << out.string() << "\n";
    return kOk;
  }
  CbOptions opt;
  opt.h = a.h;
  opt.record = a.paths;
  std::vector<BranchingPath> runs(a.samples);
  const LaplaceExponent sharp = a.kind == "cbi" ? psi.sharp() : psi;
  const Immigration im = a.kind == "cbi" ? Immigration::of(psi) : Immigration::none();
  parallel_for(a.samples, a.jobs, [&](std::size_t i) {
    Rng rng = rng_for(i);
    if (a.kind == "cb")
      runs[i] = simulate_cb(psi, a.x0, a.t, opt, rng);
    else if (a.kind == "cbi")
      runs[i] = simulate_cbi(sharp, im, a.x0, a.t, opt, rng);
    else
      runs[i] = simulate_twotype(psi, {a.n0, a.x0}, a.t, opt, rng);
  });
  std::ostringstream term;
  term.precision(17);
  term << "sample,t,n,z,integral,terminal\n";
  for (std::size_t i = 0; i < a.samples; ++i) {
    const BranchingPath& p = runs[i];
    term << i << ',' << p.times.back() << ',' << p.n.back() << ',' << p.z.back() << ',' << p.theta.back() << ','
         << to_string(p.terminal) << '\n';
    if (a.paths) {
      std::ostringstream os;
      p.write_csv(os);
      write_text(out / (a.kind + "_" + std::to_string(i) + ".csv"), os.str());
    }
  }
  write_text(out / (a.kind + "_terminal.csv"), term.str());
  std::cout << "simulate " << a.kind << ": " << a.samples << " terminal states written to " << out.string() << "\n";
  return kOk;
}

struct ExportArgs {
  std::string what;
  std::string psi_file;
  double r = 1.0;
  double x = 1.0;
  double A = 2.0;
  double bin = 0.05;
  double h = 1e-3;
  std::uint64_t seed = 0;
  std::string out;
};

int run_export(const ExportArgs& a) {
  const LaplaceExponent psi = load_exponent(a.psi_file);
  const fs::path out(a.out);
  fs::create_directories(out);
  Rng rng(a.seed, 0);
  TreeOptions opt;
  opt.sim.h = a.h;
  if (a.what == "tree" || a.what == "skeleton") {
    const SplittingModel model(psi, opt);
    const UpsilonTree u = model.upsilon_tree(a.r, rng);
    write_text(out / "upsilon_contour.csv", path_csv(u.contour));
    if (a.what == "tree")
      write_text(out / "tree.json", u.lines.to_json().dump(2) + "\n");
    else
      write_text(out / "skeleton.json", skeleton_from_contour(u.contour).to_json().dump(2) + "\n");
  } else if (a.what == "genealogy") {
    const GenealogySampler sampler(psi);
    write_text(out / "genealogy.json", sampler.sample(a.A, rng).to_json().dump(2) + "\n");
  } else {
    const SplittingModel model(psi, opt);
    const EtaForest f = model.eta_x(a.x, a.A, rng);
    const CadlagPath H = continuous_height(f.contour, psi.beta());
    std::vector<const ChronologicalTree*> lines;
    for (const auto& t : f.prolific) lines.push_back(&t);
    std::vector<double> levels;
    for (double lv = 0.0; lv + a.bin <= a.A + 1e-12; lv += a.bin) levels.push_back(lv);
    std::ostringstream os;
    level_profile(H, lines, levels, a.bin, a.A).write_csv(os);
    write_text(out / "profile.csv", os.str());
    write_text(out / "eta_contour.csv", path_csv(f.contour));
  }
  std::cout << "export " << a.what << ": written to " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Splitting trees, Levy trees and their branching processes"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  SimulateArgs sa;
  sa.out = default_out();
  auto* sim = app.add_subcommand("simulate", "Sample contours or branching paths");
  sim->add_option("kind", sa.kind, "What to sample")
      ->required()
      ->check(CLI::IsMember({"yule", "nu-r", "sin", "upsilon-tree", "eta-x", "cb", "cbi", "twotype"}));
  sim->add_option("--psi", sa.psi_file, "Exponent file (TOML, or JSON by extension)")->required()->check(CLI::ExistingFile);
  sim->add_option("--r", sa.r, "Truncation level")->check(CLI::PositiveNumber);
  sim->add_option("--x", sa.x, "Starting mass of eta_x")->check(CLI::PositiveNumber);
  sim->add_option("--A", sa.A, "Genealogical truncation of eta_x")->check(CLI::PositiveNumber);
  sim->add_option("--x0", sa.x0, "Initial mass (cb, cbi, twotype)")->check(CLI::NonNegativeNumber);
  sim->add_option("--n0", sa.n0, "Initial prolific count (twotype)")->check(CLI::NonNegativeNumber);
  sim->add_option("--t", sa.t, "Time horizon")->check(CLI::NonNegativeNumber);
  sim->add_option("--h", sa.h, "Mesh")->check(CLI::PositiveNumber);
  sim->add_option("--samples", sa.samples, "Number of samples")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sa.seed, "Master seed");
  sim->add_option("--out", sa.out, "Output directory");
  sim->add_option("--jobs", sa.jobs, "Worker threads (0: all cores)");
  sim->add_flag("--paths", sa.paths, "Also write full branching paths");

  std::string exp_name, config_file;
  std::uint64_t vseed = 0;
  std::string vout = default_out();
  unsigned vjobs = 0;
  auto* ver = app.add_subcommand("verify", "Run a named experiment; exit 0 iff it passes");
  ver->add_option("name", exp_name, "Experiment name")->required();
  ver->add_option("--config", config_file, "Overrides (TOML, or JSON by extension)")->check(CLI::ExistingFile);
  auto* seed_opt = ver->add_option("--seed", vseed, "Seed (default: the experiment's own)");
  ver->add_option("--out", vout, "Report directory");
  ver->add_option("--jobs", vjobs, "Worker threads (0: all cores)");

  ExportArgs ea;
  ea.out = default_out();
  auto* exp = app.add_subcommand("export", "Write a sampled tree structure as JSON or CSV");
  exp->add_option("what", ea.what, "tree, skeleton, genealogy or profile")
      ->required()
      ->check(CLI::IsMember({"tree", "skeleton", "genealogy", "profile"}));
  exp->add_option("--psi", ea.psi_file, "Exponent file")->required()->check(CLI::ExistingFile);
  exp->add_option("--r", ea.r, "Truncation level")->check(CLI::PositiveNumber);
  exp->add_option("--x", ea.x, "Starting mass of eta_x")->check(CLI::PositiveNumber);
  exp->add_option("--A", ea.A, "Genealogical truncation")->check(CLI::PositiveNumber);
  exp->add_option("--bin", ea.bin, "Level bin width")->check(CLI::PositiveNumber);
  exp->add_option("--h", ea.h, "Mesh")->check(CLI::PositiveNumber);
  exp->add_option("--seed", ea.seed, "Seed");
  exp->add_option("--out", ea.out, "Output directory");

  bool verbose = false;
  auto* list = app.add_subcommand("list-experiments", "Print the registered experiments");
  list->add_flag("--verbose", verbose, "Add a one-line description");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return run_simulate(sa);
    if (*exp) return run_export(ea);
    if (*list) {
      for (const auto& n : experiment_names()) {
        std::cout << n;
        if (verbose) std::cout << '\t' << experiment_summary(n);
        std::cout << '\n';
      }
      return kOk;
    }
    RunOptions ro;
    ro.has_seed = seed_opt->count() > 0;
    ro.seed = vseed;
    ro.out_dir = vout;
    ro.jobs = vjobs;
    const nlohmann::json overrides = config_file.empty() ? nlohmann::json() : load_config_file(config_file);
    const TestReport r = run_experiment(exp_name, overrides, ro);
    std::cout << r.name << ": " << (r.pass ? "PASS" : "FAIL") << " p=" << r.p_value << " n=" << r.n
              << " seed=" << r.seed << " config=" << r.config_hash << " (" << r.runtime_s << " s)\n";
    return r.pass ? kOk : kFailed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_error(e) ? kUsage : kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}
