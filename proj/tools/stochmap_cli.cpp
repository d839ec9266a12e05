// stochmap: run scenarios, query snapshots, check the linearization claim.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stochmap/monte_carlo.hpp"
#include "stochmap/serialization.hpp"
#include "stochmap/transforms2d.hpp"

namespace fs = std::filesystem;
using namespace stochmap;
using nlohmann::json;

namespace {

constexpr int kExitSchema = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitBound = 3;

struct RunArgs {
  std::string scenario;
  std::string out;
  double confidence = 0.999;
  bool degrees = false;
};

struct QueryArgs {
  std::string snapshots;
  std::string i;
  std::string j;
  std::optional<std::size_t> step;
  double confidence = 0.999;
};

struct ValidateArgs {
  double sigma_deg = 5.0;
  double sigma_xy = 0.1;
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
  double bound = 0.01;
  bool second_order = false;
};

int write_atomically(const std::string& path, const std::string& text) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out.flush()) {
      std::cerr << "error: cannot write " << tmp << "\n";
      std::error_code ec;
      fs::remove(tmp, ec);
      return kExitNumeric;
    }
  }
  fs::rename(tmp, target);
  return 0;
}

int cmd_run(const RunArgs& a) {
  if (!(a.confidence > 0.0 && a.confidence < 1.0)) {
    std::cerr << "error: --confidence must lie in (0, 1)\n";
    return kExitSchema;
  }
  Scenario sc;
  try {
    sc = load_scenario(a.scenario, {a.degrees});
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  }
  std::vector<Snapshot> snaps;
  try {
    RunOptions opt;
    opt.confidence = a.confidence;
    snaps = run(sc, opt);
  } catch (const StepError& e) {
    std::cerr << "numerical failure at " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  std::ostringstream text;
  write_snapshots(text, snaps);
  if (a.out.empty() || a.out == "-") {
    std::cout << text.str();
    return 0;
  }
  return write_atomically(a.out, text.str());
}

/// nullopt inside means the world frame.
std::optional<std::optional<EntityId>> resolve(const StochasticMap& map, const std::string& key) {
  if (key == kWorldFrame) return std::optional<EntityId>();
  if (auto id = map.find(key)) return id;
  if (!key.empty() && key.find_first_not_of("0123456789") == std::string::npos) {
    const auto v = std::stoul(key);
    for (const Entity& e : map.entities()) {
      if (e.id.value == v) return e.id;
    }
  }
  return std::nullopt;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

int cmd_query(const QueryArgs& a) {
  std::ifstream in(a.snapshots);
  if (!in) {
    std::cerr << "error: cannot open " << a.snapshots << "\n";
    return kExitSchema;
  }
  std::vector<Snapshot> snaps;
  try {
    snaps = read_snapshots(in);
  } catch (const std::exception& e) {
    std::cerr << "error: malformed snapshot stream: " << e.what() << "\n";
    return kExitSchema;
  }
  if (snaps.empty()) {
    std::cerr << "error: no snapshots in " << a.snapshots << "\n";
    return kExitSchema;
  }
  const Snapshot* snap = &snaps.back();
  if (a.step) {
    auto it = std::find_if(snaps.begin(), snaps.end(),
                           [&](const Snapshot& s) { return s.step == *a.step; });
    if (it == snaps.end()) {
      std::cerr << "error: no snapshot for step " << *a.step << "\n";
      return kExitSchema;
    }
    snap = &*it;
  }
  const auto i = resolve(snap->map, a.i);
  const auto j = resolve(snap->map, a.j);
  if (!i || !j) {
    std::cerr << "error: unknown entity '" << (i ? a.j : a.i) << "'\n";
    return kExitSchema;
  }
  try {
    const Gaussian rel = extract_relation(snap->map, *i, *j);
    auto label = [&](const std::optional<EntityId>& id) {
      return id ? snap->map.entity(*id).name : std::string(kWorldFrame);
    };
    json out = {{"step", snap->step},
                {"i", label(*i)},
                {"j", label(*j)},
                {"mean", rel.mean()},
                {"cov", matrix_rows(rel.cov())},
                {"ellipse", nullptr}};
    try {
      out["ellipse"] = to_json(confidence_ellipse(Eigen::Vector2d(rel.mean().head<2>()),
                                                  Eigen::Matrix2d(rel.cov().topLeftCorner<2, 2>()),
                                                  a.confidence));
    } catch (const Error&) {
    }
    std::cout << out.dump() << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::UnknownEntity ? kExitSchema : kExitNumeric;
  }
  return 0;
}

int cmd_validate(const ValidateArgs& a) {
  if (a.samples < 10'000) {
    std::cerr << "error: --samples must be at least 10000\n";
    return kExitSchema;
  }
  const double sphi = a.sigma_deg * kPi / 180.0;
  const Eigen::Vector3d var(a.sigma_xy * a.sigma_xy, a.sigma_xy * a.sigma_xy, sphi * sphi);
  const std::vector<ChainLink> chain{
      {Gaussian(Eigen::Vector3d(1.0, 0.5, kPi / 6), var.asDiagonal().toDenseMatrix()), false},
      {Gaussian(Eigen::Vector3d(2.0, 1.0, kPi / 4), var.asDiagonal().toDenseMatrix()), false},
  };
  MonteCarloOptions opt;
  opt.samples = a.samples;
  opt.seed = a.seed;
  opt.second_order = a.second_order;
  const MonteCarloReport r = monte_carlo_validate(chain, opt);

  std::printf("compounding (1, 0.5, 30deg) + (2, 1, 45deg), sigma_xy %.4g m, sigma_phi %.4g deg, %zu samples\n",
              a.sigma_xy, a.sigma_deg, r.samples);
  const char* names[3] = {"x", "y", "phi"};
  auto table = [&](const char* label, const EstimateErrors& e) {
    std::printf("%s\n", label);
    std::printf("  %-4s %14s %14s %11s %14s %14s %11s\n", "", "mean", "mc mean", "rel err",
                "var", "mc var", "rel err");
    for (int k = 0; k < 3; ++k) {
      std::printf("  %-4s %14.8f %14.8f %11.3e %14.8e %14.8e %11.3e\n", names[k],
                  e.estimate.mean()(k), r.mc_mean(k), e.mean_rel(k), e.estimate.cov()(k, k),
                  r.mc_cov(k, k), e.var_rel(k));
    }
  };
  table("first order", r.first_order);
  if (r.second_order) table("second order", *r.second_order);
  std::printf("mc standard errors: mean (%.2e, %.2e, %.2e) var (%.2e, %.2e, %.2e)\n",
              r.mc_mean_se(0), r.mc_mean_se(1), r.mc_mean_se(2), r.mc_var_se(0), r.mc_var_se(1),
              r.mc_var_se(2));
  double worst = r.first_order.max_rel();
  if (r.second_order) worst = std::max(worst, r.second_order->max_rel());
  const bool ok = worst <= a.bound;
  std::printf("max relative error %.4e, bound %.4e: %s\n", worst, a.bound, ok ? "PASS" : "FAIL");
  return ok ? 0 : kExitBound;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic map of uncertain spatial relationships"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and emit one JSON snapshot per line");
  run_cmd->add_option("scenario", ra.scenario, "Scenario file")->required();
  run_cmd->add_option("-o,--out", ra.out, "Output file (stdout when omitted)");
  run_cmd->add_option("--confidence", ra.confidence, "Ellipse confidence level");
  run_cmd->add_flag("--degrees", ra.degrees, "Angles in the scenario are in degrees");

  QueryArgs qa;
  auto* query_cmd = app.add_subcommand("query", "Relation between two entities of a snapshot");
  query_cmd->add_option("snapshots", qa.snapshots, "Snapshot stream (JSON Lines)")->required();
  query_cmd->add_option("i", qa.i, "Base entity: name, id or 'world'")->required();
  query_cmd->add_option("j", qa.j, "Target entity: name, id or 'world'")->required();
  query_cmd->add_option("--step", qa.step, "Snapshot step (last when omitted)");
  query_cmd->add_option("--confidence", qa.confidence, "Ellipse confidence level")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));

  ValidateArgs va;
  auto* val_cmd = app.add_subcommand("validate", "Monte Carlo check of first-order propagation");
  val_cmd->add_option("--sigma-deg", va.sigma_deg, "Angular noise (degrees)")
      ->check(CLI::NonNegativeNumber);
  val_cmd->add_option("--sigma-xy", va.sigma_xy, "Translational noise (meters)")
      ->check(CLI::NonNegativeNumber);
  val_cmd->add_option("--samples", va.samples, "Monte Carlo samples");
  val_cmd->add_option("--seed", va.seed, "Random seed");
  val_cmd->add_option("--bound", va.bound, "Relative error bound")->check(CLI::PositiveNumber);
  val_cmd->add_flag("--second-order", va.second_order, "Also check the second-order estimate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitSchema;
  }
  if (*run_cmd) return cmd_run(ra);
  if (*query_cmd) return cmd_query(qa);
  return cmd_validate(va);
}
