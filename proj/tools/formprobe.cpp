#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "formcalc/probes.hpp"

namespace {

int emit(const formcalc::ProbeReport& report, const std::string& out, const std::string& csv) {
  const std::string json = report.to_json();
  if (out.empty()) {
    std::cout << json << '\n';
  } else {
    std::ofstream file(out);
    if (!file) throw std::runtime_error("cannot write " + out);
    file << json << '\n';
  }
  if (!csv.empty()) {
    std::ofstream file(csv);
    if (!file) throw std::runtime_error("cannot write " + csv);
    file << report.samples_csv();
  }
  for (const auto& f : report.flags) {
    if (!f.pass) std::cerr << "FAIL " << f.name << " worst=" << f.worst << " tol=" << f.tolerance << '\n';
  }
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical probes for differential-form identities and regularity estimates"};
  app.require_subcommand(1);

  int id_dim = 3;
  int id_grid = 32;
  std::uint64_t id_seed = 1;
  std::string id_out;
  auto* identities = app.add_subcommand("identities", "Run every module invariant on one grid");
  identities->add_option("--dim", id_dim, "Dimension N (2..4)")->check(CLI::Range(2, 4));
  identities->add_option("--grid", id_grid, "Points per axis");
  identities->add_option("--seed", id_seed, "Random seed");
  identities->add_option("--out", id_out, "JSON report path (stdout if omitted)");

  formcalc::ProbeParams params;
  std::string est_out;
  std::string est_csv;
  auto* estimate = app.add_subcommand("estimate", "Ensemble regularity probe");
  estimate->add_option("--variant", params.variant, "interior | weighted | halfspace")
      ->required()
      ->check(CLI::IsMember({"interior", "weighted", "halfspace"}));
  estimate->add_option("--dim", params.dim, "Dimension N")->check(CLI::Range(2, 4));
  estimate->add_option("--rank", params.rank, "Form rank q");
  estimate->add_option("--order", params.order, "Derivative order m");
  estimate->add_option("--weight", params.weight, "Weight exponent s");
  estimate->add_option("--tau", params.tau, "Decay exponent");
  estimate->add_option("--media", params.media, "id | scalar | algebraic | file:PATH");
  estimate->add_option("--ensemble", params.ensemble, "Ensemble size");
  estimate->add_option("--grid", params.grid, "Points per axis");
  estimate->add_option("--seed", params.seed, "Random seed");
  estimate->add_option("--out", est_out, "JSON report path (stdout if omitted)");
  estimate->add_option("--csv", est_csv, "Per-sample CSV path");

  bool bridge_flag = false;
  int bridge_grid = 16;
  std::uint64_t bridge_seed = 1;
  auto* bridge = app.add_subcommand("bridge", "Vector-calculus dictionary for N = 3");
  bridge->add_flag("--check", bridge_flag, "Verify the grad/curl/div correspondences")->required();
  bridge->add_option("--grid", bridge_grid, "Points per axis");
  bridge->add_option("--seed", bridge_seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*identities) return emit(formcalc::run_identity_suite(id_dim, id_grid, id_seed), id_out, {});
    if (*estimate) return emit(formcalc::run_estimate(params), est_out, est_csv);
    return emit(formcalc::bridge_check(bridge_grid, bridge_seed), {}, {});
  } catch (const std::exception& err) {
    std::cerr << "formprobe: " << err.what() << '\n';
    return 2;
  }
}
