// Command-line driver: one test case per invocation, errors written as CSV.

#include "layerpot/layerpot.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

int main(int argc, char** argv) {
  CLI::App app{"Layer potentials near and on implicit surfaces"};
  app.require_subcommand(1);

  layerpot::CaseConfig cfg;
  std::string mode = "both";
  std::string backend = "direct";
  std::string out_path = "-";
  std::string dump_path;

  auto* run = app.add_subcommand("run", "Evaluate u = D[phi] - S[psi] for the harmonic test function");
  std::vector<std::string> ids(layerpot::surface_ids.begin(), layerpot::surface_ids.end());
  run->add_option("--surface", cfg.surface, "Test surface")->check(CLI::IsMember(ids))->required();
  run->add_option("--n", cfg.n, "Grid cells per side; h = 2.2/N")->check(CLI::Range(4, 4096))->required();
  run->add_option("--delta-ratio", cfg.delta_ratios, "delta/h, one or more values")
      ->expected(1, -1)
      ->check(CLI::PositiveNumber);
  run->add_option("--theta", cfg.theta_degrees, "Partition-of-unity angle in degrees")
      ->check(CLI::Range(54.8, 89.9));
  run->add_option("--mode", mode, "Evaluate near the surface, on it, or both")
      ->check(CLI::IsMember({"near", "on", "both"}));
  run->add_option("--sum", backend, "Summation backend")->check(CLI::IsMember({"direct", "treecode"}));
  run->add_option("--taylor-degree", cfg.treecode.taylor_degree, "Treecode Taylor degree")
      ->check(CLI::PositiveNumber);
  run->add_option("--separation", cfg.treecode.separation, "Treecode separation parameter")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--leaf-capacity", cfg.treecode.leaf_capacity, "Treecode leaf capacity")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_path, "CSV output file, '-' for stdout");
  run->add_option("--dump-nodes", dump_path, "Write the quadrature nodes to this file");

  CLI11_PARSE(app, argc, argv);

  const std::map<std::string, layerpot::Mode> modes{
      {"near", layerpot::Mode::near}, {"on", layerpot::Mode::on}, {"both", layerpot::Mode::both}};
  cfg.mode = modes.at(mode);
  cfg.backend = backend == "treecode" ? layerpot::SumBackend::treecode : layerpot::SumBackend::direct;
  if (cfg.backend == layerpot::SumBackend::treecode && cfg.mode != layerpot::Mode::near) {
    std::cerr << "error: the treecode backend supports only --mode near\n";
    return 2;
  }

  try {
    const layerpot::CaseResult res = layerpot::run_case(cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    if (!dump_path.empty()) layerpot::write_nodes(dump_path, res.nodes);
    if (out_path == "-") {
      layerpot::write_csv(std::cout, res.rows);
    } else {
      std::ofstream out(out_path);
      if (!out) throw layerpot::Error("cannot open output file '" + out_path + "'");
      layerpot::write_csv(out, res.rows);
    }
  } catch (const layerpot::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
