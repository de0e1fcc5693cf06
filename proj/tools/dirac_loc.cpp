#include <iostream>

#include <CLI11.hpp>

#include "dirac_loc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Transfer-matrix experiments for random quasi-one-dimensional Dirac operators"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  for (const auto& name : dirac_loc::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Config file (key = value lines or JSON)")->required();
    sub->add_option("--seed", seed, "Master seed, overrides the config");
    sub->add_option("--out", out_dir, "Output directory, overrides the config");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  auto* sub = app.get_subcommands().front();
  std::optional<std::uint64_t> seed_opt;
  std::optional<std::string> out_opt;
  if (sub->count("--seed")) seed_opt = seed;
  if (sub->count("--out")) out_opt = out_dir;
  return dirac_loc::run_from_file(sub->get_name(), config_path, seed_opt, out_opt, std::cerr);
}
