// sle-rho <command> --config <file> [--seed N] [--threads K] [--out DIR]

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <random>
#include <string>

#include "slerho/slerho.hpp"

namespace {

std::uint64_t draw_seed() {
  std::random_device rd;
  return (std::uint64_t{rd()} << 32) ^ rd();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLE(kappa; rho) experiments"};
  std::string command, config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = slerho::default_threads();
  std::vector<std::string> commands;
  for (const auto& [c, name] : slerho::command_names()) commands.push_back(name);
  app.add_option("command", command, "experiment to run")->required()->check(CLI::IsMember(commands));
  app.add_option("--config", config_path, "JSON run configuration or a previous manifest")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  CLI11_PARSE(app, argc, argv);

  slerho::RunConfig cfg;
  try {
    cfg = slerho::parse_config(slerho::read_file(config_path));
    cfg.command = *slerho::command_from_string(command);
    if (*seed_opt) cfg.mc.seed = seed;
    if (!cfg.mc.seed) cfg.mc.seed = draw_seed();
    if (*out_opt) cfg.output.directory = out_dir;
  } catch (const std::exception& e) {
    std::cerr << slerho::cli::failure_report(e).dump() << "\n";
    return 2;
  }
  try {
    return slerho::cli::run(cfg, threads, std::cout).exit_code;
  } catch (const std::exception& e) {
    const auto report = slerho::cli::failure_report(e);
    std::cerr << report.dump() << "\n";
    try {
      std::filesystem::create_directories(cfg.output.directory);
      slerho::write_file(std::filesystem::path(cfg.output.directory) / "failure.json", report.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    return 2;
  }
}
