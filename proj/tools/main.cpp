#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lorhol/cli.hpp"

namespace fs = std::filesystem;
using namespace lorhol;

namespace {

int emit(const cli::CommandResult& res, const std::string& command, const std::string& out_dir, const std::string& format) {
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / (command + ".json")) << res.report.dump(2) << "\n";
    if (!res.csv.empty()) std::ofstream(fs::path(out_dir) / (command + "_trajectories.csv")) << res.csv;
  }
  if (format == "json") {
    std::cout << res.report.dump(2) << "\n";
  } else {
    for (const auto& line : res.text) std::cout << line << "\n";
  }
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Walker and toric Lorentzian metrics: curvature, holonomy, structures, geodesics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", LORHOL_VERSION);

  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format = "text";
  std::string config_path;
  app.add_option("--seed", seed, "Seed for every random choice (recorded in the report)");
  app.add_option("--out", out_dir, "Directory for the JSON report and trajectory CSV");
  app.add_option("--format", format, "Standard output format")->check(CLI::IsMember({"json", "text"}));

  using Runner = cli::CommandResult (*)(const cli::Config&, std::uint64_t);
  const std::vector<std::tuple<std::string, std::string, Runner>> commands{
      {"check", "Validate the metric and its Lorentzian signature", cli::cmd_check},
      {"holonomy", "Sample and classify the holonomy algebra", cli::cmd_holonomy},
      {"geodesic", "Integrate geodesics and write trajectories", cli::cmd_geodesic},
      {"structure", "Run the screen-bundle structure checks", cli::cmd_structure},
      {"complete", "Probe geodesic completeness against the growth envelope", cli::cmd_complete},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, run] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    subs.push_back(sub);
  }

  std::string demo_name;
  std::string demo_command = "holonomy";
  bool print_config = false;
  auto* demo = app.add_subcommand("demo", "Run a command on a built-in chart");
  demo->add_option("name", demo_name, "flat, toric-ppwave, toric-prwave, corollary, footnote, example52")->required();
  demo->add_option("--command", demo_command, "Command to run")
      ->check(CLI::IsMember({"check", "holonomy", "geodesic", "structure", "complete"}));
  demo->add_flag("--print-config", print_config, "Print the demo config instead of running it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (demo->parsed()) {
      const std::string text = cli::demo_config(demo_name);
      if (print_config) {
        std::cout << text;
        return 0;
      }
      const cli::Config cfg = cli::Config::from_string(text);
      for (const auto& [name, help, run] : commands)
        if (name == demo_command) return emit(run(cfg, seed), name, out_dir, format);
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const cli::Config cfg = cli::Config::from_file(config_path);
      const auto& [name, help, run] = commands[i];
      return emit(run(cfg, seed), name, out_dir, format);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
  return 1;
}
