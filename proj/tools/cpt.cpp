// Batch front end: critical-point experiments over the linking geometries.
//
// Subcommands: link-verify, minimax, deform, ekeland, corollaries, report.
// Outputs report.json (plus trace.csv / history.csv where applicable).

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cpt/run.hpp"

namespace {

std::vector<double> parse_eps_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical critical-point toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string eps_text;
  uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    sub->add_option("--config", config_path, "problem configuration file")
        ->required(config_required);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option_function<uint64_t>(
           "--seed",
           [&](uint64_t s) {
             seed = s;
             seed_set = true;
           },
           "seed override");
    sub->add_option("--eps", eps_text, "comma-separated eps sweep override");
  };

  for (const char* name :
       {"link-verify", "minimax", "deform", "ekeland", "corollaries"})
    add_common(app.add_subcommand(name), name != std::string("corollaries"));

  std::string report_path;
  CLI::App* report_cmd =
      app.add_subcommand("report", "re-verify an existing report.json");
  report_cmd->add_option("--config", report_path, "path to report.json")
      ->required();
  report_cmd->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cpt::kExitConfigError;
  }

  const auto started = std::chrono::steady_clock::now();
  int code = 0;
  if (report_cmd->parsed()) {
    code = cpt::verify_report(report_path, out_dir);
  } else {
    cpt::RunArgs args;
    args.mode = app.get_subcommands().front()->get_name();
    args.config_path = config_path;
    args.out_dir = out_dir;
    args.has_seed_override = seed_set;
    args.seed_override = seed;
    if (!eps_text.empty()) args.eps_override = parse_eps_list(eps_text);
    code = cpt::run_problem(args);
  }
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  std::cerr << "wall time: " << elapsed << " s\n";
  return code;
}
