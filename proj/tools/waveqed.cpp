// waveqed: Fock-state pulses scattering off a two-level atom in a waveguide.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace {

const char* describe(const std::string& command) {
  if (command == "initial") return "initial density and phase-space distribution of the incoming pulse";
  if (command == "phase-space") return "f_l(x,p,t) and f_r(x,p,t) on an (x,p) grid";
  if (command == "density") return "photon densities at several times, with photon-number bookkeeping";
  if (command == "spectrum") return "spectra of the reflected and transmitted light after scattering";
  if (command == "stats") return "mean and variance of the reflected and transmitted photon numbers";
  if (command == "sweep") return "photon statistics over a grid of decay rates and pulse separations";
  return "self-checks, including a discretized-continuum reference simulation";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace waveqed::cli;
  CLI::App app{"waveqed: few-photon pulses scattering off a two-level system in a 1D waveguide"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "waveqed 1.0");

  std::string config_path;
  std::vector<std::string> sets;
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config,-c", config_path, "configuration file")->required();
    sub->add_option("--set,-s", sets, "override a key, e.g. --set model.gamma_over_omega=2")
        ->take_all()
        ->allow_extra_args(false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigFailure;
  }

  try {
    KeyValues overrides;
    for (const auto& s : sets) {
      auto [key, value] = parse_assignment(s);
      overrides[key] = value;
    }
    const auto runs = resolve(load_config(config_path), overrides);
    return run_command(app.get_subcommands().front()->get_name(), runs, std::cout);
  } catch (...) {
    return exit_code_for(std::current_exception(), std::cerr);
  }
}
