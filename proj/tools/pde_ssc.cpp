// pde-ssc: simulate, certify and compare sampled-in-space PDE controllers.
//
//   pde-ssc simulate  --preset paper-parabolic --out out/
//   pde-ssc lmi-check --config configs/parabolic_n10.yaml
//   pde-ssc compare   --preset paper-parabolic --override partition.N=2 --override shape.beta=1/8
//   pde-ssc verify    --config configs/parabolic_n10.yaml
//
// Exit codes: 0 ok, 1 unexpected failure, 2 configuration, 3 numerical divergence,
// 4 infeasible certificate or decay-bound violation.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssc/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Sampled-in-space control of semilinear parabolic and hyperbolic PDEs"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir;
    std::vector<std::string> overrides;
    std::string preset_help = "built-in scenario (";
    for (const auto& n : ssc::config_presets()) preset_help += (preset_help.back() == '(' ? "" : ", ") + n;
    preset_help += "); the config file and overrides layer on top";

    for (const auto& info : ssc::commands()) {
        auto* sub = app.add_subcommand(info.name, info.summary);
        sub->add_option("--config", config_path, "YAML run configuration")->check(CLI::ExistingFile);
        sub->add_option("--preset", preset, preset_help);
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--override", overrides, "key.path=value, repeatable")->take_all();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : ssc::kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    if (config_path.empty() && preset.empty()) {
        std::cerr << "error: give --config and/or --preset\n";
        return ssc::kExitConfig;
    }
    try {
        auto cfg = ssc::load_config(config_path, preset, overrides);
        if (!out_dir.empty()) cfg.output.dir = out_dir;
        return ssc::run_command(command, cfg, std::cout, std::cerr);
    } catch (const ssc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ssc::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ssc::kExitFailure;
    }
}
