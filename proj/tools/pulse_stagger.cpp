// pulse_stagger: simulate | schedule | plan-power <scenario.json>

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "pulse_stagger/cli.hpp"

int main(int argc, char** argv) {
    namespace cli = pulse_stagger::cli;

    CLI::App app{"Phase staggering and power planning for pulse-charged loads"};
    app.require_subcommand(1);

    cli::Options opt;
    std::string mode;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("file", opt.input, "Scenario JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out_dir, "Directory for the output files")->capture_default_str();
        sub->add_flag("--csv", opt.csv, "Write waveform.csv (t_s,i_total_a)");
        sub->add_flag("--svg", opt.svg, "Write waveform.svg step chart");
        sub->add_flag("--allow-partial", opt.allow_partial,
                      "Keep input phases for groups that cannot be scheduled");
        sub->add_option("--mode", mode, "De-rating mode for plan-power")
            ->check(CLI::IsMember({"amplitude", "duty"}));
    };

    auto* simulate = app.add_subcommand("simulate", "Metrics and waveform of the scenario as given");
    auto* schedule = app.add_subcommand("schedule", "Group loads and stagger their phases");
    auto* plan = app.add_subcommand("plan-power", "Admit loads under the power cap by state of charge");
    for (auto* sub : {simulate, schedule, plan}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    if (mode == "amplitude") opt.mode = pulse_stagger::DeratingMode::Amplitude;
    if (mode == "duty") opt.mode = pulse_stagger::DeratingMode::Duty;

    if (simulate->parsed()) return cli::cmd_simulate(opt, std::cout, std::cerr);
    if (schedule->parsed()) return cli::cmd_schedule(opt, std::cout, std::cerr);
    return cli::cmd_plan_power(opt, std::cout, std::cerr);
}
