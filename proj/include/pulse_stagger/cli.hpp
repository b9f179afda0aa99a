#pragma once

// Batch front-end: simulate, schedule and plan-power over scenario files.
// Exit codes: 0 ok, 1 I/O failure, 2 invalid scenario, 3 scheduling or
// admission failure, 4 power planning without SOC or voltage data.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pulse_stagger/grouping.hpp"
#include "pulse_stagger/power_plan.hpp"
#include "pulse_stagger/scenario.hpp"
#include "pulse_stagger/waveform.hpp"

namespace pulse_stagger::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kOk = 0,
    kIoError = 1,
    kInvalidScenario = 2,
    kSchedulingFailed = 3,
    kMissingPowerData = 4,
};

struct Options {
    fs::path input;
    fs::path out_dir = ".";
    bool csv = false;
    bool svg = false;
    bool allow_partial = false;
    std::optional<DeratingMode> mode;
};

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline nlohmann::json metrics_json(const Metrics& m) {
    return nlohmann::json{
        {"min_a", decimal_json(m.min_a)},
        {"max_a", decimal_json(m.max_a)},
        {"fluctuation_a", decimal_json(m.fluctuation_a)},
        {"mean_a", decimal_json(m.mean_a)},
        {"mean_a_exact", m.mean_a.str()},
    };
}

inline std::string seconds_text(Tick t) { return format_decimal(to_seconds(t), 6); }

/// One row per breakpoint plus a closing row one hyperperiod after the first,
/// so the rows describe exactly one period of the step function.
inline std::string waveform_csv(const StepProfile& profile) {
    std::string out = "t_s,i_total_a\n";
    for (std::size_t k = 0; k < profile.size(); ++k) {
        out += seconds_text(profile.breakpoints[k]) + "," + format_decimal(profile.levels[k], 6) + "\n";
    }
    out += seconds_text(profile.breakpoints.front() + profile.hyperperiod) + "," +
           format_decimal(profile.levels.front(), 6) + "\n";
    return out;
}

inline std::string waveform_svg(const StepProfile& profile) {
    constexpr double kWidth = 800.0;
    constexpr double kHeight = 300.0;
    constexpr double kMargin = 40.0;
    const Metrics m = profile_metrics(profile);
    const double top = m.max_a.convert_to<double>() > 0 ? m.max_a.convert_to<double>() : 1.0;
    const double start = static_cast<double>(profile.breakpoints.front().count());
    const double span = static_cast<double>(profile.hyperperiod.count());

    auto x_of = [&](double t) { return kMargin + (t - start) / span * (kWidth - 2 * kMargin); };
    auto y_of = [&](double level) { return kHeight - kMargin - level / top * (kHeight - 2 * kMargin); };
    auto num = [](double v) {
        std::ostringstream s;
        s.setf(std::ios::fixed);
        s.precision(2);
        s << v;
        return s.str();
    };

    std::string points;
    for (std::size_t k = 0; k < profile.size(); ++k) {
        const double level = profile.levels[k].convert_to<double>();
        const double t0 = static_cast<double>(profile.breakpoints[k].count());
        const double t1 = t0 + static_cast<double>(profile.duration(k).count());
        points += num(x_of(t0)) + "," + num(y_of(level)) + " " + num(x_of(t1)) + "," + num(y_of(level)) + " ";
    }
    if (!points.empty()) points.pop_back();

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"300\" viewBox=\"0 0 800 300\">\n";
    out += "  <title>Aggregate current over one hyperperiod of " + seconds_text(profile.hyperperiod) + " s</title>\n";
    out += "  <line x1=\"40\" y1=\"260\" x2=\"760\" y2=\"260\" stroke=\"#888\"/>\n";
    out += "  <line x1=\"40\" y1=\"40\" x2=\"40\" y2=\"260\" stroke=\"#888\"/>\n";
    out += "  <text x=\"44\" y=\"36\" font-size=\"12\">" + format_decimal(m.max_a, 3) + " A</text>\n";
    out += "  <text x=\"44\" y=\"276\" font-size=\"12\">t = " + seconds_text(profile.breakpoints.front()) + " s</text>\n";
    out += "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    out += "</svg>\n";
    return out;
}

namespace detail {

/// Load entry in scenario form. Amplitudes are rounded to `amplitude_digits`
/// places when given, otherwise written exactly.
inline nlohmann::json load_json(const LoadRecord& rec, const PulseSpec& spec,
                                std::optional<unsigned> amplitude_digits = std::nullopt) {
    nlohmann::json j{
        {"id", rec.id},
        {"amplitude_a", amplitude_digits ? decimal_json(spec.amplitude, *amplitude_digits) : exact_json(spec.amplitude)},
        {"frequency_hz", exact_json(rec.frequency_hz)},
        {"duty_pct", exact_json(duty_ratio(spec) * 100)},
        {"phase_s", seconds_text(spec.phase)},
    };
    if (spec.voltage) j["voltage_v"] = exact_json(*spec.voltage);
    if (rec.soc_pct) j["soc_pct"] = exact_json(*rec.soc_pct);
    return j;
}

inline std::optional<ScenarioFile> load_scenario(const Options& opt, std::ostream& err) {
    std::string text;
    try {
        text = read_file(opt.input);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return std::nullopt;
    }
    return parse_scenario(text);
}

inline void emit_waveforms(const Options& opt, const ScenarioFile& scenario, const StepProfile& profile) {
    if (opt.csv || scenario.sim.emit_csv) write_file_atomic(opt.out_dir / "waveform.csv", waveform_csv(profile));
    if (opt.svg || scenario.sim.emit_svg) write_file_atomic(opt.out_dir / "waveform.svg", waveform_svg(profile));
}

inline void print_metrics(std::ostream& out, const char* label, const Metrics& m) {
    out << label << ": min " << format_decimal(m.min_a, 6) << " A, max " << format_decimal(m.max_a, 6)
        << " A, fluctuation " << format_decimal(m.fluctuation_a, 6) << " A, mean "
        << format_decimal(m.mean_a, 6) << " A\n";
}

template <class Body>
int guarded(const Options& opt, std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        err << opt.input.string() << ":" << e.line() << ": " << e.what() << "\n";
        return kInvalidScenario;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == Errc::NoAdmissible || e.code() == Errc::Infeasible || e.code() == Errc::Unrealizable
                   ? kSchedulingFailed
                   : kInvalidScenario;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    }
}

}  // namespace detail

/// Metrics of the scenario as given, plus optional CSV/SVG of one hyperperiod.
/// Writes metrics.json into the output directory.
inline int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(opt, err, [&]() -> int {
        const auto scenario = detail::load_scenario(opt, err);
        if (!scenario) return kIoError;
        std::vector<PulseSpec> specs;
        for (const auto& rec : scenario->loads) specs.push_back(to_pulse_spec(rec));

        const StepProfile profile = aggregate_profile(specs);
        const Metrics metrics = profile_metrics(profile);
        const nlohmann::json report{
            {"hyperperiod_s", seconds_text(profile.hyperperiod)},
            {"loads", specs.size()},
            {"metrics", metrics_json(metrics)},
        };
        write_file_atomic(opt.out_dir / "metrics.json", report.dump(2) + "\n");
        detail::emit_waveforms(opt, *scenario, profile);
        detail::print_metrics(out, "aggregate", metrics);
        return kOk;
    });
}

/// Groups and phases the fleet, then writes schedule.json. The schedule file
/// is itself a scenario and can be fed back to simulate.
inline int cmd_schedule(const Options& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(opt, err, [&]() -> int {
        const auto scenario = detail::load_scenario(opt, err);
        if (!scenario) return kIoError;
        std::vector<PulseSpec> specs;
        for (const auto& rec : scenario->loads) specs.push_back(to_pulse_spec(rec, Rational(0)));

        const FleetSchedule schedule = schedule_fleet(specs);
        if (!schedule.failures.empty()) {
            for (const auto& f : schedule.failures) {
                err << "group " << f.group + 1 << ": " << f.message << "\n";
            }
            if (!opt.allow_partial) return kSchedulingFailed;
            err << "continuing with input phases for the failed groups (--allow-partial)\n";
        }

        const Metrics before = profile_metrics(aggregate_profile(specs));
        const StepProfile after_profile = aggregate_profile(schedule.phased);
        const Metrics after = profile_metrics(after_profile);

        nlohmann::json loads = nlohmann::json::array();
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const auto& phased = *std::find_if(schedule.phased.begin(), schedule.phased.end(),
                                               [&](const PulseSpec& s) { return s.id == specs[i].id; });
            auto j = detail::load_json(scenario->loads[i], phased);
            j["group"] = schedule.group_of(i) + 1;
            j["role"] = schedule.role_of(i) == LoadRole::Bin ? "bin" : "item";
            loads.push_back(std::move(j));
        }
        nlohmann::json groups = nlohmann::json::array();
        for (std::size_t g = 0; g < schedule.plan.groups.size(); ++g) {
            const auto& group = schedule.plan.groups[g];
            nlohmann::json members = nlohmann::json::array();
            for (std::size_t i : group.members) members.push_back(specs[i].id);
            groups.push_back({
                {"group", g + 1},
                {"anchor", group.anchor},
                {"members", members},
                {"bins_used", group.assignment ? nlohmann::json(group.assignment->bins_used) : nlohmann::json(nullptr)},
                {"solved", group.assignment.has_value()},
            });
        }
        const nlohmann::json report{
            {"loads", loads},
            {"groups", groups},
            {"bins_used", schedule.bins_used()},
            {"hyperperiod_s", seconds_text(after_profile.hyperperiod)},
            {"metrics_before", metrics_json(before)},
            {"metrics_after", metrics_json(after)},
            {"partial", !schedule.failures.empty()},
        };
        write_file_atomic(opt.out_dir / "schedule.json", report.dump(2) + "\n");
        detail::emit_waveforms(opt, *scenario, after_profile);
        detail::print_metrics(out, "before", before);
        detail::print_metrics(out, "after ", after);
        return kOk;
    });
}

/// SOC-ordered admission under power.p_max_w, de-rating when a mode is set.
/// Writes power_plan.json.
inline int cmd_plan_power(const Options& opt, std::ostream& out, std::ostream& err) {
    return detail::guarded(opt, err, [&]() -> int {
        const auto scenario = detail::load_scenario(opt, err);
        if (!scenario) return kIoError;
        for (const auto& rec : scenario->loads) {
            if (!rec.soc_pct || !rec.voltage_v) {
                err << opt.input.string() << ":" << rec.line << ": load " << rec.id
                    << ": plan-power needs soc_pct and voltage_v\n";
                return kMissingPowerData;
            }
        }
        if (!scenario->power || !scenario->power->p_max_w) {
            throw ValidationError(1, "plan-power needs power.p_max_w");
        }
        const Rational p_max = *scenario->power->p_max_w;
        const std::optional<DeratingMode> mode = opt.mode ? opt.mode : scenario->power->mode;

        std::vector<PulseSpec> specs;
        for (const auto& rec : scenario->loads) specs.push_back(to_pulse_spec(rec, Rational(0)));

        PowerPlan plan = prioritize_and_admit(specs, p_max, mode);
        plan = backfill(plan, specs, p_max);
        std::vector<PulseSpec> fleet = specs;
        std::optional<std::string> fallback;
        if (mode && plan.p_sum_w > plan.p_max_w) {
            try {
                std::tie(plan, fleet) = enforce_limit(plan, specs, *mode);
            } catch (const Error& e) {
                if (e.code() != Errc::NonRepresentableDuty) throw;
                fallback = e.what();
                std::tie(plan, fleet) = enforce_limit(plan, specs, DeratingMode::Amplitude);
            }
        }

        nlohmann::json report{
            {"p_max_w", decimal_json(plan.p_max_w, 3)},
            {"p_sum_w", decimal_json(plan.p_sum_w, 3)},
            {"effective_power_w", decimal_json(plan.effective_power_w(), 3)},
            {"scale", decimal_json(plan.scale, 6)},
            {"scale_exact", plan.scale.str()},
            {"mode", plan.mode ? nlohmann::json(std::string(to_string(*plan.mode))) : nlohmann::json(nullptr)},
            {"admitted", plan.admitted},
            {"postponed", plan.postponed},
        };
        if (fallback) report["duty_fallback"] = *fallback;
        if (plan.scale != 1) {
            nlohmann::json derated = nlohmann::json::array();
            for (std::size_t i = 0; i < fleet.size(); ++i) {
                if (std::find(plan.admitted.begin(), plan.admitted.end(), fleet[i].id) == plan.admitted.end()) continue;
                derated.push_back(detail::load_json(scenario->loads[i], fleet[i], 3));
            }
            report["derated_loads"] = derated;
        }
        write_file_atomic(opt.out_dir / "power_plan.json", report.dump(2) + "\n");
        out << "admitted " << plan.admitted.size() << ", postponed " << plan.postponed.size() << ", scale "
            << plan.scale.str() << ", total " << format_decimal(plan.effective_power_w(), 3) << " W of "
            << format_decimal(plan.p_max_w, 3) << " W\n";
        return kOk;
    });
}

}  // namespace pulse_stagger::cli
