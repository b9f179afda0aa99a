#pragma once

// Periodic rectangular pulse currents and the exact aggregate of a fleet of
// them over one hyperperiod.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pulse_stagger/error.hpp"
#include "pulse_stagger/numeric.hpp"

namespace pulse_stagger {

using LoadId = std::int64_t;

/// One load's pulse train. The pulse is active on [phase + n*period,
/// phase + n*period + on_width) for every integer n.
struct PulseSpec {
    LoadId id = 0;
    Rational amplitude;            // A
    Tick period;
    Tick on_width;
    Tick phase;                    // first rising edge, in [0, period)
    std::optional<Rational> voltage;  // V
    std::optional<Rational> soc;      // fraction in [0, 1]

    [[nodiscard]] Tick off_width() const { return period - on_width; }

    bool operator==(const PulseSpec&) const = default;
};

inline void validate(const PulseSpec& spec) {
    const std::string who = "load " + std::to_string(spec.id) + ": ";
    if (spec.period <= Tick{0}) throw Error(Errc::InvalidSpec, who + "period must be positive");
    if (spec.on_width <= Tick{0} || spec.on_width > spec.period) {
        throw Error(Errc::InvalidSpec, who + "pulse width must lie in (0, period]");
    }
    if (spec.phase < Tick{0} || spec.phase >= spec.period) {
        throw Error(Errc::InvalidSpec, who + "phase must lie in [0, period)");
    }
    if (spec.amplitude <= 0) throw Error(Errc::InvalidSpec, who + "amplitude must be positive");
    if (spec.voltage && *spec.voltage <= 0) {
        throw Error(Errc::InvalidSpec, who + "voltage must be positive");
    }
    if (spec.soc && (*spec.soc < 0 || *spec.soc > 1)) {
        throw Error(Errc::InvalidSpec, who + "state of charge must lie in [0, 1]");
    }
}

/// Builds a validated spec; the phase is reduced modulo the period.
inline PulseSpec make_pulse(LoadId id, Rational amplitude, Tick period, Tick on_width,
                            Tick phase = Tick{0}) {
    if (period <= Tick{0}) {
        throw Error(Errc::InvalidSpec, "load " + std::to_string(id) + ": period must be positive");
    }
    PulseSpec spec{id, std::move(amplitude), period, on_width, phase.mod(period), {}, {}};
    validate(spec);
    return spec;
}

/// Same spec with a new phase, reduced modulo the period.
inline PulseSpec with_phase(PulseSpec spec, Tick phase) {
    spec.phase = phase.mod(spec.period);
    return spec;
}

[[nodiscard]] inline bool is_active(const PulseSpec& spec, Tick t) {
    return (t - spec.phase).mod(spec.period) < spec.on_width;
}

inline Rational duty_ratio(const PulseSpec& spec) {
    return Rational(spec.on_width.count(), spec.period.count());
}

inline Rational mean_power(const PulseSpec& spec) {
    if (!spec.voltage) {
        throw Error(Errc::MissingVoltage, "load " + std::to_string(spec.id) + " has no voltage");
    }
    return Rational(duty_ratio(spec) * *spec.voltage * spec.amplitude);
}

inline Rational mean_current(const PulseSpec& spec) {
    return Rational(duty_ratio(spec) * spec.amplitude);
}

inline Tick hyperperiod(std::span<const PulseSpec> specs) {
    if (specs.empty()) throw Error(Errc::EmptyInput, "hyperperiod of an empty fleet");
    std::int64_t l = 1;
    for (const auto& s : specs) l = checked_lcm(l, s.period.count());
    return Tick{l};
}

/// Exact piecewise-constant signal on one hyperperiod, stored circularly:
/// levels[k] holds on [breakpoints[k], breakpoints[k+1]) and the last level
/// wraps around to breakpoints[0] + hyperperiod. Adjacent levels always differ,
/// except that a constant signal is stored as the single breakpoint 0.
struct StepProfile {
    Tick hyperperiod;
    std::vector<Tick> breakpoints;
    std::vector<Rational> levels;

    [[nodiscard]] std::size_t size() const { return breakpoints.size(); }

    /// Length of segment k.
    [[nodiscard]] Tick duration(std::size_t k) const {
        const Tick end = k + 1 < breakpoints.size() ? breakpoints[k + 1]
                                                    : breakpoints.front() + hyperperiod;
        return end - breakpoints[k];
    }

    [[nodiscard]] const Rational& level_at(Tick t) const {
        const Tick u = t.mod(hyperperiod);
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), u);
        if (it == breakpoints.begin()) return levels.back();
        return levels[static_cast<std::size_t>(std::distance(breakpoints.begin(), it) - 1)];
    }

    bool operator==(const StepProfile&) const = default;
};

inline constexpr std::int64_t kMaxEdgeEvents = std::int64_t{1} << 24;

inline StepProfile aggregate_profile(std::span<const PulseSpec> specs) {
    const Tick lcm = hyperperiod(specs);
    const std::int64_t length = lcm.count();

    std::int64_t edge_budget = 0;
    for (const auto& s : specs) {
        validate(s);
        edge_budget += 2 * (length / s.period.count()) + 2;
        if (edge_budget > kMaxEdgeEvents) {
            throw Error(Errc::Overflow, "hyperperiod of " + std::to_string(length) +
                                            " ticks produces too many edges to sweep");
        }
    }

    // Linear sweep over [0, length); occurrences crossing the end are split.
    std::vector<std::pair<std::int64_t, Rational>> events;
    events.reserve(static_cast<std::size_t>(edge_budget));
    for (const auto& s : specs) {
        const std::int64_t period = s.period.count();
        for (std::int64_t rise = s.phase.count(); rise < length; rise += period) {
            const std::int64_t fall = rise + s.on_width.count();
            events.emplace_back(rise, s.amplitude);
            if (fall < length) {
                events.emplace_back(fall, -s.amplitude);
            } else if (fall > length) {
                events.emplace_back(0, s.amplitude);
                events.emplace_back(fall - length, -s.amplitude);
            }
        }
    }
    std::sort(events.begin(), events.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<Tick> times{Tick{0}};
    std::vector<Rational> levels{Rational(0)};
    for (const auto& [t, delta] : events) {
        if (t != times.back().count()) {
            times.emplace_back(t);
            levels.push_back(levels.back());
        }
        levels.back() += delta;
    }

    StepProfile out{lcm, {}, {}};
    for (std::size_t k = 0; k < times.size(); ++k) {
        const Rational& prev = k == 0 ? levels.back() : levels[k - 1];
        if (levels[k] != prev) {
            out.breakpoints.push_back(times[k]);
            out.levels.push_back(levels[k]);
        }
    }
    if (out.breakpoints.empty()) {
        out.breakpoints.push_back(Tick{0});
        out.levels.push_back(levels.front());
    }
    return out;
}

struct Metrics {
    Rational min_a;
    Rational max_a;
    Rational fluctuation_a;
    Rational mean_a;  // time-weighted

    bool operator==(const Metrics&) const = default;
};

inline Metrics profile_metrics(const StepProfile& profile) {
    Metrics m;
    m.min_a = *std::min_element(profile.levels.begin(), profile.levels.end());
    m.max_a = *std::max_element(profile.levels.begin(), profile.levels.end());
    m.fluctuation_a = m.max_a - m.min_a;
    Rational area = 0;
    for (std::size_t k = 0; k < profile.size(); ++k) {
        area += profile.levels[k] * profile.duration(k).count();
    }
    m.mean_a = area / profile.hyperperiod.count();
    return m;
}

}  // namespace pulse_stagger
