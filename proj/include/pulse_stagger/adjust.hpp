#pragma once

// Power-preserving reshaping of a single pulse train, and proportional
// de-rating of a set of pulse trains to a power cap.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulse_stagger/error.hpp"
#include "pulse_stagger/numeric.hpp"
#include "pulse_stagger/waveform.hpp"

namespace pulse_stagger {

struct AdjustmentRequest {
    Rational target_duty;              // in (0, 1]
    std::optional<Rational> new_voltage;  // keeps the current voltage when absent
};

namespace detail {

inline Tick scaled_width(const PulseSpec& spec, const Rational& duty) {
    const Rational width = duty * spec.period.count();
    if (denominator(width) != 1) {
        throw Error(Errc::NonRepresentableDuty,
                    "load " + std::to_string(spec.id) + ": duty " + duty.str() +
                        " of period " + std::to_string(spec.period.count()) +
                        " ticks is not a whole number of ticks");
    }
    const BigInt ticks = numerator(width);
    if (ticks < 1) {
        throw Error(Errc::NonRepresentableDuty,
                    "load " + std::to_string(spec.id) + ": scaled pulse is shorter than one tick");
    }
    return Tick{ticks.convert_to<std::int64_t>()};
}

inline Rational limit_ratio(const Rational& p_max, const Rational& p_sum) {
    if (p_max <= 0) throw Error(Errc::InvalidSpec, "power cap must be positive");
    if (p_sum <= p_max) {
        throw Error(Errc::NotOverLimit,
                    "total power " + p_sum.str() + " W does not exceed the cap " + p_max.str() + " W");
    }
    return Rational(p_max / p_sum);
}

inline void require_voltages(std::span<const PulseSpec> specs) {
    for (const auto& s : specs) {
        if (!s.voltage) {
            throw Error(Errc::MissingVoltage, "load " + std::to_string(s.id) + " has no voltage");
        }
    }
}

}  // namespace detail

/// Trades duty for amplitude at constant period and constant mean power:
/// I' = D U I / (D' U').
inline PulseSpec adjust_waveform(const PulseSpec& spec, const AdjustmentRequest& req) {
    if (req.target_duty <= 0) {
        throw Error(Errc::ZeroDuty, "load " + std::to_string(spec.id) + ": target duty must be positive");
    }
    if (req.target_duty > 1) {
        throw Error(Errc::InvalidSpec, "load " + std::to_string(spec.id) + ": target duty exceeds 1");
    }
    if (req.new_voltage && !spec.voltage) {
        throw Error(Errc::MissingVoltage,
                    "load " + std::to_string(spec.id) + ": a new voltage needs the present voltage");
    }
    if (req.new_voltage && *req.new_voltage <= 0) {
        throw Error(Errc::InvalidSpec, "load " + std::to_string(spec.id) + ": voltage must be positive");
    }

    PulseSpec out = spec;
    out.on_width = detail::scaled_width(spec, req.target_duty);
    const Rational voltage_ratio =
        req.new_voltage ? Rational(*spec.voltage / *req.new_voltage) : Rational(1);
    out.amplitude = duty_ratio(spec) * spec.amplitude * voltage_ratio / req.target_duty;
    if (req.new_voltage) out.voltage = *req.new_voltage;
    return out;
}

/// Multiplies every amplitude by p_max / p_sum.
inline std::vector<PulseSpec> scale_amplitudes_to_limit(std::span<const PulseSpec> specs,
                                                        const Rational& p_max,
                                                        const Rational& p_sum) {
    detail::require_voltages(specs);
    const Rational ratio = detail::limit_ratio(p_max, p_sum);
    std::vector<PulseSpec> out(specs.begin(), specs.end());
    for (auto& s : out) s.amplitude *= ratio;
    return out;
}

/// Multiplies every duty by p_max / p_sum; the scaled widths must stay whole
/// ticks, otherwise nothing is changed and NonRepresentableDuty is raised.
inline std::vector<PulseSpec> scale_duties_to_limit(std::span<const PulseSpec> specs,
                                                    const Rational& p_max,
                                                    const Rational& p_sum) {
    detail::require_voltages(specs);
    const Rational ratio = detail::limit_ratio(p_max, p_sum);
    std::vector<PulseSpec> out(specs.begin(), specs.end());
    for (auto& s : out) s.on_width = detail::scaled_width(s, Rational(ratio * duty_ratio(s)));
    return out;
}

}  // namespace pulse_stagger
