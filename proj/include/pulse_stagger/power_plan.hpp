#pragma once

// Admission of loads under a total mean-power cap, lowest state of charge
// first, with optional proportional de-rating of the admitted loads.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pulse_stagger/adjust.hpp"
#include "pulse_stagger/error.hpp"
#include "pulse_stagger/numeric.hpp"
#include "pulse_stagger/waveform.hpp"

namespace pulse_stagger {

enum class DeratingMode { Amplitude, Duty };

constexpr std::string_view to_string(DeratingMode mode) noexcept {
    return mode == DeratingMode::Amplitude ? "amplitude" : "duty";
}

struct PowerPlan {
    std::vector<LoadId> admitted;   // charging now, ascending SOC
    std::vector<LoadId> postponed;  // waiting, ascending SOC
    std::optional<DeratingMode> mode;
    Rational scale{1};  // applied p_max / p_sum, 1 when nothing was de-rated
    Rational p_sum_w;   // total mean power of the admitted loads before scaling
    Rational p_max_w;

    [[nodiscard]] Rational effective_power_w() const { return Rational(p_sum_w * scale); }

    bool operator==(const PowerPlan&) const = default;
};

namespace detail {

inline const PulseSpec& find_load(std::span<const PulseSpec> specs, LoadId id) {
    const auto it = std::find_if(specs.begin(), specs.end(), [id](const PulseSpec& s) { return s.id == id; });
    if (it == specs.end()) throw Error(Errc::InvalidSpec, "load " + std::to_string(id) + " is not in the fleet");
    return *it;
}

inline std::vector<std::size_t> soc_order(std::span<const PulseSpec> specs) {
    std::vector<std::size_t> order(specs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (*specs[a].soc != *specs[b].soc) return *specs[a].soc < *specs[b].soc;
        return specs[a].id < specs[b].id;
    });
    return order;
}

}  // namespace detail

/// Greedy admission by ascending SOC (ties by id) while the cumulative mean
/// power stays within p_max. With a de-rating mode every load is admitted and
/// the caller brings the total down with enforce_limit.
inline PowerPlan prioritize_and_admit(std::span<const PulseSpec> specs, const Rational& p_max,
                                      std::optional<DeratingMode> derating = std::nullopt) {
    if (specs.empty()) throw Error(Errc::EmptyInput, "no loads to plan");
    if (p_max <= 0) throw Error(Errc::InvalidSpec, "power cap must be positive");
    for (const auto& s : specs) {
        if (!s.soc) throw Error(Errc::InvalidSpec, "load " + std::to_string(s.id) + " has no state of charge");
        if (!s.voltage) throw Error(Errc::MissingVoltage, "load " + std::to_string(s.id) + " has no voltage");
    }

    PowerPlan plan;
    plan.p_max_w = p_max;
    plan.mode = derating;
    bool open = true;
    for (std::size_t i : detail::soc_order(specs)) {
        const Rational power = mean_power(specs[i]);
        if (open && (derating || plan.p_sum_w + power <= p_max)) {
            plan.admitted.push_back(specs[i].id);
            plan.p_sum_w += power;
        } else {
            open = false;
            plan.postponed.push_back(specs[i].id);
        }
    }
    if (plan.admitted.empty()) {
        throw Error(Errc::NoAdmissible, "the lowest-SOC load alone needs " +
                                            mean_power(specs[detail::soc_order(specs).front()]).str() +
                                            " W, above the cap of " + p_max.str() + " W");
    }
    return plan;
}

/// Scales the admitted loads so their total mean power equals the cap.
/// Returns the updated plan and the whole fleet with admitted loads replaced.
/// A plan that was already enforced is returned unchanged.
inline std::pair<PowerPlan, std::vector<PulseSpec>> enforce_limit(const PowerPlan& plan,
                                                                  std::span<const PulseSpec> specs,
                                                                  DeratingMode mode) {
    std::vector<PulseSpec> fleet(specs.begin(), specs.end());
    if (plan.scale != 1 && plan.effective_power_w() <= plan.p_max_w) return {plan, fleet};

    std::vector<PulseSpec> admitted;
    for (LoadId id : plan.admitted) admitted.push_back(detail::find_load(specs, id));
    const auto scaled = mode == DeratingMode::Amplitude
                            ? scale_amplitudes_to_limit(admitted, plan.p_max_w, plan.p_sum_w)
                            : scale_duties_to_limit(admitted, plan.p_max_w, plan.p_sum_w);
    for (const auto& s : scaled) {
        auto it = std::find_if(fleet.begin(), fleet.end(), [&](const PulseSpec& f) { return f.id == s.id; });
        *it = s;
    }
    PowerPlan out = plan;
    out.mode = mode;
    out.scale = plan.p_max_w / plan.p_sum_w;
    return {out, fleet};
}

/// Moves postponed loads, lowest SOC first, into the admitted set while the
/// total stays within p_max; stops at the first load that does not fit.
/// De-rated plans are returned as they are.
inline PowerPlan backfill(const PowerPlan& plan, std::span<const PulseSpec> specs, const Rational& p_max) {
    PowerPlan out = plan;
    out.p_max_w = p_max;
    // a de-rated plan has no headroom left; the caller plans afresh instead
    if (plan.scale != 1 || plan.p_sum_w > p_max) return out;

    std::vector<PulseSpec> waiting;
    for (LoadId id : plan.postponed) waiting.push_back(detail::find_load(specs, id));
    for (const auto& s : waiting) {
        if (!s.soc || !s.voltage) throw Error(Errc::InvalidSpec, "load " + std::to_string(s.id) + " lacks SOC or voltage");
    }
    std::vector<LoadId> still_waiting;
    bool open = true;
    for (std::size_t i : detail::soc_order(waiting)) {
        const Rational power = mean_power(waiting[i]);
        if (open && out.p_sum_w + power <= p_max) {
            out.admitted.push_back(waiting[i].id);
            out.p_sum_w += power;
        } else {
            open = false;
            still_waiting.push_back(waiting[i].id);
        }
    }
    out.postponed = std::move(still_waiting);
    return out;
}

}  // namespace pulse_stagger
