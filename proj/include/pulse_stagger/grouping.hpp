#pragma once

// Splits a mixed-frequency fleet into groups that can share off-intervals and
// schedules each group on its own.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulse_stagger/error.hpp"
#include "pulse_stagger/sched_multifreq.hpp"
#include "pulse_stagger/sched_samefreq.hpp"
#include "pulse_stagger/waveform.hpp"

namespace pulse_stagger {

struct LoadGroup {
    LoadId anchor;                     // highest-frequency load of the group
    std::vector<std::size_t> members;  // positions in the fleet, input order
    std::optional<AssignmentMultiFreq> assignment;  // indices relative to members
};

struct GroupPlan {
    std::vector<LoadGroup> groups;
};

enum class LoadRole { Bin, Item };

struct GroupFailure {
    std::size_t group;  // 0-based index into GroupPlan::groups
    Errc code;
    std::string message;
};

struct FleetSchedule {
    std::vector<PulseSpec> phased;  // sorted by id
    GroupPlan plan;
    std::vector<GroupFailure> failures;

    /// Role of fleet position `load` in its solved group; Bin when unsolved.
    [[nodiscard]] LoadRole role_of(std::size_t load) const {
        for (const auto& g : plan.groups) {
            const auto it = std::find(g.members.begin(), g.members.end(), load);
            if (it == g.members.end()) continue;
            if (!g.assignment) return LoadRole::Bin;
            const auto pos = static_cast<std::size_t>(std::distance(g.members.begin(), it));
            return g.assignment->bin_flags[pos] ? LoadRole::Bin : LoadRole::Item;
        }
        return LoadRole::Bin;
    }

    [[nodiscard]] std::size_t group_of(std::size_t load) const {
        for (std::size_t g = 0; g < plan.groups.size(); ++g) {
            const auto& m = plan.groups[g].members;
            if (std::find(m.begin(), m.end(), load) != m.end()) return g;
        }
        return plan.groups.size();
    }

    [[nodiscard]] std::size_t bins_used() const {
        std::size_t total = 0;
        for (const auto& g : plan.groups) {
            total += g.assignment ? g.assignment->bins_used : g.members.size();
        }
        return total;
    }
};

/// Repeatedly takes the highest-frequency remaining load (ties: lowest id) as
/// anchor and gathers every remaining load whose period is a whole multiple
/// of the anchor's period.
inline GroupPlan partition_by_frequency(std::span<const PulseSpec> specs) {
    if (specs.empty()) throw Error(Errc::EmptyInput, "no loads to group");
    GroupPlan plan;
    std::vector<bool> taken(specs.size(), false);
    std::size_t left = specs.size();
    while (left > 0) {
        std::optional<std::size_t> anchor;
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (taken[i]) continue;
            if (!anchor || specs[i].period < specs[*anchor].period ||
                (specs[i].period == specs[*anchor].period && specs[i].id < specs[*anchor].id)) {
                anchor = i;
            }
        }
        LoadGroup group{specs[*anchor].id, {}, std::nullopt};
        const std::int64_t base = specs[*anchor].period.count();
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (!taken[i] && specs[i].period.count() % base == 0) {
                taken[i] = true;
                group.members.push_back(i);
                --left;
            }
        }
        plan.groups.push_back(std::move(group));
    }
    return plan;
}

namespace detail {

inline AssignmentMultiFreq lift_samefreq(const AssignmentSameFreq& a, std::span<const PulseSpec> specs) {
    const std::size_t n = specs.size();
    AssignmentMultiFreq out;
    out.bin_flags = a.bin_flags;
    out.bin_of_item = a.placement;
    out.slot_map.assign(n, {});
    out.ratios.assign(n, 0);
    out.off_counts.assign(n, 1);
    out.hyperperiod = specs.front().period;
    out.bins_used = a.bins_used;
    for (std::size_t j = 0; j < n; ++j) {
        if (a.placement[j]) {
            out.slot_map[j] = {1};
            out.ratios[j] = 1;
        }
    }
    return out;
}

}  // namespace detail

/// Schedules every group: equal-period groups with the bin-packing model,
/// mixed-period groups with the slot model. A failing group keeps its input
/// phases and is reported in `failures`; the other groups are still solved.
inline FleetSchedule schedule_fleet(std::span<const PulseSpec> specs) {
    FleetSchedule result{{specs.begin(), specs.end()}, partition_by_frequency(specs), {}};

    for (std::size_t g = 0; g < result.plan.groups.size(); ++g) {
        auto& group = result.plan.groups[g];
        std::vector<PulseSpec> members;
        for (std::size_t i : group.members) members.push_back(specs[i]);
        if (members.size() == 1) {
            group.assignment = detail::lift_samefreq(solve_samefreq(members), members);
            continue;
        }
        const bool same_period = std::all_of(members.begin(), members.end(), [&](const PulseSpec& s) {
            return s.period == members.front().period;
        });
        try {
            std::vector<PulseSpec> phased;
            if (same_period) {
                const auto a = solve_samefreq(members);
                phased = realize_phases_samefreq(members, a);
                group.assignment = detail::lift_samefreq(a, members);
            } else {
                auto a = solve_multifreq(members);
                phased = realize_phases_multifreq(members, a);
                group.assignment = std::move(a);
            }
            for (std::size_t k = 0; k < group.members.size(); ++k) result.phased[group.members[k]] = phased[k];
        } catch (const Error& e) {
            group.assignment.reset();
            result.failures.push_back({g, e.code(), e.what()});
        }
    }
    std::stable_sort(result.phased.begin(), result.phased.end(),
                     [](const PulseSpec& a, const PulseSpec& b) { return a.id < b.id; });
    return result;
}

}  // namespace pulse_stagger
