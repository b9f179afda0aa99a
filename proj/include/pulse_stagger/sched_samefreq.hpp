#pragma once

// Grouping of equal-period pulse trains as a bin-packing problem: bin loads
// lend their off-interval, item loads are shifted into it. The solver
// minimizes the number of bin loads exactly.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulse_stagger/detail/search.hpp"
#include "pulse_stagger/error.hpp"
#include "pulse_stagger/numeric.hpp"
#include "pulse_stagger/violation.hpp"
#include "pulse_stagger/waveform.hpp"

namespace pulse_stagger {

struct AssignmentSameFreq {
    std::vector<bool> bin_flags;                        // x_i, per load
    std::vector<std::optional<std::size_t>> placement;  // bin of each item load
    std::size_t bins_used = 0;

    bool operator==(const AssignmentSameFreq&) const = default;
};

/// Dense 0/1 form of an assignment, used for checking the model constraints.
/// y[i][j] = 1 when load j sits in the off-interval of load i.
struct SameFreqIncidence {
    std::vector<bool> x;
    std::vector<std::vector<bool>> y;
};

inline SameFreqIncidence to_incidence(const AssignmentSameFreq& a) {
    const std::size_t n = a.bin_flags.size();
    SameFreqIncidence inc{a.bin_flags, std::vector<std::vector<bool>>(n, std::vector<bool>(n, false))};
    for (std::size_t j = 0; j < a.placement.size() && j < n; ++j) {
        if (a.placement[j] && *a.placement[j] < n) inc.y[*a.placement[j]][j] = true;
    }
    return inc;
}

inline std::vector<Violation> verify_samefreq(std::span<const PulseSpec> specs,
                                              const SameFreqIncidence& inc) {
    std::vector<Violation> out;
    const std::size_t n = specs.size();
    if (inc.x.size() != n || inc.y.size() != n ||
        std::any_of(inc.y.begin(), inc.y.end(), [n](const auto& row) { return row.size() != n; })) {
        out.push_back({ViolationKind::Shape, {}, {}, {}, "incidence does not match the load count"});
        return out;
    }
    for (std::size_t j = 1; j < n; ++j) {
        if (specs[j].period != specs[0].period) {
            out.push_back({ViolationKind::Shape, {}, j, {}, "load periods differ"});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t used = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (inc.y[i][j] && !inc.x[j]) used += specs[j].on_width.count();
        }
        const std::int64_t capacity = inc.x[i] ? specs[i].off_width().count() : 0;
        if (used > capacity) {
            out.push_back({ViolationKind::BinCapacity, i, {}, {},
                           "off-interval of load " + std::to_string(specs[i].id) + " holds " +
                               std::to_string(used) + " ticks of pulses but offers " +
                               std::to_string(capacity)});
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t hosts = 0;
        for (std::size_t i = 0; i < n; ++i) hosts += inc.y[i][j] ? 1 : 0;
        const std::size_t expected = inc.x[j] ? 0 : 1;
        if (hosts != expected) {
            out.push_back({ViolationKind::SingleAssignment, {}, j, {},
                           "load " + std::to_string(specs[j].id) + " is placed in " +
                               std::to_string(hosts) + " off-intervals, expected " +
                               std::to_string(expected)});
        }
    }
    return out;
}

inline std::vector<Violation> verify_samefreq(std::span<const PulseSpec> specs,
                                              const AssignmentSameFreq& a) {
    std::vector<Violation> out;
    if (a.bin_flags.size() != specs.size() || a.placement.size() != specs.size()) {
        out.push_back({ViolationKind::Shape, {}, {}, {}, "assignment does not match the load count"});
        return out;
    }
    const auto flagged = static_cast<std::size_t>(std::count(a.bin_flags.begin(), a.bin_flags.end(), true));
    if (flagged != a.bins_used) {
        out.push_back({ViolationKind::BinCount, {}, {}, {},
                       "bins_used is " + std::to_string(a.bins_used) + " but " +
                           std::to_string(flagged) + " loads are flagged as bins"});
    }
    for (std::size_t j = 0; j < a.placement.size(); ++j) {
        if (a.placement[j] && *a.placement[j] >= specs.size()) {
            out.push_back({ViolationKind::Shape, {}, j, {}, "placement index out of range"});
        }
    }
    auto rest = verify_samefreq(specs, to_incidence(a));
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

namespace detail {

/// Packs item widths into bin capacities.
class WidthPacker {
public:
    WidthPacker(std::vector<std::int64_t> widths, std::vector<std::int64_t> capacities)
        : widths_(std::move(widths)), capacities_(std::move(capacities)) {}

    [[nodiscard]] bool first_fit_decreasing() const {
        auto remaining = capacities_;
        for (std::size_t j : decreasing_order()) {
            auto it = std::find_if(remaining.begin(), remaining.end(),
                                   [w = widths_[j]](std::int64_t c) { return c >= w; });
            if (it == remaining.end()) return false;
            *it -= widths_[j];
        }
        return true;
    }

    /// Exact feasibility of packing the items not yet fixed, given the
    /// remaining capacities.
    [[nodiscard]] bool feasible(std::span<const std::size_t> items, std::vector<std::int64_t> remaining) const {
        std::vector<std::size_t> order(items.begin(), items.end());
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return widths_[a] > widths_[b]; });
        std::int64_t total = 0;
        for (std::size_t j : order) total += widths_[j];
        return search(order, 0, remaining, total);
    }

    [[nodiscard]] std::vector<std::size_t> decreasing_order() const {
        std::vector<std::size_t> order(widths_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return widths_[a] > widths_[b]; });
        return order;
    }

    [[nodiscard]] const std::vector<std::int64_t>& widths() const { return widths_; }
    [[nodiscard]] const std::vector<std::int64_t>& capacities() const { return capacities_; }

private:
    bool search(const std::vector<std::size_t>& order, std::size_t pos,
                std::vector<std::int64_t>& remaining, std::int64_t left) const {
        if (pos == order.size()) return true;
        std::int64_t free = 0;
        for (std::int64_t c : remaining) free += c;
        if (free < left) return false;
        const std::int64_t w = widths_[order[pos]];
        for (std::size_t b = 0; b < remaining.size(); ++b) {
            if (remaining[b] < w) continue;
            // bins with equal remaining room are interchangeable
            bool seen = false;
            for (std::size_t p = 0; p < b && !seen; ++p) seen = remaining[p] == remaining[b];
            if (seen) continue;
            remaining[b] -= w;
            const bool ok = search(order, pos + 1, remaining, left - w);
            remaining[b] += w;
            if (ok) return true;
        }
        return false;
    }

    std::vector<std::int64_t> widths_;
    std::vector<std::int64_t> capacities_;
};

}  // namespace detail

/// Exact minimum-bin grouping of equal-period loads. Among optimal solutions
/// the lexicographically smallest bin_flags vector (input order) is returned,
/// then the lexicographically smallest placement.
inline AssignmentSameFreq solve_samefreq(std::span<const PulseSpec> specs) {
    if (specs.empty()) throw Error(Errc::EmptyInput, "no loads to schedule");
    for (const auto& s : specs) {
        validate(s);
        if (s.period != specs.front().period) {
            throw Error(Errc::MixedFrequencies, "load " + std::to_string(s.id) +
                                                    " has a different period than load " +
                                                    std::to_string(specs.front().id));
        }
    }
    const std::size_t n = specs.size();
    const std::int64_t period = specs.front().period.count();
    std::int64_t total_on = 0;
    for (const auto& s : specs) total_on += s.on_width.count();
    const auto lower_bound = static_cast<std::size_t>(std::max<std::int64_t>(1, (total_on + period - 1) / period));

    for (std::size_t s = lower_bound; s <= n; ++s) {
        std::optional<AssignmentSameFreq> found;
        detail::for_each_subset_lex(n, s, [&](const std::vector<bool>& flags) {
            std::vector<std::size_t> bins;
            std::vector<std::size_t> items;
            for (std::size_t i = 0; i < n; ++i) (flags[i] ? bins : items).push_back(i);

            std::vector<std::int64_t> caps;
            std::int64_t cap_total = 0;
            std::int64_t cap_max = 0;
            for (std::size_t b : bins) {
                caps.push_back(specs[b].off_width().count());
                cap_total += caps.back();
                cap_max = std::max(cap_max, caps.back());
            }
            std::vector<std::int64_t> widths;
            std::int64_t width_total = 0;
            for (std::size_t j : items) {
                widths.push_back(specs[j].on_width.count());
                width_total += widths.back();
                if (widths.back() > cap_max) return false;
            }
            if (width_total > cap_total) return false;

            const detail::WidthPacker packer(widths, caps);
            std::vector<std::size_t> all(items.size());
            std::iota(all.begin(), all.end(), std::size_t{0});
            if (!packer.first_fit_decreasing() && !packer.feasible(all, caps)) return false;

            // Lexicographically smallest placement: fix items in input order,
            // each to the lowest-indexed bin that keeps the rest packable.
            AssignmentSameFreq a{flags, std::vector<std::optional<std::size_t>>(n), s};
            std::vector<std::int64_t> remaining = caps;
            for (std::size_t k = 0; k < items.size(); ++k) {
                const std::span<const std::size_t> rest(all.data() + k + 1, all.size() - k - 1);
                bool placed = false;
                for (std::size_t b = 0; b < bins.size() && !placed; ++b) {
                    if (remaining[b] < widths[k]) continue;
                    remaining[b] -= widths[k];
                    if (packer.feasible(rest, remaining)) {
                        a.placement[items[k]] = bins[b];
                        placed = true;
                    } else {
                        remaining[b] += widths[k];
                    }
                }
                if (!placed) {
                    throw Error(Errc::Infeasible, "internal: packing proof lost during placement");
                }
            }
            found = std::move(a);
            return true;
        });
        if (found) return *found;
    }
    // The all-bins assignment satisfies every constraint, so this is unreachable.
    throw Error(Errc::Infeasible, "no bin subset of any size packs the remaining loads");
}

/// Phases for a solved assignment. Bins keep their phase; each bin's items
/// follow its falling edge back to back, widest first, ties by ascending id.
inline std::vector<PulseSpec> realize_phases_samefreq(std::span<const PulseSpec> specs,
                                                      const AssignmentSameFreq& a) {
    const auto violations = verify_samefreq(specs, a);
    if (!violations.empty()) {
        throw Error(Errc::InvalidAssignment, violations.front().message);
    }
    std::vector<PulseSpec> out(specs.begin(), specs.end());
    for (std::size_t b = 0; b < specs.size(); ++b) {
        if (!a.bin_flags[b]) continue;
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < specs.size(); ++j) {
            if (a.placement[j] == b) members.push_back(j);
        }
        std::sort(members.begin(), members.end(), [&](std::size_t l, std::size_t r) {
            if (specs[l].on_width != specs[r].on_width) return specs[l].on_width > specs[r].on_width;
            return specs[l].id < specs[r].id;
        });
        Tick cursor = specs[b].phase + specs[b].on_width;
        for (std::size_t j : members) {
            out[j] = with_phase(out[j], cursor);
            cursor += specs[j].on_width;
        }
    }
    return out;
}

}  // namespace pulse_stagger
