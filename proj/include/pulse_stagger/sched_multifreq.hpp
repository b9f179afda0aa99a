#pragma once

// Grouping of pulse trains whose periods are whole multiples of one another.
// Over one hyperperiod every off-interval of a bin load is a slot; an item
// load with period R times its bin's period occupies exactly one of every R
// consecutive slots (cyclically), and the pulses sharing a slot must fit it.

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

struct AssignmentMultiFreq {
    std::vector<bool> bin_flags;                          // x_i, per load
    std::vector<std::optional<std::size_t>> bin_of_item;  // y, per load
    std::vector<std::vector<std::int64_t>> slot_map;      // z: occupied 1-based slots, per load
    std::vector<std::int64_t> ratios;                     // T_item / T_bin, 0 for bins
    std::vector<std::int64_t> off_counts;                 // hyperperiod / T_i, per load
    Tick hyperperiod;
    std::size_t bins_used = 0;

    bool operator==(const AssignmentMultiFreq&) const = default;
};

struct MultiFreqIncidence {
    std::vector<bool> x;
    std::vector<std::vector<bool>> y;               // y[i][j]
    std::vector<std::vector<std::vector<bool>>> z;  // z[i][j][k-1], k in [1, N_i]
};

inline constexpr std::int64_t kMaxSlotsPerLoad = std::int64_t{1} << 20;

/// Both grouping conditions: the item's period is a whole multiple of the
/// bin's, and the item's pulse fits the bin's off-interval.
[[nodiscard]] inline bool check_groupability(const PulseSpec& bin, const PulseSpec& item) {
    return item.period.count() % bin.period.count() == 0 && item.on_width <= bin.off_width();
}

inline MultiFreqIncidence to_incidence(const AssignmentMultiFreq& a) {
    const std::size_t n = a.bin_flags.size();
    MultiFreqIncidence inc;
    inc.x = a.bin_flags;
    inc.y.assign(n, std::vector<bool>(n, false));
    inc.z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto slots = i < a.off_counts.size() ? static_cast<std::size_t>(std::max<std::int64_t>(0, a.off_counts[i])) : 0;
        inc.z[i].assign(n, std::vector<bool>(slots, false));
    }
    for (std::size_t j = 0; j < n && j < a.bin_of_item.size(); ++j) {
        if (!a.bin_of_item[j] || *a.bin_of_item[j] >= n) continue;
        const std::size_t i = *a.bin_of_item[j];
        inc.y[i][j] = true;
        if (j >= a.slot_map.size()) continue;
        for (std::int64_t k : a.slot_map[j]) {
            if (k >= 1 && static_cast<std::size_t>(k) <= inc.z[i][j].size()) {
                inc.z[i][j][static_cast<std::size_t>(k - 1)] = true;
            }
        }
    }
    return inc;
}

inline std::vector<Violation> verify_multifreq(std::span<const PulseSpec> specs,
                                               const MultiFreqIncidence& inc, Tick hyperperiod) {
    std::vector<Violation> out;
    const std::size_t n = specs.size();
    if (inc.x.size() != n || inc.y.size() != n || inc.z.size() != n) {
        out.push_back({ViolationKind::Shape, {}, {}, {}, "incidence does not match the load count"});
        return out;
    }
    std::vector<std::int64_t> slots(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (hyperperiod.count() <= 0 || hyperperiod.count() % specs[i].period.count() != 0) {
            out.push_back({ViolationKind::Shape, i, {}, {}, "hyperperiod is not a multiple of every period"});
            return out;
        }
        slots[i] = hyperperiod.count() / specs[i].period.count();
        if (inc.y[i].size() != n || inc.z[i].size() != n ||
            std::any_of(inc.z[i].begin(), inc.z[i].end(),
                        [&](const auto& row) { return static_cast<std::int64_t>(row.size()) != slots[i]; })) {
            out.push_back({ViolationKind::Shape, i, {}, {}, "slot vectors do not match the off-interval count"});
            return out;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t capacity = inc.x[i] ? specs[i].off_width().count() : 0;
        for (std::int64_t k = 0; k < slots[i]; ++k) {
            std::int64_t used = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (!inc.x[j] && inc.z[i][j][static_cast<std::size_t>(k)]) used += specs[j].on_width.count();
            }
            if (used > capacity) {
                out.push_back({ViolationKind::SlotCapacity, i, {}, static_cast<std::size_t>(k + 1),
                               "off-interval " + std::to_string(k + 1) + " of load " +
                                   std::to_string(specs[i].id) + " holds " + std::to_string(used) +
                                   " ticks of pulses but offers " + std::to_string(capacity)});
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& z = inc.z[i][j];
            const bool any_slot = std::find(z.begin(), z.end(), true) != z.end();
            if (!inc.y[i][j] && !any_slot) continue;
            if (specs[j].period.count() % specs[i].period.count() != 0) {
                out.push_back({ViolationKind::Groupability, i, j, {},
                               "period of load " + std::to_string(specs[j].id) +
                                   " is not a multiple of the period of load " + std::to_string(specs[i].id)});
                continue;
            }
            const std::int64_t ratio = specs[j].period.count() / specs[i].period.count();
            const std::int64_t expected = inc.y[i][j] ? 1 : 0;
            for (std::int64_t start = 0; start < slots[i]; ++start) {
                std::int64_t count = 0;
                for (std::int64_t k = start; k < start + ratio; ++k) count += z[static_cast<std::size_t>(k % slots[i])] ? 1 : 0;
                if (count != expected) {
                    out.push_back({ViolationKind::SlotPeriodicity, i, j, static_cast<std::size_t>(start + 1),
                                   "load " + std::to_string(specs[j].id) + " occupies " + std::to_string(count) +
                                       " of the " + std::to_string(ratio) +
                                       " off-intervals starting at " + std::to_string(start + 1) +
                                       " of load " + std::to_string(specs[i].id) + ", expected " +
                                       std::to_string(expected)});
                    break;
                }
            }
        }
    }

    for (std::size_t j = 0; j < n; ++j) {
        std::size_t hosts = 0;
        for (std::size_t i = 0; i < n; ++i) hosts += inc.y[i][j] ? 1 : 0;
        const std::size_t expected = inc.x[j] ? 0 : 1;
        if (hosts != expected) {
            out.push_back({ViolationKind::SingleAssignment, {}, j, {},
                           "load " + std::to_string(specs[j].id) + " is grouped with " +
                               std::to_string(hosts) + " bins, expected " + std::to_string(expected)});
        }
    }
    return out;
}

inline std::vector<Violation> verify_multifreq(std::span<const PulseSpec> specs,
                                               const AssignmentMultiFreq& a) {
    std::vector<Violation> out;
    const std::size_t n = specs.size();
    if (a.bin_flags.size() != n || a.bin_of_item.size() != n || a.slot_map.size() != n ||
        a.ratios.size() != n || a.off_counts.size() != n) {
        out.push_back({ViolationKind::Shape, {}, {}, {}, "assignment does not match the load count"});
        return out;
    }
    const auto flagged = static_cast<std::size_t>(std::count(a.bin_flags.begin(), a.bin_flags.end(), true));
    if (flagged != a.bins_used) {
        out.push_back({ViolationKind::BinCount, {}, {}, {},
                       "bins_used is " + std::to_string(a.bins_used) + " but " +
                           std::to_string(flagged) + " loads are flagged as bins"});
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (a.hyperperiod.count() <= 0 || a.hyperperiod.count() % specs[i].period.count() != 0 ||
            a.off_counts[i] != a.hyperperiod.count() / specs[i].period.count()) {
            out.push_back({ViolationKind::Shape, i, {}, {}, "off-interval count disagrees with the hyperperiod"});
            return out;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!a.bin_of_item[j]) continue;
        const std::size_t i = *a.bin_of_item[j];
        if (i >= n) {
            out.push_back({ViolationKind::Shape, {}, j, {}, "bin index out of range"});
            return out;
        }
        for (std::int64_t k : a.slot_map[j]) {
            if (k < 1 || k > a.off_counts[i]) {
                out.push_back({ViolationKind::Shape, i, j, {}, "slot index out of range"});
                return out;
            }
        }
        if (specs[j].period.count() % specs[i].period.count() == 0 &&
            a.ratios[j] != specs[j].period.count() / specs[i].period.count()) {
            out.push_back({ViolationKind::Shape, i, j, {}, "recorded period ratio is wrong"});
        }
    }
    auto rest = verify_multifreq(specs, to_incidence(a), a.hyperperiod);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

namespace detail {

/// One pulse train sharing a bin: it occupies slots k with k % ratio == residue.
struct SlotTenant {
    std::int64_t ratio;
    std::int64_t residue;
    std::int64_t width;
    LoadId id;
};

namespace offsets_impl {

inline bool shares_slot(const SlotTenant& a, const SlotTenant& b) {
    const std::int64_t g = std::gcd(a.ratio, b.ratio);
    return (a.residue - b.residue) % g == 0;
}

inline bool exact(std::span<const SlotTenant> tenants, std::int64_t capacity,
                  std::vector<std::optional<std::int64_t>>& offsets, std::int64_t floor,
                  std::size_t placed) {
    if (placed == tenants.size()) return true;
    for (std::size_t t = 0; t < tenants.size(); ++t) {
        if (offsets[t]) continue;
        std::vector<std::int64_t> candidates{0};
        for (std::size_t p = 0; p < tenants.size(); ++p) {
            if (offsets[p] && shares_slot(tenants[t], tenants[p])) candidates.push_back(*offsets[p] + tenants[p].width);
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        for (std::int64_t o : candidates) {
            if (o < floor || o + tenants[t].width > capacity) continue;
            bool clash = false;
            for (std::size_t p = 0; p < tenants.size() && !clash; ++p) {
                if (!offsets[p] || !shares_slot(tenants[t], tenants[p])) continue;
                clash = o < *offsets[p] + tenants[p].width && *offsets[p] < o + tenants[t].width;
            }
            if (clash) continue;
            offsets[t] = o;
            if (exact(tenants, capacity, offsets, o, placed + 1)) return true;
            offsets[t].reset();
        }
    }
    return false;
}

}  // namespace offsets_impl

/// Start offsets (ticks after the start of an off-interval) such that pulses
/// sharing any slot never overlap and all end within `capacity`. Shorter
/// ratios go first, then wider pulses, then ascending id; each pulse starts
/// where the fullest of its slots ends. When that greedy pass fails, an
/// exhaustive search over left-justified layouts decides.
inline std::optional<std::vector<std::int64_t>> place_in_slots(std::span<const SlotTenant> tenants,
                                                               std::int64_t capacity) {
    std::vector<std::size_t> order(tenants.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& l = tenants[a];
        const auto& r = tenants[b];
        if (l.ratio != r.ratio) return l.ratio < r.ratio;
        if (l.width != r.width) return l.width > r.width;
        return l.id < r.id;
    });

    std::vector<std::int64_t> offsets(tenants.size(), 0);
    std::vector<std::size_t> done;
    bool greedy_ok = true;
    for (std::size_t t : order) {
        std::int64_t start = 0;
        for (std::size_t p : done) {
            if (offsets_impl::shares_slot(tenants[t], tenants[p])) {
                start = std::max(start, offsets[p] + tenants[p].width);
            }
        }
        if (start + tenants[t].width > capacity) {
            greedy_ok = false;
            break;
        }
        offsets[t] = start;
        done.push_back(t);
    }
    if (greedy_ok) return offsets;

    std::vector<std::optional<std::int64_t>> partial(tenants.size());
    if (!offsets_impl::exact(tenants, capacity, partial, 0, 0)) return std::nullopt;
    for (std::size_t t = 0; t < tenants.size(); ++t) offsets[t] = *partial[t];
    return offsets;
}

class SlotPacker {
public:
    SlotPacker(std::span<const PulseSpec> specs, Tick hyperperiod, bool require_realizable)
        : specs_(specs), hyperperiod_(hyperperiod), require_realizable_(require_realizable) {}

    struct Bin {
        std::size_t load;
        std::int64_t capacity;
        std::vector<std::int64_t> fill;  // per slot
        std::vector<std::size_t> tenant_loads;
        std::vector<SlotTenant> tenants;
    };

    void reset(std::span<const std::size_t> bin_loads) {
        bins_.clear();
        for (std::size_t i : bin_loads) {
            const auto slots = static_cast<std::size_t>(hyperperiod_.count() / specs_[i].period.count());
            bins_.push_back({i, specs_[i].off_width().count(), std::vector<std::int64_t>(slots, 0), {}, {}});
        }
    }

    [[nodiscard]] std::int64_t ratio(std::size_t bin, std::size_t item) const {
        return specs_[item].period.count() / specs_[bins_[bin].load].period.count();
    }

    [[nodiscard]] bool compatible(std::size_t bin, std::size_t item) const {
        return check_groupability(specs_[bins_[bin].load], specs_[item]);
    }

    /// Ticks of pulse an item puts into its bin over one hyperperiod.
    [[nodiscard]] std::int64_t area(std::size_t item) const {
        return specs_[item].on_width.count() * (hyperperiod_.count() / specs_[item].period.count());
    }

    [[nodiscard]] std::int64_t free_area() const {
        std::int64_t total = 0;
        for (const auto& b : bins_) {
            for (std::int64_t f : b.fill) total += b.capacity - f;
        }
        return total;
    }

    bool try_place(std::size_t bin, std::size_t item, std::int64_t residue) {
        auto& b = bins_[bin];
        const std::int64_t r = ratio(bin, item);
        const std::int64_t w = specs_[item].on_width.count();
        for (std::size_t k = static_cast<std::size_t>(residue); k < b.fill.size(); k += static_cast<std::size_t>(r)) {
            if (b.fill[k] + w > b.capacity) return false;
        }
        for (std::size_t k = static_cast<std::size_t>(residue); k < b.fill.size(); k += static_cast<std::size_t>(r)) {
            b.fill[k] += w;
        }
        b.tenant_loads.push_back(item);
        b.tenants.push_back({r, residue, w, specs_[item].id});
        if (require_realizable_ && !place_in_slots(b.tenants, b.capacity)) {
            remove_last(bin);
            return false;
        }
        return true;
    }

    void remove_last(std::size_t bin) {
        auto& b = bins_[bin];
        const SlotTenant t = b.tenants.back();
        for (std::size_t k = static_cast<std::size_t>(t.residue); k < b.fill.size(); k += static_cast<std::size_t>(t.ratio)) {
            b.fill[k] -= t.width;
        }
        b.tenants.pop_back();
        b.tenant_loads.pop_back();
    }

    /// Exact: can `items` all be added to the current state?
    bool feasible(std::vector<std::size_t> items) {
        std::stable_sort(items.begin(), items.end(), [&](std::size_t a, std::size_t b) {
            if (specs_[a].on_width != specs_[b].on_width) return specs_[a].on_width > specs_[b].on_width;
            return specs_[a].period < specs_[b].period;
        });
        std::int64_t need = 0;
        for (std::size_t j : items) need += area(j);
        return search(items, 0, need);
    }

    [[nodiscard]] const std::vector<Bin>& bins() const { return bins_; }

private:
    bool search(const std::vector<std::size_t>& items, std::size_t pos, std::int64_t need) {
        if (pos == items.size()) return true;
        if (need > free_area()) return false;
        const std::size_t j = items[pos];
        for (std::size_t b = 0; b < bins_.size(); ++b) {
            if (!compatible(b, j)) continue;
            const bool empty = bins_[b].tenants.empty();
            if (empty) {
                // empty bins of the same shape are interchangeable
                bool seen = false;
                for (std::size_t p = 0; p < b && !seen; ++p) {
                    seen = bins_[p].tenants.empty() && compatible(p, j) &&
                           specs_[bins_[p].load].period == specs_[bins_[b].load].period &&
                           bins_[p].capacity == bins_[b].capacity;
                }
                if (seen) continue;
            }
            // rotating every slot index of a bin preserves feasibility
            const std::int64_t residues = empty ? 1 : ratio(b, j);
            for (std::int64_t r = 0; r < residues; ++r) {
                if (!try_place(b, j, r)) continue;
                const bool ok = search(items, pos + 1, need - area(j));
                remove_last(b);
                if (ok) return true;
            }
        }
        return false;
    }

    std::span<const PulseSpec> specs_;
    Tick hyperperiod_;
    bool require_realizable_;
    std::vector<Bin> bins_;
};

}  // namespace detail

struct MultiFreqOptions {
    /// Window whose off-intervals are indexed; defaults to the fleet's own
    /// hyperperiod. Must be a common multiple of every period.
    std::optional<Tick> hyperperiod;
    /// Reject assignments whose pulses cannot be laid out without overlap.
    /// Only matters when a bin hosts items whose period ratios do not divide
    /// one another; the plain slot-capacity model is used when false.
    bool require_realizable = true;
};

/// Exact minimum-bin grouping over one hyperperiod. Ties are broken like
/// solve_samefreq, and each item takes its smallest feasible starting slot.
inline AssignmentMultiFreq solve_multifreq(std::span<const PulseSpec> specs,
                                           const MultiFreqOptions& options = {}) {
    if (specs.empty()) throw Error(Errc::EmptyInput, "no loads to schedule");
    for (const auto& s : specs) validate(s);
    const Tick lcm = options.hyperperiod.value_or(hyperperiod(specs));
    for (const auto& s : specs) {
        if (lcm.count() <= 0 || lcm.count() % s.period.count() != 0) {
            throw Error(Errc::InvalidSpec, "window " + std::to_string(lcm.count()) +
                                               " is not a multiple of the period of load " + std::to_string(s.id));
        }
        if (lcm.count() / s.period.count() > kMaxSlotsPerLoad) {
            throw Error(Errc::Overflow, "load " + std::to_string(s.id) + " has too many off-intervals per hyperperiod");
        }
    }
    const std::size_t n = specs.size();

    Rational total_duty = 0;
    for (const auto& s : specs) total_duty += duty_ratio(s);
    const auto lower_bound = std::max<std::size_t>(1, ceil_integer(total_duty).convert_to<std::size_t>());

    detail::SlotPacker packer(specs, lcm, options.require_realizable);

    for (std::size_t s = lower_bound; s <= n; ++s) {
        std::optional<AssignmentMultiFreq> found;
        detail::for_each_subset_lex(n, s, [&](const std::vector<bool>& flags) {
            std::vector<std::size_t> bins;
            std::vector<std::size_t> items;
            for (std::size_t i = 0; i < n; ++i) (flags[i] ? bins : items).push_back(i);

            packer.reset(bins);
            for (std::size_t j : items) {
                bool any = false;
                for (std::size_t b = 0; b < bins.size() && !any; ++b) any = packer.compatible(b, j);
                if (!any) return false;
            }
            if (!packer.feasible(items)) return false;

            // Fix items in input order to the smallest (bin, starting slot)
            // that keeps the rest packable.
            AssignmentMultiFreq a;
            a.bin_flags = flags;
            a.bin_of_item.assign(n, std::nullopt);
            a.slot_map.assign(n, {});
            a.ratios.assign(n, 0);
            a.off_counts.resize(n);
            for (std::size_t i = 0; i < n; ++i) a.off_counts[i] = lcm.count() / specs[i].period.count();
            a.hyperperiod = lcm;
            a.bins_used = s;

            for (std::size_t k = 0; k < items.size(); ++k) {
                const std::size_t j = items[k];
                const std::vector<std::size_t> rest(items.begin() + static_cast<std::ptrdiff_t>(k + 1), items.end());
                bool placed = false;
                for (std::size_t b = 0; b < bins.size() && !placed; ++b) {
                    if (!packer.compatible(b, j)) continue;
                    const std::int64_t r_max = packer.ratio(b, j);
                    for (std::int64_t r = 0; r < r_max && !placed; ++r) {
                        if (!packer.try_place(b, j, r)) continue;
                        if (packer.feasible(rest)) {
                            placed = true;
                            a.bin_of_item[j] = bins[b];
                            a.ratios[j] = r_max;
                            for (std::int64_t slot = r; slot < a.off_counts[bins[b]]; slot += r_max) {
                                a.slot_map[j].push_back(slot + 1);
                            }
                        } else {
                            packer.remove_last(b);
                        }
                    }
                }
                if (!placed) throw Error(Errc::Infeasible, "internal: packing proof lost during placement");
            }
            found = std::move(a);
            return true;
        });
        if (found) return *found;
    }
    throw Error(Errc::Infeasible, "no bin subset of any size packs the remaining loads");
}

/// Phases for a solved assignment. An item whose first slot is the k-th
/// off-interval of its bin starts at
///   bin phase + bin width + (k - 1) * bin period + offset within the slot.
inline std::vector<PulseSpec> realize_phases_multifreq(std::span<const PulseSpec> specs,
                                                       const AssignmentMultiFreq& a) {
    const auto violations = verify_multifreq(specs, a);
    if (!violations.empty()) throw Error(Errc::InvalidAssignment, violations.front().message);

    std::vector<PulseSpec> out(specs.begin(), specs.end());
    for (std::size_t b = 0; b < specs.size(); ++b) {
        if (!a.bin_flags[b]) continue;
        std::vector<std::size_t> members;
        std::vector<detail::SlotTenant> tenants;
        for (std::size_t j = 0; j < specs.size(); ++j) {
            if (a.bin_of_item[j] != b) continue;
            members.push_back(j);
            const std::int64_t first = *std::min_element(a.slot_map[j].begin(), a.slot_map[j].end());
            tenants.push_back({a.ratios[j], first - 1, specs[j].on_width.count(), specs[j].id});
        }
        if (members.empty()) continue;
        const auto offsets = detail::place_in_slots(tenants, specs[b].off_width().count());
        if (!offsets) {
            throw Error(Errc::Unrealizable, "pulses sharing the off-intervals of load " +
                                                std::to_string(specs[b].id) + " cannot be laid out without overlap");
        }
        for (std::size_t t = 0; t < members.size(); ++t) {
            const Tick start = specs[b].phase + specs[b].on_width +
                               specs[b].period * tenants[t].residue + Tick{(*offsets)[t]};
            out[members[t]] = with_phase(out[members[t]], start);
        }
    }
    return out;
}

}  // namespace pulse_stagger
