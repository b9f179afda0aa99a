#pragma once

// Test-only fixtures and independent oracles. Nothing here calls into the
// solvers or the event sweep it is used to check.

#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pulse_stagger/numeric.hpp"
#include "pulse_stagger/waveform.hpp"

namespace fixtures {

using pulse_stagger::PulseSpec;
using pulse_stagger::Rational;
using pulse_stagger::Tick;

inline Tick ms(std::int64_t v) { return Tick{v * 1000}; }

inline PulseSpec pulse(pulse_stagger::LoadId id, std::int64_t amplitude, Tick period, Tick on, Tick phase = Tick{0}) {
    return pulse_stagger::make_pulse(id, Rational(amplitude), period, on, phase);
}

/// Ten 1 Hz loads at 10 A with the given phases in hundredths of a second.
inline std::vector<PulseSpec> scenario1(const std::vector<int>& phase_cs) {
    const std::vector<int> duty{50, 50, 80, 30, 60, 40, 50, 60, 50, 90};
    std::vector<PulseSpec> out;
    for (std::size_t i = 0; i < duty.size(); ++i) {
        out.push_back(pulse(static_cast<int>(i) + 1, 10, ms(1000), ms(10 * duty[i]), ms(10 * phase_cs[i])));
    }
    return out;
}

inline const std::vector<int> kScenario1Random{65, 63, 83, 93, 67, 75, 74, 39, 65, 17};
inline const std::vector<int> kScenario1Staggered{15, 63, 84, 99, 67, 27, 13, 39, 65, 17};

/// Ten 50 %-duty loads at 10 A with mixed frequencies.
inline std::vector<PulseSpec> scenario2(const std::vector<int>& phase_cs) {
    const std::vector<int> freq{8, 4, 5, 5, 1, 2, 4, 2, 8, 1};
    std::vector<PulseSpec> out;
    for (std::size_t i = 0; i < freq.size(); ++i) {
        const Tick period{1'000'000 / freq[i]};
        out.push_back(pulse(static_cast<int>(i) + 1, 10, period, Tick{period.count() / 2}, ms(10 * phase_cs[i])));
    }
    return out;
}

inline const std::vector<int> kScenario2Random{21, 30, 47, 23, 84, 19, 22, 17, 22, 43};
inline const std::vector<int> kScenario2Staggered{21, 30, 33, 23, 93, 19, 42, 44, 27, 43};

/// Aggregate current at tick t by direct summation.
inline Rational sample_sum(const std::vector<PulseSpec>& specs, std::int64_t t) {
    Rational total = 0;
    for (const auto& s : specs) {
        std::int64_t into = (t - s.phase.count()) % s.period.count();
        if (into < 0) into += s.period.count();
        if (into < s.on_width.count()) total += s.amplitude;
    }
    return total;
}

inline std::int64_t brute_lcm(const std::vector<PulseSpec>& specs) {
    std::int64_t l = 1;
    for (const auto& s : specs) l = std::lcm(l, s.period.count());
    return l;
}

/// Minimum number of bins for equal-period loads: every subset of bin loads,
/// every assignment of the remaining loads to those bins.
inline std::size_t brute_force_samefreq_bins(const std::vector<PulseSpec>& specs) {
    const std::size_t n = specs.size();
    std::size_t best = n;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const auto s = static_cast<std::size_t>(__builtin_popcount(mask));
        if (s == 0 || s >= best) continue;
        std::vector<std::size_t> bins;
        std::vector<std::size_t> items;
        for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? bins : items).push_back(i);
        std::vector<std::int64_t> room;
        for (std::size_t b : bins) room.push_back(specs[b].period.count() - specs[b].on_width.count());
        std::function<bool(std::size_t)> place = [&](std::size_t k) {
            if (k == items.size()) return true;
            for (auto& r : room) {
                const std::int64_t w = specs[items[k]].on_width.count();
                if (r < w) continue;
                r -= w;
                const bool ok = place(k + 1);
                r += w;
                if (ok) return true;
            }
            return false;
        };
        if (place(0)) best = s;
    }
    return best;
}

/// Minimum number of bins in the slot model: every bin subset, every bin for
/// each item, and every 0/1 occupancy vector over the bin's off-intervals that
/// has exactly one occupied slot in every window of R consecutive slots
/// (cyclically). Slot capacity is checked on the summed widths.
inline std::size_t brute_force_multifreq_bins(const std::vector<PulseSpec>& specs) {
    const std::size_t n = specs.size();
    const std::int64_t window = brute_lcm(specs);
    std::size_t best = n;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const auto s = static_cast<std::size_t>(__builtin_popcount(mask));
        if (s == 0 || s >= best) continue;
        std::vector<std::size_t> bins;
        std::vector<std::size_t> items;
        for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? bins : items).push_back(i);

        std::vector<std::vector<std::int64_t>> fill;
        for (std::size_t b : bins) fill.emplace_back(static_cast<std::size_t>(window / specs[b].period.count()), 0);

        std::function<bool(std::size_t)> place = [&](std::size_t k) {
            if (k == items.size()) return true;
            const auto& item = specs[items[k]];
            for (std::size_t b = 0; b < bins.size(); ++b) {
                const auto& bin = specs[bins[b]];
                if (item.period.count() % bin.period.count() != 0) continue;
                const std::int64_t ratio = item.period.count() / bin.period.count();
                const std::size_t slots = fill[b].size();
                const std::int64_t cap = bin.period.count() - bin.on_width.count();
                for (std::uint32_t z = 0; z < (1u << slots); ++z) {
                    bool periodic = true;
                    for (std::size_t start = 0; start < slots && periodic; ++start) {
                        int count = 0;
                        for (std::int64_t d = 0; d < ratio; ++d) count += (z >> ((start + static_cast<std::size_t>(d)) % slots)) & 1u;
                        periodic = count == 1;
                    }
                    if (!periodic) continue;
                    bool fits = true;
                    for (std::size_t k2 = 0; k2 < slots; ++k2) {
                        if ((z >> k2) & 1u) fits = fits && fill[b][k2] + item.on_width.count() <= cap;
                    }
                    if (!fits) continue;
                    for (std::size_t k2 = 0; k2 < slots; ++k2) if ((z >> k2) & 1u) fill[b][k2] += item.on_width.count();
                    const bool ok = place(k + 1);
                    for (std::size_t k2 = 0; k2 < slots; ++k2) if ((z >> k2) & 1u) fill[b][k2] -= item.on_width.count();
                    if (ok) return true;
                }
            }
            return false;
        };
        if (place(0)) best = s;
    }
    return best;
}

/// Random equal-period fleet; widths are whole ticks of a coarse grid.
inline std::vector<PulseSpec> random_samefreq_fleet(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> duty(1, 19);     // in 5 % steps
    std::uniform_int_distribution<int> phase(0, 99);
    std::uniform_int_distribution<int> amp(1, 20);
    std::vector<PulseSpec> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(pulse(static_cast<int>(i) + 1, amp(rng), Tick{100}, Tick{5 * duty(rng)}, Tick{phase(rng)}));
    }
    return out;
}

/// Random fleet with periods drawn from divisors of a common window.
inline std::vector<PulseSpec> random_mixed_fleet(std::mt19937_64& rng, std::size_t n,
                                                 const std::vector<std::int64_t>& periods) {
    std::uniform_int_distribution<std::size_t> pick(0, periods.size() - 1);
    std::uniform_int_distribution<int> amp(1, 20);
    std::vector<PulseSpec> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t period = periods[pick(rng)];
        std::uniform_int_distribution<std::int64_t> on(1, period);
        std::uniform_int_distribution<std::int64_t> phase(0, period - 1);
        out.push_back(pulse(static_cast<int>(i) + 1, amp(rng), Tick{period}, Tick{on(rng)}, Tick{phase(rng)}));
    }
    return out;
}

}  // namespace fixtures
