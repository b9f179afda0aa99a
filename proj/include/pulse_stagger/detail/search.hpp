#pragma once

#include <cstddef>
#include <vector>

namespace pulse_stagger::detail {

/// Visits every 0/1 vector of length n with exactly `ones` ones in ascending
/// lexicographic order. Stops early and returns true once `visit` does.
template <class Visit>
bool for_each_subset_lex(std::size_t n, std::size_t ones, Visit&& visit) {
    if (ones > n) return false;
    std::vector<bool> flags(n, false);
    auto rec = [&](auto&& self, std::size_t pos, std::size_t left) -> bool {
        if (pos == n) return visit(static_cast<const std::vector<bool>&>(flags));
        if (n - pos > left) {
            flags[pos] = false;
            if (self(self, pos + 1, left)) return true;
        }
        if (left > 0) {
            flags[pos] = true;
            if (self(self, pos + 1, left - 1)) return true;
            flags[pos] = false;
        }
        return false;
    };
    return rec(rec, 0, ones);
}

}  // namespace pulse_stagger::detail
