#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace pulse_stagger {

/// Which model constraint a candidate assignment breaks.
enum class ViolationKind {
    Shape,             // vectors sized inconsistently, bad indices, mixed periods
    BinCount,          // bins_used disagrees with the bin flags
    BinCapacity,       // items in one off-interval wider than it (same frequency)
    SingleAssignment,  // an item in zero or several bins, or a bin placed as an item
    SlotCapacity,      // items in the k-th off-interval wider than it
    SlotPeriodicity,   // an item not in exactly one of every R consecutive off-intervals
    Groupability,      // item period not a whole multiple of its bin's period
};

constexpr std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
        case ViolationKind::Shape: return "shape";
        case ViolationKind::BinCount: return "bin-count";
        case ViolationKind::BinCapacity: return "bin-capacity";
        case ViolationKind::SingleAssignment: return "single-assignment";
        case ViolationKind::SlotCapacity: return "slot-capacity";
        case ViolationKind::SlotPeriodicity: return "slot-periodicity";
        case ViolationKind::Groupability: return "groupability";
    }
    return "unknown";
}

/// Indices are positions in the input load list; slots are 1-based.
struct Violation {
    ViolationKind kind;
    std::optional<std::size_t> bin;
    std::optional<std::size_t> item;
    std::optional<std::size_t> slot;
    std::string message;
};

}  // namespace pulse_stagger
