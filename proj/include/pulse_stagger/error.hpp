#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pulse_stagger {

enum class Errc {
    InvalidSpec,
    EmptyInput,
    Overflow,
    MissingVoltage,
    NonRepresentableDuty,
    NonRepresentableTime,
    ZeroDuty,
    NotOverLimit,
    Infeasible,
    MixedFrequencies,
    InvalidAssignment,
    Unrealizable,
    NoAdmissible,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidSpec: return "InvalidSpec";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::Overflow: return "Overflow";
        case Errc::MissingVoltage: return "MissingVoltage";
        case Errc::NonRepresentableDuty: return "NonRepresentableDuty";
        case Errc::NonRepresentableTime: return "NonRepresentableTime";
        case Errc::ZeroDuty: return "ZeroDuty";
        case Errc::NotOverLimit: return "NotOverLimit";
        case Errc::Infeasible: return "Infeasible";
        case Errc::MixedFrequencies: return "MixedFrequencies";
        case Errc::InvalidAssignment: return "InvalidAssignment";
        case Errc::Unrealizable: return "Unrealizable";
        case Errc::NoAdmissible: return "NoAdmissible";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace pulse_stagger
