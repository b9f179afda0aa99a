#pragma once

// Scenario files (JSON) and the exact conversion of their decimal fields into
// ticks and rationals.
//
//   {
//     "loads": [ {"id": 1, "amplitude_a": 10, "frequency_hz": 1, "duty_pct": 50,
//                 "phase_s": "0.65", "voltage_v": 4.2, "soc_pct": 35}, ... ],
//     "power": {"p_max_w": 1000, "mode": "amplitude"},
//     "sim":   {"emit_csv": true, "emit_svg": false}
//   }
//
// Numeric fields may be JSON numbers or decimal strings; seconds carry at
// most six fractional digits.

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "pulse_stagger/numeric.hpp"
#include "pulse_stagger/power_plan.hpp"
#include "pulse_stagger/waveform.hpp"

namespace pulse_stagger {

/// Input problem anchored to a line of the scenario file.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::size_t line, const std::string& what)
        : std::runtime_error(what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct LoadRecord {
    LoadId id = 0;
    Rational amplitude_a;
    Rational frequency_hz;
    Rational duty_pct;
    std::optional<Rational> phase_s;
    std::optional<Rational> voltage_v;
    std::optional<Rational> soc_pct;
    std::size_t line = 1;
};

struct PowerSection {
    std::optional<Rational> p_max_w;
    std::optional<DeratingMode> mode;
};

struct SimSection {
    bool emit_csv = false;
    bool emit_svg = false;
};

struct ScenarioFile {
    std::vector<LoadRecord> loads;
    std::optional<PowerSection> power;
    SimSection sim;
};

namespace detail {

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) line += text[i] == '\n' ? 1 : 0;
    return line;
}

/// Line of each element of the top-level array under `key`.
inline std::vector<std::size_t> array_element_lines(std::string_view text, std::string_view key) {
    std::vector<std::size_t> lines;
    std::size_t line = 1;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    bool in_array = false;
    bool expect_element = false;
    std::string current;
    std::string last_string;
    std::string pending_key;
    for (char c : text) {
        if (c == '\n') ++line;
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
                last_string = current;
            } else {
                current += c;
            }
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
        if (expect_element && c != ']') {
            lines.push_back(line);
            expect_element = false;
        }
        switch (c) {
            case '"':
                in_string = true;
                current.clear();
                break;
            case ':':
                if (depth == 1) pending_key = last_string;
                break;
            case '[':
                ++depth;
                if (depth == 2 && pending_key == key) {
                    in_array = true;
                    expect_element = true;
                }
                break;
            case '{':
                ++depth;
                break;
            case ']':
            case '}':
                if (depth == 2 && in_array && c == ']') in_array = false;
                --depth;
                expect_element = false;
                break;
            case ',':
                if (in_array && depth == 2) expect_element = true;
                if (depth == 1) pending_key.clear();
                break;
            default:
                break;
        }
    }
    return lines;
}

inline std::optional<Rational> read_decimal(const nlohmann::json& value) {
    if (value.is_number()) return parse_decimal(value.dump());
    if (value.is_string()) return parse_decimal(value.get<std::string>());
    return std::nullopt;
}

}  // namespace detail

inline ScenarioFile parse_scenario(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0),
                              std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError(1, "scenario must be a JSON object");
    if (!doc.contains("loads") || !doc["loads"].is_array() || doc["loads"].empty()) {
        throw ValidationError(1, "scenario needs a non-empty \"loads\" array");
    }

    const auto lines = detail::array_element_lines(text, "loads");
    ScenarioFile out;
    std::set<LoadId> seen;
    for (std::size_t k = 0; k < doc["loads"].size(); ++k) {
        const auto& entry = doc["loads"][k];
        const std::size_t line = k < lines.size() ? lines[k] : 1;
        const std::string where = "loads[" + std::to_string(k) + "]";
        if (!entry.is_object()) throw ValidationError(line, where + ": must be an object");

        auto required = [&](const char* field) {
            if (!entry.contains(field)) throw ValidationError(line, where + "." + field + ": missing");
            auto v = detail::read_decimal(entry[field]);
            if (!v) throw ValidationError(line, where + "." + field + ": not a decimal number");
            return *v;
        };
        auto optional = [&](const char* field) -> std::optional<Rational> {
            if (!entry.contains(field) || entry[field].is_null()) return std::nullopt;
            auto v = detail::read_decimal(entry[field]);
            if (!v) throw ValidationError(line, where + "." + field + ": not a decimal number");
            return v;
        };

        LoadRecord rec;
        rec.line = line;
        if (!entry.contains("id") || !entry["id"].is_number_integer()) {
            throw ValidationError(line, where + ".id: must be an integer");
        }
        rec.id = entry["id"].get<LoadId>();
        if (!seen.insert(rec.id).second) {
            throw ValidationError(line, where + ".id: duplicate id " + std::to_string(rec.id));
        }
        rec.amplitude_a = required("amplitude_a");
        rec.frequency_hz = required("frequency_hz");
        rec.duty_pct = required("duty_pct");
        rec.phase_s = optional("phase_s");
        rec.voltage_v = optional("voltage_v");
        rec.soc_pct = optional("soc_pct");

        if (rec.amplitude_a <= 0) throw ValidationError(line, where + ".amplitude_a: must be positive");
        if (rec.frequency_hz <= 0) throw ValidationError(line, where + ".frequency_hz: must be positive");
        if (rec.duty_pct <= 0 || rec.duty_pct > 100) {
            throw ValidationError(line, where + ".duty_pct: must lie in (0, 100]");
        }
        if (rec.phase_s && *rec.phase_s < 0) throw ValidationError(line, where + ".phase_s: must be non-negative");
        if (rec.voltage_v && *rec.voltage_v <= 0) throw ValidationError(line, where + ".voltage_v: must be positive");
        if (rec.soc_pct && (*rec.soc_pct < 0 || *rec.soc_pct > 100)) {
            throw ValidationError(line, where + ".soc_pct: must lie in [0, 100]");
        }
        out.loads.push_back(std::move(rec));
    }

    if (doc.contains("power") && !doc["power"].is_null()) {
        const auto& p = doc["power"];
        if (!p.is_object()) throw ValidationError(1, "power: must be an object");
        PowerSection section;
        if (p.contains("p_max_w")) {
            section.p_max_w = detail::read_decimal(p["p_max_w"]);
            if (!section.p_max_w || *section.p_max_w <= 0) {
                throw ValidationError(1, "power.p_max_w: must be a positive number");
            }
        }
        if (p.contains("mode") && !p["mode"].is_null()) {
            const std::string mode = p["mode"].is_string() ? p["mode"].get<std::string>() : "";
            if (mode == "amplitude") {
                section.mode = DeratingMode::Amplitude;
            } else if (mode == "duty") {
                section.mode = DeratingMode::Duty;
            } else if (mode != "none") {
                throw ValidationError(1, "power.mode: expected \"amplitude\", \"duty\" or \"none\"");
            }
        }
        out.power = section;
    }
    if (doc.contains("sim") && doc["sim"].is_object()) {
        const auto& s = doc["sim"];
        out.sim.emit_csv = s.value("emit_csv", false);
        out.sim.emit_svg = s.value("emit_svg", false);
    }
    return out;
}

/// Exact ticks for one record; phases are reduced modulo the period.
inline PulseSpec to_pulse_spec(const LoadRecord& rec, std::optional<Rational> default_phase = std::nullopt) {
    const std::string where = "load " + std::to_string(rec.id);
    auto ticks = [&](const Rational& seconds, const char* what) {
        const Rational scaled = seconds * kTicksPerSecond;
        if (denominator(scaled) != 1) {
            throw ValidationError(rec.line, where + ": " + what + " of " + format_decimal(seconds, 9) +
                                                " s is not a whole number of microseconds");
        }
        return Tick{numerator(scaled).convert_to<std::int64_t>()};
    };
    const Tick period = ticks(Rational(1) / rec.frequency_hz, "period");
    const Rational on_seconds = Rational(1) / rec.frequency_hz * rec.duty_pct / 100;
    const Tick on_width = ticks(on_seconds, "pulse width");

    std::optional<Rational> phase = rec.phase_s ? rec.phase_s : default_phase;
    if (!phase) throw ValidationError(rec.line, where + ": phase_s is required");
    const Tick phase_ticks = ticks(*phase, "phase");

    PulseSpec spec{rec.id, rec.amplitude_a, period, on_width, phase_ticks.mod(period), rec.voltage_v, std::nullopt};
    if (rec.soc_pct) spec.soc = *rec.soc_pct / 100;
    try {
        validate(spec);
    } catch (const Error& e) {
        throw ValidationError(rec.line, e.what());
    }
    return spec;
}

/// JSON number whose text is the exact decimal when it terminates within
/// `digits` places, otherwise the value rounded to that many places.
inline nlohmann::json decimal_json(const Rational& value, unsigned digits = 6) {
    return nlohmann::json::parse(format_decimal(value, digits));
}

/// Field value that parses back to exactly `value`: a JSON number when the
/// number survives the round trip, else the full decimal as a string. Values
/// without a terminating decimal fall back to a rounded number.
inline nlohmann::json exact_json(const Rational& value) {
    const auto number = decimal_json(value, 12);
    if (parse_decimal(number.dump()) == value) return number;
    if (is_exact_decimal(value, 40)) return format_decimal(value, 40);
    return number;
}

}  // namespace pulse_stagger
