#include "cuisim/types.hpp"

#include <algorithm>
#include <cctype>

namespace cuisim {

std::string_view to_string(Assertion a) {
    switch (a) {
        case Assertion::Present: return "present";
        case Assertion::Absent: return "absent";
        case Assertion::Uncertain: return "uncertain";
    }
    return "present";
}

std::string_view to_string(EntityKind k) {
    return k == EntityKind::Anatomy ? "anatomy" : "observation";
}

Assertion parse_assertion(std::string_view s) {
    if (s == "present") return Assertion::Present;
    if (s == "absent") return Assertion::Absent;
    if (s == "uncertain") return Assertion::Uncertain;
    throw DomainError("unknown assertion '" + std::string(s) + "'");
}

EntityKind parse_entity_kind(std::string_view s) {
    if (s == "anatomy") return EntityKind::Anatomy;
    if (s == "observation") return EntityKind::Observation;
    throw DomainError("unknown entity kind '" + std::string(s) + "'");
}

namespace {
bool letter_then_digits(std::string_view s, char letter, std::size_t digits) {
    if (s.size() != digits + 1 || s[0] != letter) return false;
    return std::all_of(s.begin() + 1, s.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}
}  // namespace

bool is_valid_cui(std::string_view s) { return letter_then_digits(s, 'C', 7); }
bool is_valid_tui(std::string_view s) { return letter_then_digits(s, 'T', 3); }

}  // namespace cuisim
