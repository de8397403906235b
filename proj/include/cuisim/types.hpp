#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cuisim {

/// UMLS concept identifier, `C` followed by seven digits.
using Cui = std::string;

enum class Assertion { Present, Absent, Uncertain };
enum class EntityKind { Anatomy, Observation };

std::string_view to_string(Assertion a);
std::string_view to_string(EntityKind k);
Assertion parse_assertion(std::string_view s);
EntityKind parse_entity_kind(std::string_view s);

bool is_valid_cui(std::string_view s);
bool is_valid_tui(std::string_view s);

/// Failure in the data being processed (bad input file, inconsistent ids).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure in configuration or invocation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cuisim
