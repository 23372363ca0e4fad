#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "igabem/harness.hpp"

namespace igabem {

using KeyValues = std::map<std::string, std::string>;

// Plain-text configuration (grammar in README):
//   key = value      one per line; '#' starts a comment; values may be quoted.
// Duplicate keys: the last one wins.
KeyValues parse_config(std::istream& in);
KeyValues parse_config_file(const std::string& path);

// "A..B" (inclusive) or a comma list "0,1,3".
std::vector<int> parse_levels(const std::string& text);

// Applies known keys; throws std::invalid_argument naming any unknown key or bad value.
void apply_config(const KeyValues& kv, StudyConfig& cfg);

}  // namespace igabem
