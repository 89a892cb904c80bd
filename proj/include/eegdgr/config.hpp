#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace eegdgr {

// key=value text file; '#' starts a comment, blank lines ignored, keys and
// values trimmed. Later duplicates override earlier ones.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);

std::optional<double> get_double(const KeyValues& kv, const std::string& key);
std::optional<long long> get_int(const KeyValues& kv, const std::string& key);

}  // namespace eegdgr
