#pragma once

#include <optional>
#include <string>
#include <vector>

namespace emocorr {

// Flat key-value configuration text: `[section]` headers, `key = value`
// lines, `#` comments. Sections may repeat ([grid] blocks form a list).
struct KvBlock {
    std::string section;
    std::vector<std::pair<std::string, std::string>> entries;

    std::optional<std::string> get(const std::string& key) const;
};

struct KvFile {
    std::vector<KvBlock> blocks;

    static KvFile parse_file(const std::string& path);
    static KvFile parse_string(const std::string& text);

    // Last value wins across all blocks of the section.
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    std::vector<const KvBlock*> sections(const std::string& name) const;
};

// Value helpers; raise ConfigError with the offending key on bad input.
double parse_double(const std::string& key, const std::string& value);
int parse_int(const std::string& key, const std::string& value);
std::vector<std::string> split_list(const std::string& value);  // comma-separated, trimmed

}  // namespace emocorr
