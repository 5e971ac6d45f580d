#include "emocorr/config.hpp"

#include <fstream>
#include <sstream>

#include "emocorr/errors.hpp"

namespace emocorr {

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::optional<std::string> KvBlock::get(const std::string& key) const {
    std::optional<std::string> out;
    for (const auto& [k, v] : entries) {
        if (k == key) out = v;
    }
    return out;
}

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

KvFile KvFile::parse_string(const std::string& text) {
    KvFile out;
    KvBlock current;
    bool have_block = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = strip(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section header");
            }
            if (have_block) out.blocks.push_back(current);
            current = KvBlock{};
            current.section = strip(t.substr(1, t.size() - 2));
            if (current.section.empty()) {
                throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            }
            have_block = true;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                              t + "'");
        }
        const std::string key = strip(t.substr(0, eq));
        const std::string value = strip(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        }
        if (!have_block) {
            current.section = "";
            have_block = true;
        }
        current.entries.emplace_back(key, value);
    }
    if (have_block) out.blocks.push_back(current);
    return out;
}

std::optional<std::string> KvFile::get(const std::string& section, const std::string& key) const {
    std::optional<std::string> out;
    for (const auto& b : blocks) {
        if (b.section != section) continue;
        if (auto v = b.get(key)) out = v;
    }
    return out;
}

std::vector<const KvBlock*> KvFile::sections(const std::string& name) const {
    std::vector<const KvBlock*> out;
    for (const auto& b : blocks) {
        if (b.section == name) out.push_back(&b);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

}  // namespace emocorr
