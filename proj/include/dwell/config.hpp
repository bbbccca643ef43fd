#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dwell/errors.hpp"

namespace dwell {

// Minimal INI reader for experiment descriptions. Deliberately strict:
// unknown sections or keys, duplicate entries, and type errors all throw
// ConfigError so that a typo never silently falls back to a default.

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": malformed section header '" + line + "'");
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
                if (cfg.sections_.count(section))
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": duplicate section [" + section + "]");
                cfg.sections_[section];  // materialize (possibly empty) section
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": key outside of any [section]");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            auto& sec = cfg.sections_[section];
            if (sec.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  key + "' in [" + section + "]");
            sec[key] = Entry{value, lineno};
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    const std::string& origin() const { return origin_; }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    bool has(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key) > 0;
    }

    std::vector<std::string> section_names() const {
        std::vector<std::string> out;
        for (const auto& [name, entries] : sections_) out.push_back(name);
        return out;
    }

    std::vector<std::string> keys(const std::string& section) const {
        std::vector<std::string> out;
        auto it = sections_.find(section);
        if (it == sections_.end()) return out;
        for (const auto& [key, entry] : it->second) out.push_back(key);
        return out;
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        return entry_(section, key).value;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        return has(section, key) ? get_string(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        const auto& e = entry_(section, key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(where_(section, key, e) + ": expected a number, got '" + e.value +
                              "'");
        }
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    long long get_int(const std::string& section, const std::string& key) const {
        const auto& e = entry_(section, key);
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(where_(section, key, e) + ": expected an integer, got '" + e.value +
                              "'");
        }
    }

    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    std::vector<std::string> get_list(const std::string& section, const std::string& key) const {
        const auto& e = entry_(section, key);
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(e.value);
        while (std::getline(in, item, ',')) {
            item = detail::trim(item);
            if (item.empty())
                throw ConfigError(where_(section, key, e) + ": empty list element in '" + e.value +
                                  "'");
            out.push_back(item);
        }
        if (out.empty()) throw ConfigError(where_(section, key, e) + ": empty list");
        return out;
    }

    std::vector<int> get_int_list(const std::string& section, const std::string& key) const {
        const auto& e = entry_(section, key);
        std::vector<int> out;
        for (const auto& item : get_list(section, key)) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stoi(item, &pos));
                if (pos != item.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ConfigError(where_(section, key, e) + ": expected integers, got '" + e.value +
                                  "'");
            }
        }
        return out;
    }

    // Schema enforcement: every present section must be listed, and every key
    // within it must be named. `schema` maps section -> allowed keys.
    void enforce_schema(const std::map<std::string, std::vector<std::string>>& schema) const {
        for (const auto& [section, entries] : sections_) {
            auto it = schema.find(section);
            if (it == schema.end())
                throw ConfigError(origin_ + ": unknown section [" + section + "]");
            for (const auto& [key, entry] : entries) {
                if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                    throw ConfigError(where_(section, key, entry) + ": unknown key '" + key +
                                      "' in [" + section + "]");
            }
        }
    }

private:
    const Entry& entry_(const std::string& section, const std::string& key) const {
        auto sit = sections_.find(section);
        if (sit == sections_.end())
            throw ConfigError(origin_ + ": missing section [" + section + "]");
        auto kit = sit->second.find(key);
        if (kit == sit->second.end())
            throw ConfigError(origin_ + ": missing key '" + key + "' in [" + section + "]");
        return kit->second;
    }

    std::string where_(const std::string& section, const std::string& key, const Entry& e) const {
        return origin_ + ":" + std::to_string(e.line) + " ([" + section + "] " + key + ")";
    }

    std::string origin_ = "<empty>";
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

}  // namespace dwell
