#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "shelab/errors.hpp"

namespace shelab {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Flat key/value configuration with [section] headers, '#' comments and
/// comma-separated lists. Every key must belong to the known schema;
/// unknown keys fail fast with a line diagnostic so that a typo in a
/// tolerance field cannot silently corrupt a verdict.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static ConfigFile parse(std::istream& in) {
        ConfigFile cfg;
        std::string raw;
        std::string section;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string line = strip_comment(raw);
            if (line.empty()) continue;
            if (line.front() == '[') {
                const auto close = line.find(']');
                if (close == std::string::npos || trim(line.substr(close + 1)) != "")
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": malformed section header '" + raw + "'");
                section = trim(line.substr(1, close - 1));
                if (section.empty())
                    throw ConfigError("config line " + std::to_string(line_no) +
                                      ": empty section name");
                cfg.sections_[section]; // record even if empty
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + raw + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": key '" + key + "' appears before any [section]");
            auto [it, inserted] = cfg.sections_[section].emplace(key, Entry{value, line_no});
            if (!inserted)
                throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                                  section + "." + key + "' (first at line " +
                                  std::to_string(it->second.line) + ")");
        }
        return cfg;
    }

    static ConfigFile parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    std::string get_string(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end() || !s->second.count(key))
            throw ConfigError("config: missing required key '" + section + "." + key + "'");
        return s->second.at(key).value;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        return has(section, key) ? get_string(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return to_double(section, key, get_string(section, key));
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key);
        try {
            std::size_t pos = 0;
            const std::uint64_t out = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError(locate(section, key) + ": expected unsigned integer, got '" + v +
                              "'");
        }
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        for (const std::string& tok : split_list(get_string(section, key)))
            out.push_back(to_double(section, key, tok));
        return out;
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    std::vector<double> fallback) const {
        return has(section, key) ? get_doubles(section, key) : std::move(fallback);
    }

    std::vector<std::string> get_strings(const std::string& section, const std::string& key) const {
        return split_list(get_string(section, key));
    }

    /// Fails if any parsed (section, key) is absent from the schema. The
    /// schema maps section name -> allowed keys.
    void enforce_schema(const std::map<std::string, std::vector<std::string>>& schema) const {
        for (const auto& [section, keys] : sections_) {
            const auto s = schema.find(section);
            if (s == schema.end())
                throw ConfigError("config: unknown section [" + section + "]");
            for (const auto& [key, entry] : keys) {
                if (std::find(s->second.begin(), s->second.end(), key) == s->second.end())
                    throw ConfigError("config line " + std::to_string(entry.line) +
                                      ": unknown key '" + key + "' in section [" + section + "]");
            }
        }
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections_[section][key] = Entry{value, 0};
    }

    void set(const std::string& section, const std::string& key, double value) {
        std::ostringstream os;
        os << std::setprecision(17) << value;
        set(section, key, os.str());
    }

    void set(const std::string& section, const std::string& key, std::uint64_t value) {
        set(section, key, std::to_string(value));
    }

    void set_list(const std::string& section, const std::string& key,
                  const std::vector<double>& values) {
        std::ostringstream os;
        os << std::setprecision(17);
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) os << ", ";
            os << values[i];
        }
        set(section, key, os.str());
    }

    /// Canonical serialization: sections and keys in sorted order, so that
    /// parse(serialize(x)) == x and serialize is idempotent.
    void serialize(std::ostream& os) const {
        bool first = true;
        for (const auto& [section, keys] : sections_) {
            if (!first) os << '\n';
            first = false;
            os << '[' << section << "]\n";
            for (const auto& [key, entry] : keys) os << key << " = " << entry.value << '\n';
        }
    }

    std::string serialize() const {
        std::ostringstream os;
        serialize(os);
        return os.str();
    }

    bool operator==(const ConfigFile& other) const {
        if (sections_.size() != other.sections_.size()) return false;
        for (const auto& [section, keys] : sections_) {
            const auto o = other.sections_.find(section);
            if (o == other.sections_.end() || o->second.size() != keys.size()) return false;
            for (const auto& [key, entry] : keys) {
                const auto ok = o->second.find(key);
                if (ok == o->second.end() || ok->second.value != entry.value) return false;
            }
        }
        return true;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static std::string strip_comment(const std::string& s) {
        const auto hash = s.find('#');
        return trim(hash == std::string::npos ? s : s.substr(0, hash));
    }

    static std::vector<std::string> split_list(const std::string& s) {
        std::vector<std::string> out;
        std::string token;
        std::istringstream in(s);
        while (std::getline(in, token, ',')) {
            token = trim(token);
            if (!token.empty()) out.push_back(token);
        }
        return out;
    }

    double to_double(const std::string& section, const std::string& key,
                     const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ConfigError(locate(section, key) + ": expected number, got '" + v + "'");
        }
    }

    std::string locate(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s != sections_.end()) {
            const auto k = s->second.find(key);
            if (k != s->second.end())
                return "config line " + std::to_string(k->second.line) + " (" + section + "." +
                       key + ")";
        }
        return "config (" + section + "." + key + ")";
    }

    std::map<std::string, std::map<std::string, Entry>> sections_;
};

} // namespace shelab
