#pragma once

// Flat key-value config files with [section] headers, `#` comments and
// comma-separated lists. Typed getters throw with the full `section.key`
// name so the CLI can report exactly which field is bad.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ktmask {

class Config {
public:
    static Config parse(std::istream& in) {
        Config cfg;
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::string text = trim(line);
            if (text.empty()) continue;
            if (text.front() == '[') {
                if (text.back() != ']' || text.size() < 3)
                    throw std::runtime_error(at(lineno) + "malformed section header");
                section = trim(text.substr(1, text.size() - 2));
                if (section.empty()) throw std::runtime_error(at(lineno) + "malformed section header");
                cfg.data_[section]; // an empty section is still a section
                continue;
            }
            auto eq = text.find('=');
            if (eq == std::string::npos) throw std::runtime_error(at(lineno) + "expected key = value");
            if (section.empty()) throw std::runtime_error(at(lineno) + "key outside any section");
            std::string key = trim(text.substr(0, eq));
            if (key.empty()) throw std::runtime_error(at(lineno) + "expected key = value");
            auto& sec = cfg.data_[section];
            if (sec.count(key))
                throw std::runtime_error(at(lineno) + "duplicate key " + section + "." + key);
            sec[key] = trim(text.substr(eq + 1));
        }
        return cfg;
    }

    static Config parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config: " + path);
        return parse(in);
    }

    bool has_section(const std::string& section) const { return data_.count(section) != 0; }

    bool has(const std::string& section, const std::string& key) const {
        auto it = data_.find(section);
        return it != data_.end() && it->second.count(key) != 0;
    }

    const std::string& get(const std::string& section, const std::string& key) const {
        auto it = data_.find(section);
        if (it == data_.end() || !it->second.count(key))
            throw std::runtime_error(section + "." + key + ": missing");
        return it->second.at(key);
    }

    std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    int get_int(const std::string& section, const std::string& key) const {
        return to_int(section, key, get(section, key));
    }
    int get_int_or(const std::string& section, const std::string& key, int fallback) const {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    std::uint64_t get_u64(const std::string& section, const std::string& key) const {
        return to_u64(section, key, get(section, key));
    }
    std::uint64_t get_u64_or(const std::string& section, const std::string& key, std::uint64_t fallback) const {
        return has(section, key) ? get_u64(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return to_double(section, key, get(section, key));
    }
    double get_double_or(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    std::vector<std::string> get_list(const std::string& section, const std::string& key) const {
        const std::string& raw = get(section, key);
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= raw.size()) {
            auto comma = raw.find(',', start);
            if (comma == std::string::npos) comma = raw.size();
            std::string item = trim(raw.substr(start, comma - start));
            if (item.empty()) throw std::runtime_error(section + "." + key + ": empty list element");
            out.push_back(item);
            start = comma + 1;
        }
        return out;
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        for (const auto& item : get_list(section, key)) out.push_back(to_double(section, key, item));
        return out;
    }

    std::vector<int> get_ints(const std::string& section, const std::string& key) const {
        std::vector<int> out;
        for (const auto& item : get_list(section, key)) out.push_back(to_int(section, key, item));
        return out;
    }

    std::vector<std::uint64_t> get_u64s(const std::string& section, const std::string& key) const {
        std::vector<std::uint64_t> out;
        for (const auto& item : get_list(section, key)) out.push_back(to_u64(section, key, item));
        return out;
    }

private:
    static std::string at(int lineno) { return "config line " + std::to_string(lineno) + ": "; }

    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    static int to_int(const std::string& section, const std::string& key, const std::string& raw) {
        try {
            std::size_t pos = 0;
            long long v = std::stoll(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument("trailing junk");
            if (v < INT32_MIN || v > INT32_MAX) throw std::out_of_range("overflow");
            return static_cast<int>(v);
        } catch (const std::exception&) {
            throw std::runtime_error(section + "." + key + ": not an integer: " + raw);
        }
    }

    static std::uint64_t to_u64(const std::string& section, const std::string& key, const std::string& raw) {
        try {
            if (!raw.empty() && raw[0] == '-') throw std::invalid_argument("negative");
            std::size_t pos = 0;
            unsigned long long v = std::stoull(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument("trailing junk");
            return static_cast<std::uint64_t>(v);
        } catch (const std::exception&) {
            throw std::runtime_error(section + "." + key + ": not an unsigned integer: " + raw);
        }
    }

    static double to_double(const std::string& section, const std::string& key, const std::string& raw) {
        try {
            std::size_t pos = 0;
            double v = std::stod(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument("trailing junk");
            return v;
        } catch (const std::exception&) {
            throw std::runtime_error(section + "." + key + ": not a number: " + raw);
        }
    }

    std::map<std::string, std::map<std::string, std::string>> data_;
};

} // namespace ktmask
