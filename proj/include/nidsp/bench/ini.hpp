#ifndef NIDSP_BENCH_INI_HPP
#define NIDSP_BENCH_INI_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nidsp {

/// Error pointing at a line of a config file.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& file, int line, const std::string& msg)
        : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string{}) + ": " + msg), line_(line) {}
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

struct IniValue {
    std::string text;
    int line{0};
};

/// Flat INI document: [section] headers, key = value lines, '#' or ';'
/// comments on their own line. Keys before any header land in section "".
class IniDocument {
public:
    using Section = std::map<std::string, IniValue>;

    static IniDocument parse(std::istream& is, const std::string& name = "<config>") {
        IniDocument doc;
        doc.name_ = name;
        std::string raw, section;
        int line = 0;
        doc.sections_[""];
        while (std::getline(is, raw)) {
            ++line;
            const auto s = trim(raw);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']' || s.size() < 3) throw ConfigError(name, line, "malformed section header '" + s + "'");
                section = trim(s.substr(1, s.size() - 2));
                if (doc.sections_.contains(section) && !doc.sections_[section].empty()) {
                    throw ConfigError(name, line, "duplicate section [" + section + "]");
                }
                doc.sections_[section];
                doc.section_line_[section] = line;
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError(name, line, "expected 'key = value', got '" + s + "'");
            const auto key = trim(s.substr(0, eq));
            if (key.empty()) throw ConfigError(name, line, "empty key");
            auto& sec = doc.sections_[section];
            if (sec.contains(key)) throw ConfigError(name, line, "duplicate key '" + key + "' in [" + section + "]");
            sec[key] = {trim(s.substr(eq + 1)), line};
        }
        return doc;
    }

    static IniDocument load(const std::filesystem::path& p) {
        std::ifstream is(p);
        if (!is) throw ConfigError(p.string(), 0, "cannot open config file");
        return parse(is, p.string());
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] bool has(const std::string& section) const { return sections_.contains(section); }
    [[nodiscard]] const std::map<std::string, Section>& sections() const noexcept { return sections_; }
    [[nodiscard]] int section_line(const std::string& s) const {
        const auto it = section_line_.find(s);
        return it == section_line_.end() ? 0 : it->second;
    }

    [[nodiscard]] const IniValue* find(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    [[nodiscard]] ConfigError error(const IniValue& v, const std::string& msg) const { return {name_, v.line, msg}; }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::vector<std::string> split_list(const std::string& s) {
        std::vector<std::string> out;
        std::size_t start = 0;
        for (;;) {
            const auto comma = s.find(',', start);
            out.push_back(trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
            if (comma == std::string::npos) return out;
            start = comma + 1;
        }
    }

private:
    std::string name_;
    std::map<std::string, Section> sections_;
    std::map<std::string, int> section_line_;
};

} // namespace nidsp

#endif // NIDSP_BENCH_INI_HPP
