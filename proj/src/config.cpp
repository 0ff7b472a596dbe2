#include "ldct/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ldct/errors.hpp"

namespace ldct {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

std::optional<double> parse_double(const std::string& s) {
    // std::from_chars handles "1e4" but not a leading '+'.
    const std::string t = (!s.empty() && s[0] == '+') ? s.substr(1) : s;
    double v = 0.0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc() || ptr != end || t.empty()) return std::nullopt;
    return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        std::replace(key.begin(), key.end(), '-', '_');
        if (cfg.entries_.count(key)) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        cfg.entries_[key] = Entry{value, line_no};
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

void KeyValueConfig::set(const std::string& key, std::string value) {
    std::string k = key;
    std::replace(k.begin(), k.end(), '-', '_');
    entries_[k] = Entry{std::move(value), 0};
}

void KeyValueConfig::fail(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    std::string where = origin_.empty() ? "<config>" : origin_;
    if (it != entries_.end() && it->second.line > 0) where += ":" + std::to_string(it->second.line);
    throw ConfigError(where + ": field '" + key + "': " + message);
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
    const auto s = get_string(key);
    if (!s) return std::nullopt;
    const auto v = parse_double(*s);
    if (!v) fail(key, "expected a number, got '" + *s + "'");
    return v;
}

std::optional<long> KeyValueConfig::get_int(const std::string& key) const {
    const auto v = get_double(key);
    if (!v) return std::nullopt;
    if (*v != static_cast<double>(static_cast<long>(*v))) fail(key, "expected an integer");
    return static_cast<long>(*v);
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
    const auto s = get_string(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") return true;
    if (*s == "false" || *s == "0" || *s == "no" || *s == "off") return false;
    fail(key, "expected a boolean, got '" + *s + "'");
}

std::optional<std::vector<double>> KeyValueConfig::get_double_list(const std::string& key) const {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    std::string body = trim(*s);
    if (!body.empty() && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
    std::vector<double> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto v = parse_double(trim(item));
        if (!v) fail(key, "bad list element '" + trim(item) + "'");
        out.push_back(*v);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get_string(key).value_or(fallback);
}
double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    return get_double(key).value_or(fallback);
}
long KeyValueConfig::get_int(const std::string& key, long fallback) const {
    return get_int(key).value_or(fallback);
}
bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    return get_bool(key).value_or(fallback);
}

void KeyValueConfig::require_known(const std::vector<std::string>& known) const {
    for (const auto& [key, entry] : entries_) {
        if (std::find(known.begin(), known.end(), key) == known.end()) fail(key, "unknown key");
    }
}

std::string KeyValueConfig::to_string() const {
    std::string out;
    for (const auto& [key, entry] : entries_) out += key + " = " + entry.value + "\n";
    return out;
}

}  // namespace ldct
