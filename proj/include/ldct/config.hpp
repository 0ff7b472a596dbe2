#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ldct {

/// Flat `key = value` configuration. Lines starting with '#' are comments;
/// `[section]` headers are accepted and ignored so TOML-style files load.
class KeyValueConfig {
public:
    struct Entry {
        std::string value;
        int line = 0;  // 0 for values set programmatically
    };

    static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
    static KeyValueConfig load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, std::string value);

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<long> get_int(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<double>> get_double_list(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Fails with a diagnostic naming the first key not in `known`.
    void require_known(const std::vector<std::string>& known) const;

    const std::map<std::string, Entry>& entries() const { return entries_; }
    std::string to_string() const;

private:
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

    std::string origin_;
    std::map<std::string, Entry> entries_;
};

}  // namespace ldct
