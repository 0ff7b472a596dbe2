#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldct/config.hpp"

namespace ldct::cli {

std::string sha256_file(const std::filesystem::path& path);

/// Provenance record written next to every command's outputs.
class Manifest {
public:
    Manifest(std::string command, const std::vector<std::string>& argv);

    void set_config(const KeyValueConfig& cfg);
    void add_seed(const std::string& name, std::uint64_t seed);
    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    void add_timing(const std::string& name, double seconds);
    nlohmann::json& extra() { return doc_["details"]; }

    void write(const std::filesystem::path& path);

private:
    static nlohmann::json file_entry(const std::filesystem::path& path);
    nlohmann::json doc_;
};

struct VerifyIssue {
    std::string path;
    std::string problem;
};

/// Recomputes every listed hash; paths are resolved relative to the manifest's directory
/// when they are not absolute.
std::vector<VerifyIssue> verify_manifest(const std::filesystem::path& manifest);

}  // namespace ldct::cli
