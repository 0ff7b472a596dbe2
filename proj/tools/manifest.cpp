#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "ldct/errors.hpp"

#ifndef LDCT_VERSION
#define LDCT_VERSION "unknown"
#endif

namespace ldct::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 unavailable");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

Manifest::Manifest(std::string command, const std::vector<std::string>& argv) {
    doc_["tool"] = "ldct";
    doc_["version"] = LDCT_VERSION;
    doc_["command"] = std::move(command);
    doc_["argv"] = argv;
    doc_["config"] = json::object();
    doc_["seeds"] = json::object();
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
    doc_["timings_s"] = json::object();
    doc_["details"] = json::object();
}

void Manifest::set_config(const KeyValueConfig& cfg) {
    json c = json::object();
    for (const auto& [key, entry] : cfg.entries()) c[key] = entry.value;
    doc_["config"] = c;
}

void Manifest::add_seed(const std::string& name, std::uint64_t seed) { doc_["seeds"][name] = seed; }

json Manifest::file_entry(const fs::path& path) {
    return json{{"path", path.string()}, {"sha256", sha256_file(path)}, {"bytes", fs::file_size(path)}};
}

void Manifest::add_input(const fs::path& path) { doc_["inputs"].push_back(file_entry(path)); }
void Manifest::add_output(const fs::path& path) { doc_["outputs"].push_back(file_entry(path)); }
void Manifest::add_timing(const std::string& name, double seconds) { doc_["timings_s"][name] = seconds; }

void Manifest::write(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << doc_.dump(2) << "\n";
    if (!out) throw IoError("failed writing manifest " + path.string());
}

std::vector<VerifyIssue> verify_manifest(const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot open manifest " + manifest.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(manifest.string() + ": not a valid manifest (" + e.what() + ")");
    }
    const fs::path base = manifest.parent_path();
    std::vector<VerifyIssue> issues;
    for (const char* section : {"inputs", "outputs"}) {
        if (!doc.contains(section)) {
            issues.push_back({manifest.string(), std::string("missing section '") + section + "'"});
            continue;
        }
        for (const auto& entry : doc[section]) {
            fs::path p = entry.at("path").get<std::string>();
            if (p.is_relative() && !fs::exists(p)) p = base / p;
            if (!fs::exists(p)) {
                issues.push_back({p.string(), "missing"});
                continue;
            }
            if (sha256_file(p) != entry.at("sha256").get<std::string>()) issues.push_back({p.string(), "hash mismatch"});
        }
    }
    return issues;
}

}  // namespace ldct::cli
