#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace heintze::cli {

/// Provenance record written next to every report.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;  // arguments after the program name
    std::map<std::string, std::string> flags;
    std::uint64_t seed = 0;
    std::string version;
    std::map<std::string, std::string> input_digests;  // path -> sha256 hex
    std::string timestamp;                               // UTC, ISO 8601

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();

/// report.csv -> report.manifest.json
std::filesystem::path manifest_path_for(const std::filesystem::path& report);

}  // namespace heintze::cli
