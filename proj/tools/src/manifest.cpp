#include "manifest.hpp"

#include "heintze/error.hpp"
#include "heintze/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <memory>

namespace heintze::cli {

using nlohmann::ordered_json;

std::string RunManifest::to_json() const {
    ordered_json j;
    j["command"] = command;
    j["argv"] = argv;
    j["flags"] = flags;
    j["seed"] = seed;
    j["version"] = version;
    j["inputs"] = input_digests;
    j["timestamp"] = timestamp;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    try {
        const auto j = ordered_json::parse(text);
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        if (j.contains("flags")) m.flags = j["flags"].get<std::map<std::string, std::string>>();
        if (j.contains("seed")) m.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("version")) m.version = j["version"].get<std::string>();
        if (j.contains("inputs")) m.input_digests = j["inputs"].get<std::map<std::string, std::string>>();
        if (j.contains("timestamp")) m.timestamp = j["timestamp"].get<std::string>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
}

std::string sha256_hex(const std::string& bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw Error(ErrorKind::usage, "sha256 failed");
    std::string hex;
    hex.reserve(2 * len);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& report) {
    auto p = report;
    p.replace_extension(".manifest.json");
    return p;
}

}  // namespace heintze::cli
