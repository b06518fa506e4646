#include "rankbench/manifest.hpp"

#include <ctime>

#include <openssl/evp.h>

#include "rankbench/benchmark_io.hpp"
#include "rankbench/errors.hpp"

#ifndef RANKBENCH_VERSION
#define RANKBENCH_VERSION "0.0.0"
#endif

namespace rankbench {

std::string tool_version() { return RANKBENCH_VERSION; }

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

std::string iso8601_utc(std::chrono::system_clock::time_point t) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
    return {{"tool", "rankbench"},
            {"version", tool_version()},
            {"command", m.command},
            {"argv", m.argv},
            {"config", m.config},
            {"config_sha256", sha256_hex(m.config.dump())},
            {"seed", m.seed},
            {"started_at", iso8601_utc(m.started_at)},
            {"finished_at", iso8601_utc(m.finished_at)},
            {"outputs", m.outputs}};
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
    write_text(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

}  // namespace rankbench
