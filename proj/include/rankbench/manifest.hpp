#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace rankbench {

std::string tool_version();

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

std::string iso8601_utc(std::chrono::system_clock::time_point t);

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json config;  // fully resolved, secrets excluded
    unsigned long long seed = 0;
    std::chrono::system_clock::time_point started_at;
    std::chrono::system_clock::time_point finished_at;
    std::vector<std::string> outputs;
};

/// config_sha256 hashes the compact dump of `config`, which nlohmann keeps
/// key-sorted, so equal configs hash equally.
nlohmann::json manifest_to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace rankbench
