#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tttbench {

std::string sha256_hex(std::string_view data);
/// Throws IoError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// Writes <out_dir>/manifest.json listing `artifacts` (paths relative to
/// out_dir) with byte sizes and SHA-256 digests. Entries already in an
/// existing manifest are kept unless re-listed. `command` records how the
/// artifacts were produced.
void write_manifest(const std::filesystem::path& out_dir, const std::vector<std::string>& artifacts,
                    const nlohmann::ordered_json& command);

}  // namespace tttbench
