#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace rulehound {

// Insertion-ordered JSON everywhere: serialized records must be byte-stable
// across runs.
using Json = nlohmann::ordered_json;

namespace jsonl {

std::vector<Json> read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, const std::vector<Json>& records);

void append_record(const std::filesystem::path& path, const Json& record);

} // namespace jsonl

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace rulehound
