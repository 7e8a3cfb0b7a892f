#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "xrel/dfg.hpp"

namespace xrel {

using Json = nlohmann::ordered_json;

Json dfg_to_json(const Dfg& dfg);
/// Throws InputError when the document does not follow the DFG schema.
Dfg dfg_from_json(const Json& doc);

Json plan_to_json(const TruncationPlan& plan);
TruncationPlan plan_from_json(const Json& doc);

/// FNV-1a over the canonical JSON serialization.
std::uint64_t dfg_hash(const Dfg& dfg);

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed. Throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Missing/unreadable files and malformed JSON both raise InputError.
Dfg load_dfg(const std::filesystem::path& path);
void save_dfg(const std::filesystem::path& path, const Dfg& dfg);
TruncationPlan load_plan(const std::filesystem::path& path);
void save_plan(const std::filesystem::path& path, const TruncationPlan& plan);

}  // namespace xrel
