#include "xrel/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "xrel/errors.hpp"

namespace xrel {

Json dfg_to_json(const Dfg& dfg) {
  Json nodes = Json::array();
  for (const DfgNode& n : dfg.nodes) {
    Json j;
    j["id"] = n.id;
    j["kind"] = std::string(kind_name(n.kind));
    j["width"] = n.width;
    j["operands"] = n.operands;
    if (n.const_value) j["const_value"] = *n.const_value;
    nodes.push_back(std::move(j));
  }
  Json doc;
  doc["name"] = dfg.name;
  doc["nodes"] = std::move(nodes);
  return doc;
}

Dfg dfg_from_json(const Json& doc) {
  try {
    Dfg dfg;
    dfg.name = doc.at("name").get<std::string>();
    for (const Json& j : doc.at("nodes")) {
      DfgNode n;
      n.id = j.at("id").get<std::string>();
      const auto kind_text = j.at("kind").get<std::string>();
      auto kind = parse_kind(kind_text);
      if (!kind) throw InputError(fmt::format("node '{}': unknown kind '{}'", n.id, kind_text));
      n.kind = *kind;
      n.width = j.at("width").get<int>();
      n.operands = j.value("operands", std::vector<std::string>{});
      if (j.contains("const_value") && !j["const_value"].is_null())
        n.const_value = j["const_value"].get<std::int64_t>();
      dfg.nodes.push_back(std::move(n));
    }
    return dfg;
  } catch (const Json::exception& e) {
    throw InputError(fmt::format("malformed DFG document: {}", e.what()));
  }
}

Json plan_to_json(const TruncationPlan& plan) {
  Json assignments = Json::object();
  for (const auto& [id, j] : plan.assignments) assignments[id] = j;
  Json doc;
  doc["dfg"] = plan.dfg;
  doc["k"] = plan.k;
  doc["assignments"] = std::move(assignments);
  doc["predicted_v"] = plan.predicted_v;
  doc["cost"] = plan.cost;
  return doc;
}

TruncationPlan plan_from_json(const Json& doc) {
  try {
    TruncationPlan plan;
    plan.dfg = doc.at("dfg").get<std::string>();
    plan.k = doc.at("k").get<int>();
    for (const auto& [id, j] : doc.at("assignments").items()) plan.assignments[id] = j.get<int>();
    plan.predicted_v = doc.at("predicted_v").get<double>();
    plan.cost = doc.at("cost").get<double>();
    return plan;
  } catch (const Json::exception& e) {
    throw InputError(fmt::format("malformed plan document: {}", e.what()));
  }
}

std::uint64_t dfg_hash(const Dfg& dfg) {
  const std::string text = dfg_to_json(dfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

namespace {

Json parse_json_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw InputError(e.what());
  }
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

}  // namespace

Dfg load_dfg(const std::filesystem::path& path) { return dfg_from_json(parse_json_file(path)); }

void save_dfg(const std::filesystem::path& path, const Dfg& dfg) {
  write_text_file(path, dfg_to_json(dfg).dump(2) + "\n");
}

TruncationPlan load_plan(const std::filesystem::path& path) {
  return plan_from_json(parse_json_file(path));
}

void save_plan(const std::filesystem::path& path, const TruncationPlan& plan) {
  write_text_file(path, plan_to_json(plan).dump(2) + "\n");
}

}  // namespace xrel
