#include "similo/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "similo/error.hpp"

namespace similo {

namespace {

using json = nlohmann::json;

std::string field_string(const json& value, std::string_view field) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  if (value.is_number()) return value.dump();
  throw Error(ErrorCode::kParseError, "field \"" + std::string(field) + "\" must be a string");
}

std::int64_t field_int(const json& object, std::string_view field) {
  const auto it = object.find(field);
  if (it == object.end()) {
    throw Error(ErrorCode::kParseError, "missing field \"" + std::string(field) + "\"");
  }
  if (!it->is_number_integer()) {
    throw Error(ErrorCode::kParseError, "field \"" + std::string(field) + "\" must be an integer");
  }
  return it->get<std::int64_t>();
}

PropertyRecord record_from_json(const json& object) {
  if (!object.is_object()) throw Error(ErrorCode::kParseError, "node must be a JSON object");
  PropertyRecord record;
  const auto index = field_int(object, "document_index");
  if (index < 0) throw Error(ErrorCode::kParseError, "field \"document_index\" must be >= 0");
  record.document_index = static_cast<std::size_t>(index);
  const auto width = field_int(object, "width");
  const auto height = field_int(object, "height");

  for (const auto& [field, value] : object.items()) {
    if (field == "document_index" || field == "width" || field == "height") continue;
    const auto key = property_from_name(field);
    if (!key) throw Error(ErrorCode::kParseError, "unknown field \"" + field + "\"");
    record.set(*key, field_string(value, field));
  }
  const auto* location = record.get(PropertyKey::kLocation);
  if (location == nullptr) throw Error(ErrorCode::kParseError, "missing field \"location\"");
  if (record.get(PropertyKey::kXPath) == nullptr) {
    throw Error(ErrorCode::kParseError, "missing field \"xpath\"");
  }
  const auto comma = location->find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument("no comma");
    std::size_t used = 0;
    const std::string xs = location->substr(0, comma);
    const std::string ys = location->substr(comma + 1);
    const long long x = std::stoll(xs, &used);
    if (used != xs.size()) throw std::invalid_argument("x");
    const long long y = std::stoll(ys, &used);
    if (used != ys.size()) throw std::invalid_argument("y");
    record.rect = make_rect(x, y, width, height);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kParseError, "field \"location\" must be \"x,y\" integers");
  }
  try {
    normalize_record(record);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, e.detail());
  }
  return record;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot read " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      fn(line);
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(number) + ": " + e.detail());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError,
                  path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void check_unique_indices(const std::vector<PropertyRecord>& records, const std::string& where) {
  std::set<std::size_t> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.document_index).second) {
      throw Error(ErrorCode::kParseError, where + ": duplicate document_index " +
                                              std::to_string(r.document_index));
    }
  }
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw Error(ErrorCode::kParseError, "cannot write " + path.string());
}

}  // namespace

PropertyRecord parse_record(std::string_view json_line) {
  json object;
  try {
    object = json::parse(json_line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  return record_from_json(object);
}

std::string record_to_json(const PropertyRecord& record) {
  json object = json::object();
  object["document_index"] = record.document_index;
  for (const auto& [key, value] : record.values) object[std::string(property_name(key))] = value;
  object["width"] = record.rect.width;
  object["height"] = record.rect.height;
  return object.dump();
}

std::vector<PropertyRecord> load_snapshot(const std::filesystem::path& path) {
  std::vector<PropertyRecord> records;
  for_each_line(path, [&](const std::string& line) { records.push_back(parse_record(line)); });
  check_unique_indices(records, path.string());
  return records;
}

std::vector<TargetBlock> load_targets(const std::filesystem::path& path) {
  std::vector<TargetBlock> blocks;
  for_each_line(path, [&](const std::string& line) {
    const auto object = json::parse(line);
    if (object.is_object() && object.contains("pair_id")) {
      TargetBlock block;
      block.pair_id = field_string(object.at("pair_id"), "pair_id");
      if (!object.contains("oracle_xpath")) {
        throw Error(ErrorCode::kParseError, "missing field \"oracle_xpath\" in pair header");
      }
      block.oracle_xpath = field_string(object.at("oracle_xpath"), "oracle_xpath");
      if (block.oracle_xpath.empty() || block.oracle_xpath.front() != '/') {
        throw Error(ErrorCode::kParseError, "field \"oracle_xpath\" must start with '/'");
      }
      block.target_xpath = object.contains("target_xpath")
                               ? field_string(object.at("target_xpath"), "target_xpath")
                               : block.oracle_xpath;
      for (const auto& [field, value] : object.items()) {
        if (field != "pair_id" && field != "oracle_xpath" && field != "target_xpath") {
          throw Error(ErrorCode::kParseError, "unknown header field \"" + field + "\"");
        }
      }
      blocks.push_back(std::move(block));
      return;
    }
    if (blocks.empty()) {
      throw Error(ErrorCode::kParseError, "node before the first pair header");
    }
    blocks.back().nodes.push_back(record_from_json(object));
  });
  for (const auto& b : blocks) {
    if (b.nodes.empty()) {
      throw Error(ErrorCode::kParseError, path.string() + ": pair " + b.pair_id + " has no nodes");
    }
    check_unique_indices(b.nodes, path.string() + " pair " + b.pair_id);
  }
  return blocks;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir, double threshold) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kParseError, dir.string() + " is not a corpus directory");
  }
  std::vector<std::filesystem::path> apps;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_directory()) apps.push_back(e.path());
  }
  std::sort(apps.begin(), apps.end());

  std::vector<CorpusEntry> corpus;
  std::set<std::string> pair_ids;
  for (const auto& app : apps) {
    const auto targets_path = app / "old_target.jsonl";
    if (!std::filesystem::exists(targets_path)) continue;
    auto blocks = load_targets(targets_path);
    if (blocks.empty()) continue;
    auto snapshot = std::make_shared<const std::vector<PropertyRecord>>(
        load_snapshot(app / "new_snapshot.jsonl"));
    if (snapshot->empty()) {
      throw Error(ErrorCode::kParseError, (app / "new_snapshot.jsonl").string() + " is empty");
    }
    for (auto& block : blocks) {
      if (!pair_ids.insert(block.pair_id).second) {
        throw Error(ErrorCode::kDuplicatePairId, "pair_id \"" + block.pair_id + "\" in " +
                                                     targets_path.string());
      }
      CorpusEntry entry;
      entry.app_id = app.filename().string();
      entry.pair_id = block.pair_id;
      try {
        entry.target =
            apply_von_to_target(block.nodes, block.target_xpath, block.oracle_xpath, threshold);
      } catch (const Error& e) {
        throw Error(ErrorCode::kParseError,
                    targets_path.string() + ": pair " + block.pair_id + ": " + e.what());
      }
      entry.source = std::move(block);
      entry.snapshot = snapshot;
      corpus.push_back(std::move(entry));
    }
  }
  return corpus;
}

void write_snapshot(const std::filesystem::path& path, const std::vector<PropertyRecord>& records) {
  std::vector<std::string> lines;
  for (const auto& r : records) lines.push_back(record_to_json(r));
  write_lines(path, lines);
}

void write_targets(const std::filesystem::path& path, const std::vector<TargetBlock>& blocks) {
  std::vector<std::string> lines;
  for (const auto& b : blocks) {
    json header = {{"pair_id", b.pair_id}, {"oracle_xpath", b.oracle_xpath}};
    if (b.target_xpath != b.oracle_xpath) header["target_xpath"] = b.target_xpath;
    lines.push_back(header.dump());
    for (const auto& r : b.nodes) lines.push_back(record_to_json(r));
  }
  write_lines(path, lines);
}

void write_corpus(const std::filesystem::path& dir, const std::vector<CorpusEntry>& corpus) {
  std::map<std::string, std::vector<const CorpusEntry*>> by_app;
  for (const auto& e : corpus) by_app[e.app_id].push_back(&e);
  for (const auto& [app, entries] : by_app) {
    const auto app_dir = dir / app;
    std::filesystem::create_directories(app_dir);
    write_snapshot(app_dir / "new_snapshot.jsonl", *entries.front()->snapshot);
    std::vector<TargetBlock> blocks;
    for (const auto* e : entries) blocks.push_back(e->source);
    write_targets(app_dir / "old_target.jsonl", blocks);
  }
}

}  // namespace similo
