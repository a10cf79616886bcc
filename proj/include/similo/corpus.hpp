#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "similo/model.hpp"
#include "similo/von.hpp"

namespace similo {

// Corpus layout, one directory per application:
//
//   <corpus>/<app_id>/new_snapshot.jsonl   one node object per line
//   <corpus>/<app_id>/old_target.jsonl     per pair: a header line
//       {"pair_id": "...", "oracle_xpath": "...", "target_xpath": "..."}
//     followed by the old-version node objects for that target.
//
// Node objects use the prompt field names ("tag", "text", "class", "id",
// "name", "href", "alt", "is_button", "xpath", "id_xpath", "location",
// "area", "shape", "neighbor_text") plus "width", "height" and
// "document_index". "location" ("x,y"), "width", "height", "xpath" and
// "document_index" are required. "target_xpath" is the old-version xpath
// of the recorded node and defaults to "oracle_xpath".

struct TargetBlock {
  std::string pair_id;
  std::string oracle_xpath;
  std::string target_xpath;
  std::vector<PropertyRecord> nodes;
};

struct CorpusEntry {
  std::string app_id;
  std::string pair_id;
  TargetBlock source;
  TargetSpec target;  // VON-merged desired properties
  std::shared_ptr<const std::vector<PropertyRecord>> snapshot;
};

// Throws Error(kParseError) with "<file>:<line>:" context.
std::vector<PropertyRecord> load_snapshot(const std::filesystem::path& path);
std::vector<TargetBlock> load_targets(const std::filesystem::path& path);

// Throws Error(kParseError) or Error(kDuplicatePairId). Apps are read in
// directory-name order; pairs keep file order.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir,
                                     double threshold = kDefaultVonThreshold);

void write_snapshot(const std::filesystem::path& path, const std::vector<PropertyRecord>& records);
void write_targets(const std::filesystem::path& path, const std::vector<TargetBlock>& blocks);
void write_corpus(const std::filesystem::path& dir, const std::vector<CorpusEntry>& corpus);

// Single node object <-> one JSONL line.
PropertyRecord parse_record(std::string_view json_line);
std::string record_to_json(const PropertyRecord& record);

}  // namespace similo
