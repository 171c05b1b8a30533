#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "webcorpus/record.hpp"

namespace webcorpus {

using Json = nlohmann::ordered_json;

struct JsonOptions {
    bool pretty = false;        // indented objects instead of JSON lines
    bool base64_bytes = false;  // raw bytes instead of the length placeholder
};

// JSON view of a record: the "record" object carries the eight CDX
// metadata fields; next to it appear the marked derivation paths, each
// with its full ancestor chain. An unmarked ancestor serializes as a
// plain object; a marked node with marked descendants keeps its own value
// under the reserved "_" key. Byte fields serialize as a
// "bytes(length: N)" placeholder (or base64 on request), header maps as
// objects.
Json record_to_json(const EnrichedRecord& record, const JsonOptions& options = {});

std::string record_to_json_line(const EnrichedRecord& record, const JsonOptions& options = {});

// Write records as JSON lines (or pretty-printed when options.pretty).
// A ".gz" suffix gzips the output.
void save_corpus(const std::vector<EnrichedRecord>& records,
                 const std::filesystem::path& path, const JsonOptions& options = {});

}  // namespace webcorpus
