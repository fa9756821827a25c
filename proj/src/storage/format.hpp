#pragma once

// Section codecs shared by the full loader and the paged disk index.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shardex/bytes.hpp"
#include "shardex/ir/index.hpp"
#include "shardex/storage/index_file.hpp"

namespace shardex::storage::detail {

struct Meta {
  std::uint32_t skipInterval = 0;
  std::uint32_t pageSize = kPageSize;
  std::uint32_t docCount = 0;
  std::vector<std::string> embedSpec;
};

struct DictEntry {
  std::string token;
  std::uint64_t postOffset = 0;  // relative to the POST section
  std::uint64_t postLength = 0;
  std::uint32_t count = 0;
  std::uint64_t skipStart = 0;  // index into the skip array
  std::uint32_t skipCount = 0;
};

using Dictionaries = std::array<std::vector<DictEntry>, 3>;

inline constexpr std::size_t kSkipEntryBytes = 16;

void encode_posting(ByteWriter& w, const ir::Posting& p);
ir::Posting decode_posting(ByteReader& r, std::size_t embedCount);

Meta decode_meta(std::span<const std::uint8_t> bytes);
std::vector<ir::DocInfo> decode_docs(std::span<const std::uint8_t> bytes, std::uint32_t docCount);
Dictionaries decode_dict(std::span<const std::uint8_t> bytes);
std::vector<ir::SkipEntry> decode_skips(std::span<const std::uint8_t> bytes);

// Validated header: magic, version, section table within bounds, checksum.
struct Layout {
  IndexFileSummary summary;
  Section meta, docs, dict, skip, post;
};
Layout read_layout(std::span<const std::uint8_t> image);

// Layout from the header bytes of a file whose checksum has already been
// verified; fileSize bounds the section table.
Layout read_layout_header(std::span<const std::uint8_t> header, std::uint64_t fileSize);

// Checks dictionary ranges against the POST and skip arrays.
void validate_dictionaries(const Dictionaries& dicts, std::uint64_t postLength, std::size_t skipCount);

}  // namespace shardex::storage::detail
