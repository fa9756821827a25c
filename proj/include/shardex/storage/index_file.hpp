#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "shardex/ir/index.hpp"

namespace shardex::storage {

// On-disk layout (all integers little-endian except where noted):
//
//   "SHDX"  u32 version  u32 sectionCount
//   sectionCount x { u32 tag, u64 offset, u64 length }
//   sections...
//   u64 FNV-1a checksum of every preceding byte
//
// Posting bytes live in the POST section and are read through 8 KiB pages;
// everything else is loaded and pinned at open.
inline constexpr char kMagic[4] = {'S', 'H', 'D', 'X'};
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kPageSize = 8192;

enum class SectionTag : std::uint32_t { meta = 1, docs = 2, dict = 3, skip = 4, post = 5 };

struct Section {
  SectionTag tag = SectionTag::meta;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
};

struct IndexFileSummary {
  std::uint64_t fileBytes = 0;
  std::uint64_t dictionaryEntries = 0;
  std::uint64_t pinnedBytes = 0;  // every section except POST
  std::uint64_t postingBytes = 0;
  std::uint64_t checksum = 0;
  std::vector<Section> sections;
};

std::vector<std::uint8_t> serialize_index(const ir::IrIndex& index);

// Writes serialize_index(index) to path. Throws IoError.
IndexFileSummary save_index(const ir::IrIndex& index, const std::filesystem::path& path);

// Parses and fully materializes a file image. Throws CorruptIndexError.
ir::IrIndex deserialize_index(std::span<const std::uint8_t> image);

// Reads the whole file into memory as an IrIndex.
ir::IrIndex load_index_full(const std::filesystem::path& path);

// Header, section table and checksum check only.
IndexFileSummary inspect_index(std::span<const std::uint8_t> image);

}  // namespace shardex::storage
