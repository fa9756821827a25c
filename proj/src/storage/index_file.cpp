#include "shardex/storage/index_file.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "format.hpp"
#include "shardex/error.hpp"

namespace shardex::storage {

namespace detail {

void encode_posting(ByteWriter& w, const ir::Posting& p) {
  w.u32(p.docId.value);
  w.u32(static_cast<std::uint32_t>(p.offsets.size()));
  for (auto o : p.offsets) w.u32(o);
  for (auto v : p.embedded) w.i64(v);
}

ir::Posting decode_posting(ByteReader& r, std::size_t embedCount) {
  ir::Posting p;
  p.docId = ir::DocId{r.u32()};
  auto n = r.u32();
  if (n > r.remaining() / 4) throw CorruptIndexError("posting offset count out of range");
  p.offsets.resize(n);
  for (auto& o : p.offsets) o = r.u32();
  p.embedded.resize(embedCount);
  for (auto& v : p.embedded) v = r.i64();
  return p;
}

Meta decode_meta(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Meta m;
  m.skipInterval = r.u32();
  m.pageSize = r.u32();
  m.docCount = r.u32();
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) m.embedSpec.push_back(r.str());
  if (m.skipInterval < 2) throw CorruptIndexError("skip interval < 2");
  if (m.pageSize != kPageSize) throw CorruptIndexError("unsupported page size " + std::to_string(m.pageSize));
  return m;
}

std::vector<ir::DocInfo> decode_docs(std::span<const std::uint8_t> bytes, std::uint32_t docCount) {
  ByteReader r(bytes);
  std::vector<ir::DocInfo> docs;
  docs.reserve(docCount);
  for (std::uint32_t i = 0; i < docCount; ++i) {
    ir::DocInfo d;
    d.docKey = r.str();
    d.url = r.str();
    d.rank = r.f64();
    d.siteId = r.i64();
    d.domainId = r.i64();
    docs.push_back(std::move(d));
  }
  if (!r.done()) throw CorruptIndexError("trailing bytes in DOCS section");
  return docs;
}

Dictionaries decode_dict(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Dictionaries dicts;
  auto fields = r.u32();
  if (fields != dicts.size()) throw CorruptIndexError("unexpected dictionary count");
  for (std::uint32_t f = 0; f < fields; ++f) {
    auto tag = r.u8();
    if (tag != f) throw CorruptIndexError("dictionaries out of order");
    auto n = r.u32();
    auto& dict = dicts[f];
    dict.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      DictEntry e;
      e.token = r.str();
      e.postOffset = r.u64();
      e.postLength = r.u64();
      e.count = r.u32();
      e.skipStart = r.u64();
      e.skipCount = r.u32();
      dict.push_back(std::move(e));
    }
  }
  if (!r.done()) throw CorruptIndexError("trailing bytes in DICT section");
  return dicts;
}

std::vector<ir::SkipEntry> decode_skips(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % kSkipEntryBytes != 0) throw CorruptIndexError("SKIP section length not a multiple of 16");
  ByteReader r(bytes);
  std::vector<ir::SkipEntry> skips(bytes.size() / kSkipEntryBytes);
  for (auto& s : skips) {
    s.docId = ir::DocId{r.u32()};
    s.ordinal = r.u32();
    s.byteOffset = r.u64();
  }
  return skips;
}

Layout read_layout_header(std::span<const std::uint8_t> header, std::uint64_t fileSize) {
  ByteReader r(header);
  auto magic = r.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw CorruptIndexError("bad magic");
  auto version = r.u32();
  if (version != kFormatVersion) throw CorruptIndexError("unsupported format version " + std::to_string(version));
  auto n = r.u32();
  if (n != 5) throw CorruptIndexError("unexpected section count " + std::to_string(n));

  Layout layout;
  layout.summary.fileBytes = fileSize;
  const std::uint64_t bodyEnd = fileSize - 8;
  for (std::uint32_t i = 0; i < n; ++i) {
    Section s;
    s.tag = static_cast<SectionTag>(r.u32());
    s.offset = r.u64();
    s.length = r.u64();
    if (s.offset > bodyEnd || s.length > bodyEnd - s.offset) throw CorruptIndexError("section outside file");
    layout.summary.sections.push_back(s);
    switch (s.tag) {
      case SectionTag::meta: layout.meta = s; break;
      case SectionTag::docs: layout.docs = s; break;
      case SectionTag::dict: layout.dict = s; break;
      case SectionTag::skip: layout.skip = s; break;
      case SectionTag::post: layout.post = s; break;
      default: throw CorruptIndexError("unknown section tag");
    }
  }
  layout.summary.postingBytes = layout.post.length;
  layout.summary.pinnedBytes = layout.meta.length + layout.docs.length + layout.dict.length + layout.skip.length;
  return layout;
}

Layout read_layout(std::span<const std::uint8_t> image) {
  if (image.size() < 12 + 8) throw CorruptIndexError("file too short");
  const std::size_t bodyEnd = image.size() - 8;
  ByteReader tail(image.subspan(bodyEnd));
  auto stored = tail.u64();
  auto actual = fnv1a64(image.first(bodyEnd));
  if (stored != actual) throw CorruptIndexError("checksum mismatch");
  try {
    auto layout = read_layout_header(image.first(bodyEnd), image.size());
    layout.summary.checksum = stored;
    return layout;
  } catch (const DecodeError&) {
    throw CorruptIndexError("truncated header");
  }
}

void validate_dictionaries(const Dictionaries& dicts, std::uint64_t postLength, std::size_t skipCount) {
  for (const auto& dict : dicts) {
    for (const auto& e : dict) {
      if (e.postOffset > postLength || e.postLength > postLength - e.postOffset) {
        throw CorruptIndexError("posting range of '" + e.token + "' outside POST section");
      }
      if (e.skipStart > skipCount || e.skipCount > skipCount - e.skipStart) {
        throw CorruptIndexError("skip range of '" + e.token + "' outside SKIP section");
      }
      if (e.count > 0 && e.skipCount == 0) throw CorruptIndexError("non-empty list without sub-index");
    }
  }
}

}  // namespace detail

std::vector<std::uint8_t> serialize_index(const ir::IrIndex& index) {
  ByteWriter meta;
  meta.u32(index.skip_interval());
  meta.u32(kPageSize);
  meta.u32(static_cast<std::uint32_t>(index.doc_count()));
  meta.u32(static_cast<std::uint32_t>(index.embed_spec().size()));
  for (const auto& name : index.embed_spec()) meta.str(name);

  ByteWriter docs;
  for (const auto& d : index.docs()) {
    docs.str(d.docKey);
    docs.str(d.url);
    docs.f64(d.rank);
    docs.i64(d.siteId);
    docs.i64(d.domainId);
  }

  ByteWriter dict, skip, post;
  dict.u32(3);
  std::uint64_t skipCount = 0;
  for (auto field : ir::kAllFields) {
    const auto& entries = index.dictionary(field);
    dict.u8(static_cast<std::uint8_t>(field));
    dict.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& [token, list] : entries) {
      const std::uint64_t start = post.size();
      for (const auto& p : list.postings) detail::encode_posting(post, p);
      for (const auto& s : list.skips) {
        skip.u32(s.docId.value);
        skip.u32(s.ordinal);
        skip.u64(s.byteOffset);
      }
      dict.str(token);
      dict.u64(start);
      dict.u64(post.size() - start);
      dict.u32(list.count());
      dict.u64(skipCount);
      dict.u32(static_cast<std::uint32_t>(list.skips.size()));
      skipCount += list.skips.size();
    }
  }

  const std::pair<SectionTag, const ByteWriter*> parts[] = {
      {SectionTag::meta, &meta}, {SectionTag::docs, &docs}, {SectionTag::dict, &dict},
      {SectionTag::skip, &skip}, {SectionTag::post, &post},
  };
  ByteWriter out;
  out.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  out.u32(kFormatVersion);
  out.u32(5);
  std::uint64_t offset = 12 + 5 * 20;
  for (const auto& [tag, w] : parts) {
    out.u32(static_cast<std::uint32_t>(tag));
    out.u64(offset);
    out.u64(w->size());
    offset += w->size();
  }
  for (const auto& [tag, w] : parts) out.bytes(w->view());
  out.u64(fnv1a64(out.view()));
  return out.take();
}

IndexFileSummary inspect_index(std::span<const std::uint8_t> image) {
  auto layout = detail::read_layout(image);
  auto dicts = detail::decode_dict(image.subspan(layout.dict.offset, layout.dict.length));
  for (const auto& d : dicts) layout.summary.dictionaryEntries += d.size();
  return layout.summary;
}

IndexFileSummary save_index(const ir::IrIndex& index, const std::filesystem::path& path) {
  auto image = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(image.data()), static_cast<std::streamsize>(image.size()));
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
  return inspect_index(image);
}

ir::IrIndex deserialize_index(std::span<const std::uint8_t> image) {
  auto layout = detail::read_layout(image);
  auto section = [&](const Section& s) { return image.subspan(s.offset, s.length); };
  try {
    auto meta = detail::decode_meta(section(layout.meta));
    auto docs = detail::decode_docs(section(layout.docs), meta.docCount);
    auto dicts = detail::decode_dict(section(layout.dict));
    auto skips = detail::decode_skips(section(layout.skip));
    detail::validate_dictionaries(dicts, layout.post.length, skips.size());
    auto post = section(layout.post);

    std::array<std::map<std::string, ir::PostingList, std::less<>>, 3> lists;
    for (std::size_t f = 0; f < dicts.size(); ++f) {
      for (const auto& e : dicts[f]) {
        ir::PostingList list;
        list.keyword = e.token;
        ByteReader r(post.subspan(e.postOffset, e.postLength));
        list.postings.reserve(e.count);
        for (std::uint32_t i = 0; i < e.count; ++i) {
          list.postings.push_back(detail::decode_posting(r, meta.embedSpec.size()));
          if (list.postings.back().docId.value >= meta.docCount) throw CorruptIndexError("docId out of range");
        }
        if (!r.done()) throw CorruptIndexError("posting list '" + e.token + "' has trailing bytes");
        list.skips.assign(skips.begin() + static_cast<std::ptrdiff_t>(e.skipStart),
                          skips.begin() + static_cast<std::ptrdiff_t>(e.skipStart + e.skipCount));
        lists[f].emplace(e.token, std::move(list));
      }
    }
    return ir::IrIndex::from_parts(std::move(docs), std::move(meta.embedSpec), meta.skipInterval, std::move(lists));
  } catch (const DecodeError& e) {
    throw CorruptIndexError(std::string("truncated section: ") + e.what());
  }
}

ir::IrIndex load_index_full(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::vector<std::uint8_t> image((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_index(image);
}

}  // namespace shardex::storage
