#include "attnseek/bundle.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

#include "attnseek/errors.hpp"

namespace attnseek {

namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'S', 'A', 'M', 'B'};
constexpr std::size_t kFileHeaderBytes = 8;
constexpr std::size_t kSegmentHeaderBytes = 12;
constexpr std::string_view kManifestFormat = "samb-manifest";

// Read-only mapping of a whole file; falls back to an owned buffer when the
// file is empty or the mapping fails.
class MappedFile {
 public:
  explicit MappedFile(const std::filesystem::path& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw io_error(fmt::format("cannot open tensor file {}", path.string()));
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
      ::close(fd);
      throw io_error(fmt::format("cannot stat tensor file {}", path.string()));
    }
    size_ = static_cast<std::size_t>(st.st_size);
    if (size_ > 0) {
      void* p = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
      if (p != MAP_FAILED) {
        mapping_ = p;
        data_ = static_cast<const unsigned char*>(p);
      }
    }
    if (!mapping_ && size_ > 0) {
      fallback_.resize(size_);
      std::size_t done = 0;
      while (done < size_) {
        ssize_t got = ::read(fd, fallback_.data() + done, size_ - done);
        if (got <= 0) {
          ::close(fd);
          throw io_error(fmt::format("short read on tensor file {}", path.string()));
        }
        done += static_cast<std::size_t>(got);
      }
      data_ = fallback_.data();
    }
    ::close(fd);
  }
  ~MappedFile() {
    if (mapping_) ::munmap(mapping_, size_);
  }
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;

  const unsigned char* data() const { return data_; }
  std::size_t size() const { return size_; }

 private:
  void* mapping_ = nullptr;
  const unsigned char* data_ = nullptr;
  std::size_t size_ = 0;
  std::vector<unsigned char> fallback_;
};

std::uint16_t load_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u16(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(bytes, 2);
}

void store_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

void store_floats(std::ostream& out, std::span<const float> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (float v : values) store_u32(out, std::bit_cast<std::uint32_t>(v));
  }
}

void validate_maps(const SegmentTensor& seg, std::size_t s) {
  const std::size_t n = seg.n();
  for (std::size_t l = 0; l < seg.layers(); ++l) {
    for (std::size_t h = 0; h < seg.heads(); ++h) {
      SamView map = seg.map(l, h);
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (float v : map.row(i)) {
          if (!(v >= 0.0f && v <= 1.0f)) {
            throw validation_error(fmt::format(
                "entry {} outside [0, 1] at segment {}, layer {}, head {}, row {}", v, s, l, h, i));
          }
          sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
          throw validation_error(fmt::format(
              "row sum {:.6f} outside 1 +/- {} at segment {}, layer {}, head {}, row {}", sum,
              kRowSumTolerance, s, l, h, i));
        }
      }
    }
  }
}

void validate_text(const SegmentText& text, std::size_t n, std::size_t s) {
  if (text.tokens.size() != n) {
    throw validation_error(
        fmt::format("segment {}: {} tokens but tensor has n = {}", s, text.tokens.size(), n));
  }
  if (text.word_index.size() != n) {
    throw validation_error(fmt::format("segment {}: word_index length {} but tensor has n = {}", s,
                                       text.word_index.size(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (text.word_index[i] && *text.word_index[i] >= text.words.size()) {
      throw validation_error(fmt::format("segment {}: token {} maps to word {} but only {} words",
                                         s, i, *text.word_index[i], text.words.size()));
    }
  }
  for (const auto& span : text.candidate_spans) {
    if (span.first_word > span.last_word || span.last_word >= text.words.size()) {
      throw validation_error(fmt::format("segment {}: candidate span [{}, {}] outside {} words", s,
                                         span.first_word, span.last_word, text.words.size()));
    }
  }
}

json manifest_to_json(const AttentionBundle& bundle, const TokenizedDocument& doc) {
  json segments = json::array();
  for (std::size_t s = 0; s < bundle.segments.size(); ++s) {
    const auto& text = doc.segments[s];
    json word_index = json::array();
    for (const auto& w : text.word_index) {
      word_index.push_back(w ? json(*w) : json(nullptr));
    }
    json words = json::array();
    for (const auto& w : text.words) words.push_back({{"surface", w.surface}, {"pos", w.pos}});
    json spans = json::array();
    for (const auto& sp : text.candidate_spans) spans.push_back({sp.first_word, sp.last_word});
    segments.push_back({{"role", to_string(bundle.segments[s].role())},
                        {"n", bundle.segments[s].n()},
                        {"tokens", text.tokens},
                        {"word_index", std::move(word_index)},
                        {"words", std::move(words)},
                        {"candidate_spans", std::move(spans)}});
  }
  return {{"format", kManifestFormat},
          {"version", kSambVersion},
          {"doc_id", bundle.doc_id},
          {"model_meta",
           {{"model_name", bundle.model.model_name},
            {"num_layers", bundle.model.num_layers},
            {"num_heads", bundle.model.num_heads},
            {"pos_tagger", bundle.model.pos_tagger}}},
          {"segments", std::move(segments)}};
}

struct ManifestSegment {
  SegmentRole role;
  std::uint32_t n;
  SegmentText text;
};

struct Manifest {
  std::string doc_id;
  ModelMeta model;
  std::vector<ManifestSegment> segments;
};

Manifest manifest_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kManifestFormat) {
    throw format_error("manifest: missing or unknown \"format\" field");
  }
  if (!j.contains("version") || !j["version"].is_number_unsigned() ||
      j["version"].get<std::uint32_t>() != kSambVersion) {
    throw format_error("manifest: unsupported version");
  }
  Manifest m;
  m.doc_id = j.at("doc_id").get<std::string>();
  const json& meta = j.at("model_meta");
  m.model.model_name = meta.at("model_name").get<std::string>();
  m.model.num_layers = meta.at("num_layers").get<std::uint32_t>();
  m.model.num_heads = meta.at("num_heads").get<std::uint32_t>();
  m.model.pos_tagger = meta.value("pos_tagger", "");
  for (const json& js : j.at("segments")) {
    ManifestSegment seg;
    auto role = parse_segment_role(js.at("role").get<std::string>());
    if (!role) throw format_error("manifest: unknown segment role " + js.at("role").dump());
    seg.role = *role;
    seg.n = js.at("n").get<std::uint32_t>();
    seg.text.tokens = js.at("tokens").get<std::vector<std::string>>();
    for (const json& w : js.at("word_index")) {
      if (w.is_null()) {
        seg.text.word_index.emplace_back(std::nullopt);
      } else {
        seg.text.word_index.emplace_back(w.get<std::size_t>());
      }
    }
    for (const json& w : js.at("words")) {
      seg.text.words.push_back({w.at("surface").get<std::string>(), w.at("pos").get<std::string>()});
    }
    for (const json& sp : js.value("candidate_spans", json::array())) {
      if (!sp.is_array() || sp.size() != 2) throw format_error("manifest: candidate span must be [first, last]");
      seg.text.candidate_spans.push_back({sp[0].get<std::size_t>(), sp[1].get<std::size_t>()});
    }
    m.segments.push_back(std::move(seg));
  }
  return m;
}

}  // namespace

std::string_view to_string(SegmentRole role) {
  switch (role) {
    case SegmentRole::whole: return "whole";
    case SegmentRole::abstract: return "abstract";
    case SegmentRole::body: return "body";
  }
  return "whole";
}

std::optional<SegmentRole> parse_segment_role(std::string_view text) {
  if (text == "whole") return SegmentRole::whole;
  if (text == "abstract") return SegmentRole::abstract;
  if (text == "body") return SegmentRole::body;
  return std::nullopt;
}

SegmentTensor::SegmentTensor(SegmentRole role, std::uint32_t layers, std::uint32_t heads,
                             std::uint32_t n, std::vector<float> values)
    : role_(role), layers_(layers), heads_(heads), n_(n) {
  if (values.size() != layers_ * heads_ * n_ * n_) {
    throw dimension_error(fmt::format("segment tensor expects {} values, got {}",
                                      layers_ * heads_ * n_ * n_, values.size()));
  }
  auto owned = std::make_shared<const std::vector<float>>(std::move(values));
  data_ = owned->data();
  owner_ = std::move(owned);
}

SegmentTensor::SegmentTensor(SegmentRole role, std::uint32_t layers, std::uint32_t heads,
                             std::uint32_t n, std::shared_ptr<const void> owner, const float* data)
    : role_(role), layers_(layers), heads_(heads), n_(n), owner_(std::move(owner)), data_(data) {}

void validate(const AttentionBundle& bundle, const TokenizedDocument& document) {
  const auto& meta = bundle.model;
  if (meta.num_layers < 1 || meta.num_heads < 1) {
    throw validation_error(fmt::format("model_meta needs L >= 1 and H >= 1, got L = {}, H = {}",
                                       meta.num_layers, meta.num_heads));
  }
  if (bundle.segments.empty()) throw validation_error("bundle has no segments");
  if (document.segments.size() != bundle.segments.size()) {
    throw validation_error(fmt::format("{} tensor segments but {} text segments",
                                       bundle.segments.size(), document.segments.size()));
  }
  const SegmentRole first = bundle.segments.front().role();
  if (first == SegmentRole::whole) {
    if (bundle.segments.size() != 1) {
      throw validation_error("a short-document bundle must contain exactly one 'whole' segment");
    }
  } else if (first == SegmentRole::abstract) {
    for (std::size_t s = 1; s < bundle.segments.size(); ++s) {
      if (bundle.segments[s].role() != SegmentRole::body) {
        throw validation_error(fmt::format("segment {} of a long document must have role 'body'", s));
      }
    }
  } else {
    throw validation_error("segment 0 must have role 'whole' or 'abstract'");
  }
  for (std::size_t s = 0; s < bundle.segments.size(); ++s) {
    const auto& seg = bundle.segments[s];
    if (seg.layers() != meta.num_layers || seg.heads() != meta.num_heads) {
      throw validation_error(fmt::format("segment {} has {}x{} maps, model_meta says {}x{}", s,
                                         seg.layers(), seg.heads(), meta.num_layers, meta.num_heads));
    }
    if (seg.n() == 0) throw validation_error(fmt::format("segment {} has no tokens", s));
    validate_text(document.segments[s], seg.n(), s);
    validate_maps(seg, s);
  }
}

std::filesystem::path tensor_path_for(const std::filesystem::path& manifest_path) {
  auto p = manifest_path;
  p.replace_extension(kTensorExtension);
  return p;
}

LoadedBundle read_bundle(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw io_error(fmt::format("cannot open manifest {}", manifest_path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw format_error(fmt::format("manifest {}: {}", manifest_path.string(), e.what()));
  }
  Manifest manifest;
  try {
    manifest = manifest_from_json(j);
  } catch (const json::exception& e) {
    throw format_error(fmt::format("manifest {}: {}", manifest_path.string(), e.what()));
  }

  auto file = std::make_shared<const MappedFile>(tensor_path_for(manifest_path));
  const unsigned char* bytes = file->data();
  const std::size_t size = file->size();
  if (size < kFileHeaderBytes || std::memcmp(bytes, kMagic, 4) != 0) {
    throw format_error("tensor file: bad magic");
  }
  if (load_u16(bytes + 4) != kSambVersion) {
    throw format_error(fmt::format("tensor file: unsupported version {}", load_u16(bytes + 4)));
  }
  if (load_u16(bytes + 6) != 0) throw format_error("tensor file: unknown flags");

  LoadedBundle out;
  out.bundle.doc_id = manifest.doc_id;
  out.bundle.model = manifest.model;
  std::size_t offset = kFileHeaderBytes;
  for (std::size_t s = 0; s < manifest.segments.size(); ++s) {
    const auto& ms = manifest.segments[s];
    if (size - offset < kSegmentHeaderBytes) {
      throw integrity_error(fmt::format("tensor file truncated in header of segment {}", s));
    }
    const std::uint32_t layers = load_u32(bytes + offset);
    const std::uint32_t heads = load_u32(bytes + offset + 4);
    const std::uint32_t n = load_u32(bytes + offset + 8);
    offset += kSegmentHeaderBytes;
    if (layers != manifest.model.num_layers || heads != manifest.model.num_heads || n != ms.n) {
      throw integrity_error(fmt::format(
          "segment {}: tensor header L={} H={} n={} disagrees with manifest L={} H={} n={}", s,
          layers, heads, n, manifest.model.num_layers, manifest.model.num_heads, ms.n));
    }
    const std::size_t count = std::size_t{layers} * heads * n * n;
    if ((size - offset) / sizeof(float) < count) {
      throw integrity_error(fmt::format("tensor file truncated in payload of segment {}", s));
    }
    if constexpr (std::endian::native == std::endian::little) {
      out.bundle.segments.emplace_back(ms.role, layers, heads, n, file,
                                       reinterpret_cast<const float*>(bytes + offset));
    } else {
      std::vector<float> values(count);
      for (std::size_t k = 0; k < count; ++k) {
        values[k] = std::bit_cast<float>(load_u32(bytes + offset + 4 * k));
      }
      out.bundle.segments.emplace_back(ms.role, layers, heads, n, std::move(values));
    }
    offset += count * sizeof(float);
    out.document.segments.push_back(ms.text);
  }
  if (offset != size) {
    throw integrity_error(fmt::format("tensor file has {} trailing bytes", size - offset));
  }
  validate(out.bundle, out.document);
  return out;
}

void write_bundle(const AttentionBundle& bundle, const TokenizedDocument& document,
                  const std::filesystem::path& manifest_path) {
  validate(bundle, document);

  const auto tensor_path = tensor_path_for(manifest_path);
  {
    std::ofstream out(tensor_path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(fmt::format("cannot create {}", tensor_path.string()));
    out.write(kMagic, 4);
    store_u16(out, kSambVersion);
    store_u16(out, 0);
    for (const auto& seg : bundle.segments) {
      store_u32(out, static_cast<std::uint32_t>(seg.layers()));
      store_u32(out, static_cast<std::uint32_t>(seg.heads()));
      store_u32(out, static_cast<std::uint32_t>(seg.n()));
      store_floats(out, seg.values());
    }
    if (!out) throw io_error(fmt::format("write failed on {}", tensor_path.string()));
  }
  {
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) throw io_error(fmt::format("cannot create {}", manifest_path.string()));
    out << manifest_to_json(bundle, document).dump(1) << '\n';
    if (!out) throw io_error(fmt::format("write failed on {}", manifest_path.string()));
  }
}

}  // namespace attnseek
