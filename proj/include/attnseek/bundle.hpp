#pragma once

// Attention bundle exchange format.
//
// A bundle is two sibling files sharing a stem:
//
//   <stem>.samb      binary tensor payload
//   <stem>.manifest  UTF-8 JSON metadata (tokens, words, POS tags, spans)
//
// Tensor layout, all little-endian:
//
//   "SAMB" | u16 version = 1 | u16 flags = 0
//   per segment: u32 L | u32 H | u32 n | L*H*n*n float32
//                (layer-major, then head-major, then row-major)
//
// Every row of every n x n map must sum to 1 within kRowSumTolerance and
// every entry must lie in [0, 1]. read_bundle() enforces this, so code
// downstream of it may assume row-stochastic maps.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attnseek {

inline constexpr std::uint16_t kSambVersion = 1;
inline constexpr double kRowSumTolerance = 1e-3;
inline constexpr std::string_view kTensorExtension = ".samb";
inline constexpr std::string_view kManifestExtension = ".manifest";

enum class SegmentRole { whole, abstract, body };

std::string_view to_string(SegmentRole role);
std::optional<SegmentRole> parse_segment_role(std::string_view text);

struct ModelMeta {
  std::string model_name;
  std::uint32_t num_layers = 0;
  std::uint32_t num_heads = 0;
  // Free-form provenance (tagger identity etc.); round-tripped verbatim.
  std::string pos_tagger;

  bool operator==(const ModelMeta&) const = default;
};

// Non-owning view of one n x n self-attention map stored as float32.
class SamView {
 public:
  SamView(const float* data, std::size_t n) : data_(data), n_(n) {}

  std::size_t n() const { return n_; }
  float operator()(std::size_t row, std::size_t col) const { return data_[row * n_ + col]; }
  std::span<const float> row(std::size_t i) const { return {data_ + i * n_, n_}; }
  std::span<const float> values() const { return {data_, n_ * n_}; }

 private:
  const float* data_;
  std::size_t n_;
};

// The [L][H][n][n] attention stack of one segment. Storage is shared and
// immutable; it is either an owned buffer or a read-only file mapping.
class SegmentTensor {
 public:
  SegmentTensor(SegmentRole role, std::uint32_t layers, std::uint32_t heads, std::uint32_t n,
                std::vector<float> values);
  SegmentTensor(SegmentRole role, std::uint32_t layers, std::uint32_t heads, std::uint32_t n,
                std::shared_ptr<const void> owner, const float* data);

  SegmentRole role() const { return role_; }
  std::size_t layers() const { return layers_; }
  std::size_t heads() const { return heads_; }
  std::size_t n() const { return n_; }
  std::size_t map_count() const { return layers_ * heads_; }

  SamView map(std::size_t layer, std::size_t head) const {
    return {data_ + (layer * heads_ + head) * n_ * n_, n_};
  }
  std::span<const float> values() const { return {data_, map_count() * n_ * n_}; }

 private:
  SegmentRole role_;
  std::size_t layers_;
  std::size_t heads_;
  std::size_t n_;
  std::shared_ptr<const void> owner_;
  const float* data_;
};

struct AttentionBundle {
  std::string doc_id;
  ModelMeta model;
  std::vector<SegmentTensor> segments;

  // Long documents carry an abstract segment first, followed by body segments.
  bool is_long() const { return !segments.empty() && segments.front().role() == SegmentRole::abstract; }
};

struct Word {
  std::string surface;
  std::string pos;  // Penn Treebank tag

  bool operator==(const Word&) const = default;
};

// Inclusive range of word ordinals within one segment.
struct WordSpan {
  std::size_t first_word = 0;
  std::size_t last_word = 0;

  std::size_t length() const { return last_word - first_word + 1; }
  bool operator==(const WordSpan&) const = default;
};

struct SegmentText {
  std::vector<std::string> tokens;
  // Word ordinal of each model token; nullopt for special tokens (BOS etc.).
  std::vector<std::optional<std::size_t>> word_index;
  std::vector<Word> words;
  // Advisory spans as produced by the extractor; candidate_gen recomputes them.
  std::vector<WordSpan> candidate_spans;

  bool operator==(const SegmentText&) const = default;
};

struct TokenizedDocument {
  std::vector<SegmentText> segments;

  bool operator==(const TokenizedDocument&) const = default;
};

struct LoadedBundle {
  AttentionBundle bundle;
  TokenizedDocument document;
};

// Throws validation_error naming the first violated invariant.
void validate(const AttentionBundle& bundle, const TokenizedDocument& document);

// Path of the tensor file that accompanies a manifest (same stem).
std::filesystem::path tensor_path_for(const std::filesystem::path& manifest_path);

// Reads <stem>.manifest and its sibling <stem>.samb. The tensor payload is
// memory-mapped. Throws format_error, integrity_error or validation_error.
LoadedBundle read_bundle(const std::filesystem::path& manifest_path);

// Validates both inputs, then writes <stem>.samb and <stem>.manifest.
// Nothing is written when validation fails.
void write_bundle(const AttentionBundle& bundle, const TokenizedDocument& document,
                  const std::filesystem::path& manifest_path);

}  // namespace attnseek
