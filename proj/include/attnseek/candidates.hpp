#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attnseek/bundle.hpp"
#include "attnseek/porter.hpp"

namespace attnseek {

// True for JJ, NN, NNS, NNP, NNPS.
bool is_phrase_tag(std::string_view pos);
// True for NN, NNS, NNP, NNPS.
bool is_noun_tag(std::string_view pos);

// Noun-phrase chunking with the grammar {JJ|NN|NNS|NNP|NNPS}* {NN|NNS|NNP|NNPS},
// longest match, scanning left to right. Spans are disjoint and sorted.
std::vector<WordSpan> chunk_candidates(std::span<const Word> words);

// Space-joined Porter stems of the case-folded words.
std::string make_stem_key(std::span<const std::string> words,
                          PorterVariant variant = PorterVariant::reference);

struct Occurrence {
  std::size_t segment = 0;
  WordSpan words;
  std::vector<std::size_t> token_indices;  // sorted
};

struct CandidatePhrase {
  std::vector<std::string> words;  // surface forms of the first occurrence
  std::string stem_key;
  std::vector<Occurrence> occurrences;

  std::size_t occurrence_count() const { return occurrences.size(); }
  bool is_single_word() const { return words.size() == 1; }
  std::string display_surface() const;
};

// Per segment, true iff the token belongs to some candidate occurrence.
using TokenMask = std::vector<bool>;

struct CandidateSet {
  // Ordered by first occurrence in the document.
  std::vector<CandidatePhrase> phrases;
  std::vector<TokenMask> masks;  // one per segment

  bool empty() const { return phrases.empty(); }
};

// Chunks every segment, aligns spans to model tokens and merges occurrences
// that share a stem key. Throws alignment_error when a span word owns no
// model token.
CandidateSet build_candidates(const TokenizedDocument& document);

}  // namespace attnseek
