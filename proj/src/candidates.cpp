#include "attnseek/candidates.hpp"

#include <map>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "attnseek/errors.hpp"
#include "attnseek/log.hpp"

namespace attnseek {

bool is_noun_tag(std::string_view pos) {
  return pos == "NN" || pos == "NNS" || pos == "NNP" || pos == "NNPS";
}

bool is_phrase_tag(std::string_view pos) { return pos == "JJ" || is_noun_tag(pos); }

std::vector<WordSpan> chunk_candidates(std::span<const Word> words) {
  std::vector<WordSpan> spans;
  std::size_t i = 0;
  while (i < words.size()) {
    // Extend over the run of phrase tags, remembering the last noun seen.
    std::size_t last_noun = words.size();
    std::size_t j = i;
    while (j < words.size() && is_phrase_tag(words[j].pos)) {
      if (is_noun_tag(words[j].pos)) last_noun = j;
      ++j;
    }
    if (last_noun == words.size()) {
      i = std::max(j, i + 1);
      continue;
    }
    spans.push_back({i, last_noun});
    i = last_noun + 1;
  }
  return spans;
}

std::string make_stem_key(std::span<const std::string> words, PorterVariant variant) {
  std::string key;
  for (const auto& w : words) {
    if (!key.empty()) key += ' ';
    key += porter_stem(w, variant);
  }
  return key;
}

std::string CandidatePhrase::display_surface() const { return fmt::format("{}", fmt::join(words, " ")); }

CandidateSet build_candidates(const TokenizedDocument& document) {
  CandidateSet out;
  std::unordered_map<std::string, std::size_t> by_key;

  for (std::size_t s = 0; s < document.segments.size(); ++s) {
    const SegmentText& seg = document.segments[s];
    const std::size_t n = seg.word_index.size();

    std::vector<std::vector<std::size_t>> tokens_of_word(seg.words.size());
    for (std::size_t t = 0; t < n; ++t) {
      if (seg.word_index[t]) tokens_of_word.at(*seg.word_index[t]).push_back(t);
    }

    auto spans = chunk_candidates(seg.words);
    if (!seg.candidate_spans.empty() && seg.candidate_spans != spans) {
      log().warn("segment {}: extractor candidate spans differ from recomputed chunking ({} vs {})", s,
                 seg.candidate_spans.size(), spans.size());
    }

    TokenMask mask(n, false);
    for (const WordSpan& span : spans) {
      Occurrence occ{s, span, {}};
      std::vector<std::string> surfaces;
      for (std::size_t w = span.first_word; w <= span.last_word; ++w) {
        const auto& toks = tokens_of_word[w];
        if (toks.empty()) {
          throw alignment_error(fmt::format("segment {}: word {} ('{}') has no aligned model tokens", s,
                                            w, seg.words[w].surface));
        }
        occ.token_indices.insert(occ.token_indices.end(), toks.begin(), toks.end());
        surfaces.push_back(seg.words[w].surface);
      }
      for (std::size_t t : occ.token_indices) mask[t] = true;

      std::string key = make_stem_key(surfaces);
      auto [it, inserted] = by_key.try_emplace(key, out.phrases.size());
      if (inserted) {
        out.phrases.push_back({std::move(surfaces), std::move(key), {}});
      }
      out.phrases[it->second].occurrences.push_back(std::move(occ));
    }
    out.masks.push_back(std::move(mask));
  }
  return out;
}

}  // namespace attnseek
