#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace attnseek {

// One benchmark document. Short-document corpora leave body_text empty.
struct CorpusDocument {
  std::string doc_id;
  std::string abstract_text;
  std::string body_text;
  std::vector<std::string> gold_keys;
};

enum class CorpusFormat { jsonl };

// JSON Lines: one object per line with "doc_id", "abstract", optional
// "body" and "keys" (array of strings). Blank lines are ignored. Throws
// parse_error naming the 1-based line number.
std::vector<CorpusDocument> parse_corpus(std::istream& in);

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path,
                                        CorpusFormat format = CorpusFormat::jsonl);

}  // namespace attnseek
