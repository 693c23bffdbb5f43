#include "attnseek/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "attnseek/errors.hpp"

namespace attnseek {

std::vector<CorpusDocument> parse_corpus(std::istream& in) {
  std::vector<CorpusDocument> docs;
  std::unordered_set<std::string> ids;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](std::string_view why) {
      return parse_error(fmt::format("corpus line {}: {}", line_no, why));
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
    if (!j.is_object()) throw fail("record is not an object");
    if (!j.contains("doc_id") || !j["doc_id"].is_string()) throw fail("missing string field 'doc_id'");
    if (!j.contains("abstract") || !j["abstract"].is_string()) throw fail("missing string field 'abstract'");
    if (!j.contains("keys") || !j["keys"].is_array()) throw fail("missing array field 'keys'");
    CorpusDocument doc;
    doc.doc_id = j["doc_id"].get<std::string>();
    // doc_id names the bundle file, so it must stay a plain file stem.
    if (doc.doc_id.empty() || doc.doc_id == "." || doc.doc_id == ".." ||
        doc.doc_id.find_first_of("/\\") != std::string::npos) {
      throw fail(fmt::format("doc_id '{}' is not usable as a file name", doc.doc_id));
    }
    if (!ids.insert(doc.doc_id).second) throw fail(fmt::format("duplicate doc_id '{}'", doc.doc_id));
    doc.abstract_text = j["abstract"].get<std::string>();
    if (j.contains("body")) {
      if (!j["body"].is_string()) throw fail("field 'body' must be a string");
      doc.body_text = j["body"].get<std::string>();
    }
    for (const auto& k : j["keys"]) {
      if (!k.is_string()) throw fail("keys must be strings");
      doc.gold_keys.push_back(k.get<std::string>());
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<CorpusDocument> load_corpus(const std::filesystem::path& path, CorpusFormat) {
  std::ifstream in(path);
  if (!in) throw io_error(fmt::format("cannot open corpus {}", path.string()));
  return parse_corpus(in);
}

}  // namespace attnseek
