#include <doctest.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <json.hpp>

#include "attnseek/bundle.hpp"
#include "attnseek/errors.hpp"
#include "synthetic.hpp"

using namespace attnseek;
using namespace attnseek::testing;
namespace fs = std::filesystem;

namespace {

SegmentText two_token_text() {
  SegmentText text;
  text.tokens = {"\xC4\xA0graph", "\xC4\xA0models"};
  text.word_index = {0, 1};
  text.words = {{"graph", "NN"}, {"models", "NNS"}};
  text.candidate_spans = {{0, 1}};
  return text;
}

LoadedBundle trivial_bundle(std::vector<float> values = {1.0f, 0.0f, 0.5f, 0.5f}) {
  LoadedBundle b;
  b.bundle.doc_id = "trivial";
  b.bundle.model = {"toy", 1, 1, "manual"};
  b.bundle.segments.push_back(make_segment(1, 1, 2, std::move(values)));
  b.document.segments.push_back(two_token_text());
  return b;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

fs::path write_trivial(const fs::path& dir) {
  auto manifest = dir / "trivial.manifest";
  auto b = trivial_bundle();
  write_bundle(b.bundle, b.document, manifest);
  return manifest;
}

}  // namespace

TEST_CASE("smallest row-stochastic bundle reads back as one 1x1x2x2 stack") {
  auto dir = scratch_dir("bundle_trivial");
  auto manifest = write_trivial(dir);
  auto loaded = read_bundle(manifest);

  REQUIRE(loaded.bundle.segments.size() == 1);
  const auto& seg = loaded.bundle.segments[0];
  CHECK(seg.role() == SegmentRole::whole);
  CHECK(seg.layers() == 1);
  CHECK(seg.heads() == 1);
  CHECK(seg.n() == 2);
  CHECK(seg.map(0, 0)(0, 0) == 1.0f);
  CHECK(seg.map(0, 0)(0, 1) == 0.0f);
  CHECK(seg.map(0, 0)(1, 0) == 0.5f);
  CHECK(seg.map(0, 0)(1, 1) == 0.5f);
  CHECK(loaded.bundle.doc_id == "trivial");
  CHECK(loaded.bundle.model == ModelMeta{"toy", 1, 1, "manual"});
  CHECK(loaded.document == trivial_bundle().document);
  CHECK_FALSE(loaded.bundle.is_long());
}

TEST_CASE("tensor file layout is magic, version, flags, then per-segment dims and float32 payload") {
  auto dir = scratch_dir("bundle_layout");
  write_trivial(dir);
  auto bytes = slurp(dir / "trivial.samb");
  REQUIRE(bytes.size() == 8 + 12 + 4 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SAMB");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 0);
  CHECK(bytes[7] == 0);
  // L, H, n as little-endian u32
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 1);
  CHECK(bytes[16] == 2);
  float second_row_first = 0;
  std::memcpy(&second_row_first, bytes.data() + 20 + 8, 4);
  CHECK(second_row_first == 0.5f);
}

TEST_CASE("round trip of the trivial bundle is byte-identical") {
  auto dir = scratch_dir("bundle_roundtrip");
  auto manifest = write_trivial(dir);
  auto loaded = read_bundle(manifest);
  auto again = dir / "again.manifest";
  write_bundle(loaded.bundle, loaded.document, again);
  CHECK(slurp(dir / "trivial.samb") == slurp(dir / "again.samb"));
}

TEST_CASE("random bundles round-trip exactly") {
  Rng rng(11);
  auto dir = scratch_dir("bundle_random");
  for (int trial = 0; trial < 5; ++trial) {
    auto b = trial % 2 ? random_long_bundle(rng, 3, 2, 2, 6) : random_short_bundle(rng, 2, 3, 16);
    auto path = dir / fmt::format("r{}.manifest", trial);
    write_bundle(b.bundle, b.document, path);
    auto loaded = read_bundle(path);
    CHECK(loaded.document == b.document);
    REQUIRE(loaded.bundle.segments.size() == b.bundle.segments.size());
    for (std::size_t s = 0; s < b.bundle.segments.size(); ++s) {
      auto want = b.bundle.segments[s].values();
      auto got = loaded.bundle.segments[s].values();
      CHECK(std::equal(want.begin(), want.end(), got.begin(), got.end()));
      CHECK(loaded.bundle.segments[s].role() == b.bundle.segments[s].role());
    }
  }
}

TEST_CASE("mapped tensor data outlives the moved bundle") {
  auto dir = scratch_dir("bundle_lifetime");
  auto manifest = write_trivial(dir);
  std::vector<SegmentTensor> kept;
  {
    auto loaded = read_bundle(manifest);
    kept.push_back(loaded.bundle.segments[0]);
  }
  CHECK(kept[0].map(0, 0)(1, 1) == 0.5f);
}

TEST_CASE("tensor file truncated by 4 bytes is an integrity error") {
  auto dir = scratch_dir("bundle_truncated");
  auto manifest = write_trivial(dir);
  auto bytes = slurp(dir / "trivial.samb");
  bytes.resize(bytes.size() - 4);
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), integrity_error);
}

TEST_CASE("truncation inside a segment header is an integrity error") {
  auto dir = scratch_dir("bundle_truncated_header");
  auto manifest = write_trivial(dir);
  auto bytes = slurp(dir / "trivial.samb");
  bytes.resize(14);
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), integrity_error);
}

TEST_CASE("trailing bytes are an integrity error") {
  auto dir = scratch_dir("bundle_trailing");
  auto manifest = write_trivial(dir);
  auto bytes = slurp(dir / "trivial.samb");
  bytes.push_back(0);
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), integrity_error);
}

TEST_CASE("bad magic, version or flags are format errors") {
  auto dir = scratch_dir("bundle_header");
  auto manifest = write_trivial(dir);
  const auto good = slurp(dir / "trivial.samb");

  auto bytes = good;
  bytes[0] = 'X';
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), format_error);

  bytes = good;
  bytes[4] = 2;
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), format_error);

  bytes = good;
  bytes[6] = 1;
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), format_error);

  spit(dir / "trivial.samb", {});
  CHECK_THROWS_AS(read_bundle(manifest), format_error);
}

TEST_CASE("manifest and tensor disagreeing on dimensions is an integrity error") {
  auto dir = scratch_dir("bundle_dims");
  auto manifest = write_trivial(dir);
  auto bytes = slurp(dir / "trivial.samb");
  bytes[16] = 3;  // n = 3 in the tensor, 2 in the manifest
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), integrity_error);

  bytes[16] = 2;
  bytes[8] = 2;  // L = 2
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), integrity_error);
}

TEST_CASE("row sum 0.90 is a validation error naming the location, and nothing is written") {
  auto dir = scratch_dir("bundle_rowsum");
  auto b = trivial_bundle({1.0f, 0.0f, 0.45f, 0.45f});
  auto manifest = dir / "bad.manifest";
  try {
    write_bundle(b.bundle, b.document, manifest);
    FAIL("expected a validation error");
  } catch (const validation_error& e) {
    const std::string what = e.what();
    CHECK(what.find("segment 0") != std::string::npos);
    CHECK(what.find("layer 0") != std::string::npos);
    CHECK(what.find("head 0") != std::string::npos);
    CHECK(what.find("row 1") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(manifest));
  CHECK_FALSE(fs::exists(dir / "bad.samb"));
}

TEST_CASE("a corrupted row on disk is caught on read") {
  auto dir = scratch_dir("bundle_rowsum_read");
  auto manifest = write_trivial(dir);
  auto bytes = slurp(dir / "trivial.samb");
  const float bad = 0.4f;
  std::memcpy(bytes.data() + 20 + 12, &bad, 4);
  spit(dir / "trivial.samb", bytes);
  CHECK_THROWS_AS(read_bundle(manifest), validation_error);
}

TEST_CASE("row sums within the 1e-3 tolerance are accepted") {
  auto b = trivial_bundle({0.9995f, 0.0f, 0.5f, 0.5f});
  CHECK_NOTHROW(validate(b.bundle, b.document));
  auto bad = trivial_bundle({0.998f, 0.0f, 0.5f, 0.5f});
  CHECK_THROWS_AS(validate(bad.bundle, bad.document), validation_error);
}

TEST_CASE("negative or NaN entries fail validation") {
  auto neg = trivial_bundle({1.1f, -0.1f, 0.5f, 0.5f});
  CHECK_THROWS_AS(validate(neg.bundle, neg.document), validation_error);
  auto nan = trivial_bundle({std::nanf(""), 1.0f, 0.5f, 0.5f});
  CHECK_THROWS_AS(validate(nan.bundle, nan.document), validation_error);
}

TEST_CASE("text misaligned with the tensor fails validation") {
  auto b = trivial_bundle();
  b.document.segments[0].tokens.push_back("extra");
  CHECK_THROWS_AS(validate(b.bundle, b.document), validation_error);

  b = trivial_bundle();
  b.document.segments[0].word_index[1] = 5;
  CHECK_THROWS_AS(validate(b.bundle, b.document), validation_error);

  b = trivial_bundle();
  b.document.segments[0].candidate_spans = {{0, 2}};
  CHECK_THROWS_AS(validate(b.bundle, b.document), validation_error);

  b = trivial_bundle();
  b.document.segments.push_back(two_token_text());
  CHECK_THROWS_AS(validate(b.bundle, b.document), validation_error);
}

TEST_CASE("segment roles must be one whole segment or abstract followed by bodies") {
  Rng rng(3);
  auto b = random_long_bundle(rng, 1, 1, 2, 4);
  CHECK_NOTHROW(validate(b.bundle, b.document));

  auto swapped = b;
  std::swap(swapped.bundle.segments[0], swapped.bundle.segments[1]);
  std::swap(swapped.document.segments[0], swapped.document.segments[1]);
  CHECK_THROWS_AS(validate(swapped.bundle, swapped.document), validation_error);

  auto two_whole = trivial_bundle();
  two_whole.bundle.segments.push_back(make_segment(1, 1, 2, {1, 0, 0, 1}));
  two_whole.document.segments.push_back(two_token_text());
  CHECK_THROWS_AS(validate(two_whole.bundle, two_whole.document), validation_error);
}

TEST_CASE("map counts must match model_meta") {
  auto b = trivial_bundle();
  b.bundle.model.num_heads = 2;
  CHECK_THROWS_AS(validate(b.bundle, b.document), validation_error);
  b.bundle.model.num_heads = 0;
  CHECK_THROWS_AS(validate(b.bundle, b.document), validation_error);
}

TEST_CASE("three-segment long bundle keeps segment order in the manifest") {
  Rng rng(5);
  const std::vector<std::size_t> sizes = {100, 512, 512};
  LoadedBundle b;
  b.bundle.doc_id = "long";
  b.bundle.model = {"toy", 1, 1, "manual"};
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const auto role = s == 0 ? SegmentRole::abstract : SegmentRole::body;
    b.bundle.segments.push_back(random_segment(rng, 1, 1, sizes[s], role));
    SegmentText text;
    for (std::size_t i = 0; i < sizes[s]; ++i) {
      text.tokens.push_back(fmt::format("t{}_{}", s, i));
      text.word_index.push_back(i);
      text.words.push_back({fmt::format("w{}", i), "NN"});
    }
    b.document.segments.push_back(std::move(text));
  }
  auto dir = scratch_dir("bundle_long");
  auto manifest = dir / "long.manifest";
  write_bundle(b.bundle, b.document, manifest);

  std::ifstream in(manifest);
  auto js = nlohmann::json::parse(in);
  REQUIRE(js.at("segments").size() == 3);
  CHECK(js["segments"][0]["role"] == "abstract");
  CHECK(js["segments"][1]["role"] == "body");
  CHECK(js["segments"][2]["role"] == "body");
  CHECK(js["segments"][0]["n"] == 100);
  CHECK(js["segments"][1]["n"] == 512);
  CHECK(js["segments"][2]["tokens"][0] == "t2_0");

  auto loaded = read_bundle(manifest);
  CHECK(loaded.bundle.is_long());
  CHECK(loaded.document == b.document);
  CHECK(loaded.bundle.segments[2].n() == 512);
}

TEST_CASE("manifest schema carries the fields the extractor writes") {
  auto dir = scratch_dir("bundle_schema");
  auto manifest = write_trivial(dir);
  std::ifstream in(manifest);
  auto js = nlohmann::json::parse(in);
  CHECK(js["format"] == "samb-manifest");
  CHECK(js["version"] == 1);
  CHECK(js["doc_id"] == "trivial");
  CHECK(js["model_meta"]["model_name"] == "toy");
  CHECK(js["model_meta"]["num_layers"] == 1);
  CHECK(js["model_meta"]["num_heads"] == 1);
  CHECK(js["model_meta"]["pos_tagger"] == "manual");
  const auto& seg = js["segments"][0];
  CHECK(seg["role"] == "whole");
  CHECK(seg["word_index"] == nlohmann::json::array({0, 1}));
  CHECK(seg["words"][1]["surface"] == "models");
  CHECK(seg["words"][1]["pos"] == "NNS");
  CHECK(seg["candidate_spans"] == nlohmann::json::parse("[[0,1]]"));
}

TEST_CASE("special tokens carry a null word index") {
  auto dir = scratch_dir("bundle_null_index");
  LoadedBundle b = trivial_bundle();
  b.document.segments[0].tokens = {"<s>", "\xC4\xA0graph"};
  b.document.segments[0].word_index = {std::nullopt, 0};
  b.document.segments[0].words = {{"graph", "NN"}};
  b.document.segments[0].candidate_spans = {{0, 0}};
  write_bundle(b.bundle, b.document, dir / "x.manifest");
  auto loaded = read_bundle(dir / "x.manifest");
  CHECK_FALSE(loaded.document.segments[0].word_index[0].has_value());
  CHECK(loaded.document.segments[0].word_index[1] == 0u);
}

TEST_CASE("malformed manifests are format errors") {
  auto dir = scratch_dir("bundle_manifest_bad");
  auto manifest = write_trivial(dir);
  std::ifstream in(manifest);
  auto js = nlohmann::json::parse(in);
  in.close();

  auto rewrite = [&](const nlohmann::json& j) {
    std::ofstream out(manifest, std::ios::trunc);
    out << j.dump();
  };
  auto bad = js;
  bad["format"] = "other";
  rewrite(bad);
  CHECK_THROWS_AS(read_bundle(manifest), format_error);

  bad = js;
  bad["segments"][0]["role"] = "preface";
  rewrite(bad);
  CHECK_THROWS_AS(read_bundle(manifest), format_error);

  {
    std::ofstream out(manifest, std::ios::trunc);
    out << "{ not json";
  }
  CHECK_THROWS_AS(read_bundle(manifest), format_error);

  CHECK_THROWS_AS(read_bundle(dir / "absent.manifest"), io_error);
}

TEST_CASE("tensor path shares the manifest stem") {
  CHECK(tensor_path_for("a/b/doc-1.manifest") == fs::path("a/b/doc-1.samb"));
}
