// Copyright 2026 The tagrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TAGREC_DOCMODEL_HPP_
#define TAGREC_DOCMODEL_HPP_

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagrec/ontology.hpp"
#include "tagrec/text.hpp"

namespace tagrec {

struct Word {
  std::string text;
  std::optional<EntityLabel> label;

  bool operator==(const Word& o) const {
    return text == o.text && label == o.label;
  }
  bool operator!=(const Word& o) const { return !(*this == o); }
};

enum class BlockKind { A, B, C };

inline char block_letter(BlockKind k) {
  switch (k) {
    case BlockKind::A: return 'A';
    case BlockKind::B: return 'B';
    default: return 'C';
  }
}

struct Block {
  BlockKind kind = BlockKind::B;
  std::vector<Word> words;

  bool operator==(const Block& o) const {
    return kind == o.kind && words == o.words;
  }
};

// One marriage record: exactly one A (margin names), exactly one B (body),
// zero or more C (marginal notes).
struct RecordD {
  Block a{BlockKind::A, {}};
  Block b{BlockKind::B, {}};
  std::vector<Block> c;

  bool operator==(const RecordD& o) const {
    return a == o.a && b == o.b && c == o.c;
  }
};

struct Page {
  std::string id;
  std::vector<RecordD> records;

  bool operator==(const Page& o) const {
    return id == o.id && records == o.records;
  }
};

// --- Validation --------------------------------------------------------------

// Word text must be free of anything the serializers treat as markup:
// whitespace, entity tag tokens, layout marker literals, and combined-tag
// style markers "<name>" where name is a valid composite. The last rule is
// what guarantees encode-then-strict-decode is the identity for every scheme.
inline void validate_word(const Word& w, const TagOntology& ont) {
  if (w.text.empty()) throw error("word is empty");
  std::size_t i = 0;
  while (i < w.text.size()) {
    const char c = w.text[i];
    if (is_ws(c)) throw error("word contains whitespace");
    std::size_t j = i;
    const char32_t cp = utf8::next(w.text, j);
    if (ont.is_tag_token(cp)) throw error("word contains a tag token");
    i = j;
  }
  for (std::string_view m : kLayoutMarkers) {
    if (w.text.find(m) != std::string::npos)
      throw error("word contains a layout token");
  }
  std::size_t open = w.text.find('<');
  while (open != std::string::npos) {
    const std::size_t close = w.text.find('>', open + 1);
    if (close == std::string::npos) break;
    const std::string_view inner =
        std::string_view(w.text).substr(open + 1, close - open - 1);
    try {
      parse_composite(inner, ont);
      throw error("word contains a combined-tag marker");
    } catch (const error& e) {
      if (std::string_view(e.what()) == "word contains a combined-tag marker")
        throw;
    }
    open = w.text.find('<', open + 1);
  }
  if (w.label && !is_canonical(*w.label, ont))
    throw error("word label is not canonical");
}

inline void validate_page(const Page& p, const TagOntology& ont) {
  if (p.records.empty()) throw error("page has no records");
  for (std::size_t r = 0; r < p.records.size(); ++r) {
    const RecordD& rec = p.records[r];
    auto check_block = [&](const Block& blk) {
      for (std::size_t wi = 0; wi < blk.words.size(); ++wi) {
        try {
          validate_word(blk.words[wi], ont);
        } catch (const error& e) {
          throw error("record " + std::to_string(r) + ", block " +
                      block_letter(blk.kind) + std::string(", word ") +
                      std::to_string(wi) + ": " + e.what());
        }
      }
    };
    if (rec.a.kind != BlockKind::A || rec.b.kind != BlockKind::B)
      throw error("record " + std::to_string(r) + ": block kinds out of place");
    check_block(rec.a);
    check_block(rec.b);
    for (const Block& cb : rec.c) {
      if (cb.kind != BlockKind::C)
        throw error("record " + std::to_string(r) +
                    ": C sequence holds a non-C block");
      check_block(cb);
    }
  }
}

// --- Plain text --------------------------------------------------------------
//
// Words join with single spaces, blocks with single newlines, records with
// single newlines. No tag or layout token survives (guaranteed by the word
// invariant).

inline std::string plain_text(std::span<const Word> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i].text;
  }
  return out;
}

inline std::string plain_text(const Block& b) { return plain_text(b.words); }

inline std::string plain_text(const RecordD& r) {
  std::string out = plain_text(r.a);
  out.push_back('\n');
  out += plain_text(r.b);
  for (const Block& c : r.c) {
    out.push_back('\n');
    out += plain_text(c);
  }
  return out;
}

inline std::string plain_text(const Page& p) {
  std::string out;
  for (std::size_t i = 0; i < p.records.size(); ++i) {
    if (i) out.push_back('\n');
    out += plain_text(p.records[i]);
  }
  return out;
}

// All words of a record / page in reading order (A, B, then C blocks).
inline std::vector<Word> flatten_words(const RecordD& r) {
  std::vector<Word> out(r.a.words.begin(), r.a.words.end());
  out.insert(out.end(), r.b.words.begin(), r.b.words.end());
  for (const Block& c : r.c) out.insert(out.end(), c.words.begin(), c.words.end());
  return out;
}

inline std::vector<Word> flatten_words(const Page& p) {
  std::vector<Word> out;
  for (const RecordD& r : p.records) {
    std::vector<Word> rw = flatten_words(r);
    out.insert(out.end(), rw.begin(), rw.end());
  }
  return out;
}

// --- Entity runs -------------------------------------------------------------

// An entity is a maximal run of consecutive words sharing an identical label,
// consistent with BIO segmentation.
struct EntityRun {
  std::size_t begin = 0;  // word index, inclusive
  std::size_t end = 0;    // word index, exclusive
  EntityLabel label;
};

inline std::vector<EntityRun> entity_runs(std::span<const Word> words) {
  std::vector<EntityRun> out;
  std::size_t i = 0;
  while (i < words.size()) {
    if (!words[i].label) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < words.size() && words[j].label == words[i].label) ++j;
    out.push_back({i, j, *words[i].label});
    i = j;
  }
  return out;
}

// --- Interchange format ------------------------------------------------------
//
// UTF-8 JSON, top level {id, records:[{A:{words:[...]}, B:{...}, C:[...]}]};
// a word is a bare string (unlabeled) or {t: text, l: [tag names]}.

inline Page read_document(std::string_view content, const TagOntology& ont) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw error(std::string("malformed document: ") + e.what());
  }
  auto read_word = [&](const nlohmann::json& jw) -> Word {
    Word w;
    if (jw.is_string()) {
      w.text = jw.get<std::string>();
    } else if (jw.is_object()) {
      w.text = jw.at("t").get<std::string>();
      std::vector<int> ids;
      for (const auto& jn : jw.at("l")) {
        const std::string name = jn.get<std::string>();
        const Tag* t = ont.find_name(name);
        if (!t) throw error("unknown tag name '" + name + "'");
        ids.push_back(t->id);
      }
      w.label = canonical_label(ids, ont);
    } else {
      throw error("word entry must be a string or an object");
    }
    return w;
  };
  auto read_block = [&](const nlohmann::json& jb, BlockKind kind) -> Block {
    Block b{kind, {}};
    if (!jb.is_object() || !jb.contains("words") || !jb["words"].is_array())
      throw error("block must be an object with a 'words' array");
    for (const auto& jw : jb["words"]) b.words.push_back(read_word(jw));
    return b;
  };

  Page p;
  try {
    if (!j.is_object()) throw error("document must be a JSON object");
    p.id = j.at("id").get<std::string>();
    if (!j.contains("records") || !j["records"].is_array())
      throw error("document missing 'records' array");
    for (const auto& jr : j["records"]) {
      RecordD rec;
      rec.a = read_block(jr.at("A"), BlockKind::A);
      rec.b = read_block(jr.at("B"), BlockKind::B);
      if (jr.contains("C")) {
        for (const auto& jc : jr["C"])
          rec.c.push_back(read_block(jc, BlockKind::C));
      }
      p.records.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw error(std::string("malformed document: ") + e.what());
  }
  validate_page(p, ont);
  return p;
}

// Canonical serialization: alphabetically ordered keys, 2-space indentation,
// UTF-8 passthrough, label components in canonical order. Byte-deterministic
// for equal pages, and the fixed point of read_document∘write_document.
inline std::string write_document(const Page& p, const TagOntology& ont) {
  auto word_json = [&](const Word& w) -> nlohmann::json {
    if (!w.label) return w.text;
    nlohmann::json jw;
    jw["t"] = w.text;
    nlohmann::json names = nlohmann::json::array();
    for (int id : w.label->components) names.push_back(ont.tag(id).name);
    jw["l"] = std::move(names);
    return jw;
  };
  auto block_json = [&](const Block& b) {
    nlohmann::json jb;
    nlohmann::json words = nlohmann::json::array();
    for (const Word& w : b.words) words.push_back(word_json(w));
    jb["words"] = std::move(words);
    return jb;
  };
  nlohmann::json j;
  j["id"] = p.id;
  nlohmann::json jrecords = nlohmann::json::array();
  for (const RecordD& rec : p.records) {
    nlohmann::json jr;
    jr["A"] = block_json(rec.a);
    jr["B"] = block_json(rec.b);
    jr["C"] = nlohmann::json::array();
    for (const Block& cb : rec.c) jr["C"].push_back(block_json(cb));
    jrecords.push_back(std::move(jr));
  }
  j["records"] = std::move(jrecords);
  return j.dump(2) + "\n";
}

// --- Corpus statistics -------------------------------------------------------

// Aggregate annotation statistics. Totals are plain sums, so partial reports
// merge associatively and parallel accumulation is order-independent.
struct StatsReport {
  std::uint64_t pages = 0;
  std::uint64_t records = 0;
  std::uint64_t entities = 0;
  std::uint64_t characters = 0;  // codepoints of per-record plain text
  std::uint64_t words = 0;
  std::map<std::string, std::uint64_t> per_tag;  // tag name -> entity count

  StatsReport& operator+=(const StatsReport& o) {
    pages += o.pages;
    records += o.records;
    entities += o.entities;
    characters += o.characters;
    words += o.words;
    for (const auto& [k, v] : o.per_tag) per_tag[k] += v;
    return *this;
  }

  double chars_per_record() const {
    return records ? static_cast<double>(characters) / records : 0.0;
  }
  double words_per_record() const {
    return records ? static_cast<double>(words) / records : 0.0;
  }
  double entities_per_record() const {
    return records ? static_cast<double>(entities) / records : 0.0;
  }
};

inline StatsReport page_stats(const Page& p, const TagOntology& ont) {
  StatsReport s;
  s.pages = 1;
  for (const RecordD& rec : p.records) {
    ++s.records;
    s.characters += utf8::length(plain_text(rec));
    const std::vector<Word> words = flatten_words(rec);
    s.words += words.size();
    for (const EntityRun& run : entity_runs(words)) {
      ++s.entities;
      for (int id : run.label.components) ++s.per_tag[ont.tag(id).name];
    }
  }
  return s;
}

inline StatsReport corpus_stats(std::span<const Page> pages,
                                const TagOntology& ont) {
  StatsReport s;
  for (const Page& p : pages) s += page_stats(p, ont);
  return s;
}

inline nlohmann::json stats_json(const StatsReport& s) {
  nlohmann::json j;
  j["totals"] = {{"pages", s.pages},
                 {"records", s.records},
                 {"entities", s.entities},
                 {"characters", s.characters},
                 {"words", s.words}};
  j["per_record"] = {{"characters", s.chars_per_record()},
                     {"words", s.words_per_record()},
                     {"entities", s.entities_per_record()}};
  j["per_tag"] = s.per_tag;
  return j;
}

inline std::string stats_table(const StatsReport& s) {
  char buf[128];
  std::string out;
  auto row = [&](const char* name, double value) {
    std::snprintf(buf, sizeof(buf), "%-24s %12.2f\n", name, value);
    out += buf;
  };
  std::snprintf(buf, sizeof(buf), "%-24s %12llu\n", "pages",
                static_cast<unsigned long long>(s.pages));
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-24s %12llu\n", "records",
                static_cast<unsigned long long>(s.records));
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-24s %12llu\n", "entities",
                static_cast<unsigned long long>(s.entities));
  out += buf;
  row("chars/record", s.chars_per_record());
  row("words/record", s.words_per_record());
  row("entities/record", s.entities_per_record());
  out += "per-tag entity counts:\n";
  for (const auto& [name, n] : s.per_tag) {
    std::snprintf(buf, sizeof(buf), "  %-22s %12llu\n", name.c_str(),
                  static_cast<unsigned long long>(n));
    out += buf;
  }
  return out;
}

}  // namespace tagrec

#endif  // TAGREC_DOCMODEL_HPP_
