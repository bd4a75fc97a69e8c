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

#ifndef TAGREC_CODECS_HPP_
#define TAGREC_CODECS_HPP_

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagrec/docmodel.hpp"
#include "tagrec/ontology.hpp"
#include "tagrec/text.hpp"

namespace tagrec {

// The five ways of interleaving entity tags with transcribed words.
enum class EncodingScheme {
  before = 1,             // single separate tags before each word
  after = 2,              // single separate tags after each word
  open_close = 3,         // open & close tags around every labeled word
  open_close_nested = 4,  // open & close tags, closed only on label change
  combined_after = 5,     // one combined tag after each word
};

inline EncodingScheme scheme_from_int(int n) {
  if (n < 1 || n > 5) throw error("unknown encoding scheme " + std::to_string(n));
  return static_cast<EncodingScheme>(n);
}

enum class DecodeMode { strict, lenient };

struct CodecOptions {
  // Closing markers render "</x>" by default; true renders "<\x>" instead,
  // reproducing the typeset form byte for byte.
  bool backslash_close = false;
  // Scheme 1 puts its tag tokens immediately before the word with no space;
  // true separates them with a single space.
  bool scheme1_tag_word_space = false;
};

struct TaggedString {
  std::string text;
  EncodingScheme scheme = EncodingScheme::after;
};

struct Diagnostic {
  std::size_t position = 0;  // byte offset into the tagged string
  std::string message;
};

struct DecodeResult {
  std::vector<Word> words;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline bool is_pua(char32_t cp) { return cp >= 0xE000 && cp <= 0xF8FF; }

inline std::string open_marker(int id, const TagOntology& ont) {
  return "<" + utf8::of(ont.tag(id).token) + ">";
}

inline std::string close_marker(int id, const TagOntology& ont,
                                const CodecOptions& opts) {
  return std::string("<") + (opts.backslash_close ? "\\" : "/") +
         utf8::of(ont.tag(id).token) + ">";
}

struct EntityMarker {
  bool closing = false;
  char slash = '/';  // '/' or '\\', meaningful when closing
  int tag_id = 0;
};

// Recognizes "<t>", "</t>" and "<\t>" where t is a single ontology token.
inline std::optional<EntityMarker> parse_entity_marker(std::string_view unit,
                                                       const TagOntology& ont) {
  if (unit.size() < 3 || unit.front() != '<' || unit.back() != '>')
    return std::nullopt;
  std::string_view inner = unit.substr(1, unit.size() - 2);
  EntityMarker m;
  if (!inner.empty() && (inner[0] == '/' || inner[0] == '\\')) {
    m.closing = true;
    m.slash = inner[0];
    inner.remove_prefix(1);
  }
  std::size_t i = 0;
  if (inner.empty()) return std::nullopt;
  const char32_t cp = utf8::next(inner, i);
  if (i != inner.size()) return std::nullopt;
  const Tag* t = ont.find_token(cp);
  if (!t) return std::nullopt;
  m.tag_id = t->id;
  return m;
}

// Does `unit` look like a marker for a reserved-plane codepoint that is not
// in the ontology? Strict mode reports these as unknown tokens.
inline bool looks_like_unknown_marker(std::string_view unit) {
  if (unit.size() < 3 || unit.front() != '<' || unit.back() != '>') return false;
  std::string_view inner = unit.substr(1, unit.size() - 2);
  if (!inner.empty() && (inner[0] == '/' || inner[0] == '\\'))
    inner.remove_prefix(1);
  if (inner.empty()) return false;
  std::size_t i = 0;
  const char32_t cp = utf8::next(inner, i);
  return i == inner.size() && is_pua(cp);
}

inline bool contains_composite_marker(std::string_view text,
                                      const TagOntology& ont) {
  std::size_t open = text.find('<');
  while (open != std::string_view::npos) {
    const std::size_t close = text.find('>', open + 1);
    if (close == std::string_view::npos) return false;
    try {
      parse_composite(text.substr(open + 1, close - open - 1), ont);
      return true;
    } catch (const error&) {
    }
    open = text.find('<', open + 1);
  }
  return false;
}

// Splits a unit into plain text and the tag ids found in it: bare tag tokens
// anywhere, plus "<name>" combined markers when `take_composites` is set.
// Unknown reserved-plane codepoints are dropped and reported. Total.
struct ExtractResult {
  std::string text;
  std::vector<int> ids;       // in reading order
  bool had_unknown = false;
  bool tokens_outside_run = false;  // a bare token not in the leading/trailing run
};

inline ExtractResult extract_tags(std::string_view unit, bool take_composites,
                                  const TagOntology& ont) {
  ExtractResult r;
  std::size_t i = 0;
  bool seen_text = false;
  bool text_after_token = false;
  while (i < unit.size()) {
    if (take_composites && unit[i] == '<') {
      const std::size_t close = unit.find('>', i + 1);
      if (close != std::string_view::npos) {
        bool parsed = false;
        try {
          EntityLabel lbl =
              parse_composite(unit.substr(i + 1, close - i - 1), ont);
          for (int id : lbl.components) r.ids.push_back(id);
          parsed = true;
        } catch (const error&) {
        }
        if (parsed) {
          i = close + 1;
          continue;
        }
      }
    }
    std::size_t j = i;
    const char32_t cp = utf8::next(unit, j);
    if (ont.is_tag_token(cp)) {
      if (text_after_token) r.tokens_outside_run = true;
      if (seen_text && !r.text.empty() && i > 0) {
        // token after some text: fine for trailing runs, flagged if more
        // text follows (handled via text_after_token below)
      }
      r.ids.push_back(ont.find_token(cp)->id);
    } else if (is_pua(cp)) {
      r.had_unknown = true;
    } else {
      r.text.append(unit.substr(i, j - i));
      seen_text = true;
      if (!r.ids.empty()) text_after_token = true;
    }
    i = j;
  }
  return r;
}

// Lenient label assembly: keeps the ids in reading order, drops duplicates
// and anything that would exceed a level's maximum (the newest conflicting
// tag loses), then sorts canonically. Minimum-cardinality violations are NOT
// repaired: a propagated or partial label such as {wife} alone is kept, which
// is exactly what an unclosed tag produces downstream.
inline std::optional<EntityLabel> lenient_label(
    std::span<const int> ids_in_order, const TagOntology& ont,
    std::vector<Diagnostic>& diags, std::size_t pos) {
  std::vector<int> accepted;
  std::array<int, TagOntology::kLevels> per_level{};
  for (int id : ids_in_order) {
    if (std::find(accepted.begin(), accepted.end(), id) != accepted.end()) {
      diags.push_back({pos, "duplicate tag '" + ont.tag(id).name + "' dropped"});
      continue;
    }
    const int lvl = ont.tag(id).level;
    if (per_level[lvl - 1] >= ont.cardinality(lvl).max) {
      diags.push_back(
          {pos, "conflicting tag '" + ont.tag(id).name + "' dropped"});
      continue;
    }
    accepted.push_back(id);
    per_level[lvl - 1]++;
  }
  if (accepted.empty()) return std::nullopt;
  std::sort(accepted.begin(), accepted.end(), [&](int a, int b) {
    if (ont.tag(a).level != ont.tag(b).level)
      return ont.tag(a).level < ont.tag(b).level;
    return ont.order_index(a) < ont.order_index(b);
  });
  return EntityLabel{std::move(accepted)};
}

}  // namespace detail

// --- Encoding ----------------------------------------------------------------

inline TaggedString encode(std::span<const Word> words, EncodingScheme scheme,
                           const TagOntology& ont,
                           const CodecOptions& opts = {}) {
  for (const Word& w : words) {
    if (w.label && !is_canonical(*w.label, ont))
      throw error("non-canonical label on word '" + w.text + "'");
  }
  std::vector<std::string> units;
  units.reserve(words.size() * 2);

  switch (scheme) {
    case EncodingScheme::before:
      for (const Word& w : words) {
        if (!w.label) {
          units.push_back(w.text);
          continue;
        }
        std::string tags;
        const auto& comps = w.label->components;
        for (auto it = comps.rbegin(); it != comps.rend(); ++it)
          tags += utf8::of(ont.tag(*it).token);
        if (opts.scheme1_tag_word_space) {
          units.push_back(std::move(tags));
          units.push_back(w.text);
        } else {
          units.push_back(tags + w.text);
        }
      }
      break;

    case EncodingScheme::after:
      for (const Word& w : words) {
        std::string unit = w.text;
        if (w.label)
          for (int id : w.label->components) unit += utf8::of(ont.tag(id).token);
        units.push_back(std::move(unit));
      }
      break;

    case EncodingScheme::open_close:
      for (const Word& w : words) {
        if (!w.label) {
          units.push_back(w.text);
          continue;
        }
        const auto& comps = w.label->components;
        for (int id : comps) units.push_back(detail::open_marker(id, ont));
        units.push_back(w.text);
        for (auto it = comps.rbegin(); it != comps.rend(); ++it)
          units.push_back(detail::close_marker(*it, ont, opts));
      }
      break;

    case EncodingScheme::open_close_nested: {
      std::vector<int> open;  // the currently open label path, coarse first
      for (const Word& w : words) {
        const std::vector<int> cur =
            w.label ? w.label->components : std::vector<int>{};
        std::size_t common = 0;
        while (common < open.size() && common < cur.size() &&
               open[common] == cur[common])
          ++common;
        for (std::size_t k = open.size(); k > common; --k)
          units.push_back(detail::close_marker(open[k - 1], ont, opts));
        for (std::size_t k = common; k < cur.size(); ++k)
          units.push_back(detail::open_marker(cur[k], ont));
        units.push_back(w.text);
        open = cur;
      }
      for (std::size_t k = open.size(); k > 0; --k)
        units.push_back(detail::close_marker(open[k - 1], ont, opts));
      break;
    }

    case EncodingScheme::combined_after:
      for (const Word& w : words) {
        std::string unit = w.text;
        if (w.label) unit += "<" + composite_name(*w.label, ont) + ">";
        units.push_back(std::move(unit));
      }
      break;
  }
  return TaggedString{join(units, " "), scheme};
}

// --- Decoding ----------------------------------------------------------------

namespace detail {

inline std::optional<EntityLabel> strict_label(std::vector<int> ids,
                                               const TagOntology& ont) {
  if (ids.empty()) return std::nullopt;
  return canonical_label(ids, ont);
}

inline DecodeResult decode_separate_tags(const TaggedString& ts,
                                         DecodeMode mode,
                                         const TagOntology& ont) {
  const bool before = ts.scheme == EncodingScheme::before;
  const bool combined = ts.scheme == EncodingScheme::combined_after;
  DecodeResult out;
  std::vector<int> pending;  // scheme 1: tags waiting for their word
  std::size_t pending_pos = 0;

  for (const TextUnit& unit : split_ws_offsets(ts.text)) {
    if (is_layout_marker(unit.text)) {
      if (mode == DecodeMode::strict)
        throw error("unexpected layout marker '" + unit.text + "'");
      continue;  // layout structure is not part of word decoding
    }
    if (mode == DecodeMode::strict && detail::looks_like_unknown_marker(unit.text))
      throw error("unknown token in '" + unit.text + "'");

    detail::ExtractResult ex =
        detail::extract_tags(unit.text, combined, ont);

    if (mode == DecodeMode::strict) {
      if (ex.had_unknown) throw error("unknown token in '" + unit.text + "'");
      if (ex.text.empty() && !ex.ids.empty()) {
        if (before) {
          if (!pending.empty())
            throw error("tag token adjacent to no word at byte " +
                        std::to_string(unit.offset));
          pending = std::move(ex.ids);
          pending_pos = unit.offset;
          continue;
        }
        throw error("tag token adjacent to no word at byte " +
                    std::to_string(unit.offset));
      }
      if (ex.tokens_outside_run)
        throw error("tag token inside word at byte " +
                    std::to_string(unit.offset));
      if (detail::contains_composite_marker(ex.text, ont))
        throw error("tag marker inside word at byte " +
                    std::to_string(unit.offset));
      std::vector<int> ids = std::move(pending);
      pending.clear();
      ids.insert(ids.end(), ex.ids.begin(), ex.ids.end());
      out.words.push_back({std::move(ex.text), detail::strict_label(std::move(ids), ont)});
    } else {
      if (ex.had_unknown)
        out.diagnostics.push_back({unit.offset, "unknown token removed"});
      if (ex.text.empty()) {
        if (ex.ids.empty()) continue;  // unit was pure garbage, already noted
        if (before) {
          pending.insert(pending.end(), ex.ids.begin(), ex.ids.end());
          pending_pos = unit.offset;
        } else if (!out.words.empty()) {
          // tags with no word of their own bind to the previous word
          std::vector<int> ids;
          if (out.words.back().label) ids = out.words.back().label->components;
          ids.insert(ids.end(), ex.ids.begin(), ex.ids.end());
          out.diagnostics.push_back(
              {unit.offset, "detached tags merged into previous word"});
          out.words.back().label =
              detail::lenient_label(ids, ont, out.diagnostics, unit.offset);
        } else {
          out.diagnostics.push_back(
              {unit.offset, "detached tags with no word dropped"});
        }
        continue;
      }
      std::vector<int> ids = std::move(pending);
      pending.clear();
      ids.insert(ids.end(), ex.ids.begin(), ex.ids.end());
      out.words.push_back(
          {std::move(ex.text),
           detail::lenient_label(ids, ont, out.diagnostics, unit.offset)});
    }
  }
  if (!pending.empty()) {
    if (mode == DecodeMode::strict)
      throw error("tag token adjacent to no word at byte " +
                  std::to_string(pending_pos));
    out.diagnostics.push_back(
        {pending_pos, "detached tags with no word dropped"});
  }
  return out;
}

inline DecodeResult decode_open_close(const TaggedString& ts, DecodeMode mode,
                                      const TagOntology& ont) {
  DecodeResult out;
  std::vector<int> stack;  // open tags, in open order

  for (const TextUnit& unit : split_ws_offsets(ts.text)) {
    if (is_layout_marker(unit.text)) {
      if (mode == DecodeMode::strict)
        throw error("unexpected layout marker '" + unit.text + "'");
      continue;
    }
    if (auto m = detail::parse_entity_marker(unit.text, ont)) {
      if (!m->closing) {
        if (std::find(stack.begin(), stack.end(), m->tag_id) != stack.end()) {
          if (mode == DecodeMode::strict)
            throw error("duplicate open marker '" + ont.tag(m->tag_id).name +
                        "' at byte " + std::to_string(unit.offset));
          out.diagnostics.push_back(
              {unit.offset,
               "duplicate open marker '" + ont.tag(m->tag_id).name + "' ignored"});
        } else {
          stack.push_back(m->tag_id);
        }
      } else {
        auto it = std::find(stack.rbegin(), stack.rend(), m->tag_id);
        if (it == stack.rend()) {
          if (mode == DecodeMode::strict)
            throw error("orphan close marker '" + ont.tag(m->tag_id).name +
                        "' at byte " + std::to_string(unit.offset));
          out.diagnostics.push_back(
              {unit.offset,
               "orphan close marker '" + ont.tag(m->tag_id).name + "' dropped"});
        } else {
          if (it != stack.rbegin()) {
            if (mode == DecodeMode::strict)
              throw error("improperly nested close marker '" +
                          ont.tag(m->tag_id).name + "' at byte " +
                          std::to_string(unit.offset));
            out.diagnostics.push_back(
                {unit.offset, "out-of-order close marker '" +
                                  ont.tag(m->tag_id).name + "' recovered"});
          }
          stack.erase(std::next(it).base());
        }
      }
      continue;
    }
    if (mode == DecodeMode::strict && detail::looks_like_unknown_marker(unit.text))
      throw error("unknown token in '" + unit.text + "'");

    detail::ExtractResult ex = detail::extract_tags(unit.text, false, ont);
    if (mode == DecodeMode::strict) {
      if (ex.had_unknown) throw error("unknown token in '" + unit.text + "'");
      if (!ex.ids.empty())
        throw error("tag token inside word at byte " +
                    std::to_string(unit.offset));
      if (detail::contains_composite_marker(ex.text, ont))
        throw error("tag marker inside word at byte " +
                    std::to_string(unit.offset));
      out.words.push_back(
          {std::move(ex.text), detail::strict_label(stack, ont)});
    } else {
      if (ex.had_unknown)
        out.diagnostics.push_back({unit.offset, "unknown token removed"});
      if (ex.text.empty()) {
        if (!ex.ids.empty())
          out.diagnostics.push_back({unit.offset, "stray tag token dropped"});
        continue;
      }
      std::vector<int> ids = stack;
      if (!ex.ids.empty()) {
        out.diagnostics.push_back(
            {unit.offset, "embedded tag token merged into word label"});
        ids.insert(ids.end(), ex.ids.begin(), ex.ids.end());
      }
      out.words.push_back(
          {std::move(ex.text),
           detail::lenient_label(ids, ont, out.diagnostics, unit.offset)});
    }
  }
  if (!stack.empty()) {
    if (mode == DecodeMode::strict)
      throw error("unclosed marker '" + ont.tag(stack.back()).name +
                  "' at end of text");
    for (int id : stack)
      out.diagnostics.push_back(
          {ts.text.size(), "unclosed marker '" + ont.tag(id).name +
                               "' applied to end of text"});
  }
  return out;
}

}  // namespace detail

// Decodes a tagged string back into labeled words.
//
// STRICT accepts exactly the encoder's output shape and throws tagrec::error
// otherwise; decode(encode(w), strict) is the identity. LENIENT is total on
// arbitrary UTF-8: unclosed markers apply to every following word until
// closed or end of text, orphan closes are dropped, conflicting per-word tag
// sets lose their newest tag, and every repair lands in `diagnostics`.
inline DecodeResult decode(const TaggedString& ts, DecodeMode mode,
                           const TagOntology& ont,
                           const CodecOptions& opts = {}) {
  DecodeResult out;
  switch (ts.scheme) {
    case EncodingScheme::before:
    case EncodingScheme::after:
    case EncodingScheme::combined_after:
      out = detail::decode_separate_tags(ts, mode, ont);
      break;
    case EncodingScheme::open_close:
    case EncodingScheme::open_close_nested:
      out = detail::decode_open_close(ts, mode, ont);
      break;
  }
  if (mode == DecodeMode::strict) {
    // The parse above validates tokens and nesting; this pins the rest of
    // the encoder contract (tag order, marker placement, spacing).
    const TaggedString back = encode(out.words, ts.scheme, ont, opts);
    if (back.text != ts.text)
      throw error("input is not canonical encoder output for scheme " +
                  std::to_string(static_cast<int>(ts.scheme)));
  }
  return out;
}

// decode then re-encode. Converting to the same scheme in strict mode is the
// identity; in lenient mode it canonicalizes the input.
inline TaggedString convert(const TaggedString& ts, EncodingScheme to,
                            DecodeMode mode, const TagOntology& ont,
                            const CodecOptions& opts = {}) {
  DecodeResult dec = decode(ts, mode, ont, opts);
  return encode(dec.words, to, ont, opts);
}

// Plain text of a tagged string: every entity tag, combined marker, and
// layout marker removed, whitespace collapsed to single spaces. Total on
// malformed input and equal to the plain text of the lenient decode.
inline std::string strip_tags(const TaggedString& ts, const TagOntology& ont,
                              const CodecOptions& opts = {}) {
  DecodeResult dec = decode(ts, DecodeMode::lenient, ont, opts);
  return plain_text(dec.words);
}

// --- BIO ---------------------------------------------------------------------

// One (word text, BIO tag) pair per word; tags are "O" or "B-"/"I-" plus the
// composite category name.
struct BioSequence {
  std::vector<std::pair<std::string, std::string>> items;

  bool operator==(const BioSequence& o) const { return items == o.items; }
};

inline BioSequence to_bio(std::span<const Word> words, const TagOntology& ont) {
  BioSequence seq;
  seq.items.reserve(words.size());
  const Word* prev = nullptr;
  for (const Word& w : words) {
    if (!w.label) {
      seq.items.emplace_back(w.text, "O");
    } else {
      const bool cont = prev && prev->label && *prev->label == *w.label;
      seq.items.emplace_back(
          w.text, (cont ? "I-" : "B-") + composite_name(*w.label, ont));
    }
    prev = &w;
  }
  return seq;
}

// Checks the structural invariant: an I-X may only follow B-X or I-X.
inline bool bio_valid(const BioSequence& seq) {
  std::string prev = "O";
  for (const auto& [text, tag] : seq.items) {
    if (tag.rfind("I-", 0) == 0) {
      const std::string cat = tag.substr(2);
      if (prev != "B-" + cat && prev != "I-" + cat) return false;
    }
    prev = tag;
  }
  return true;
}

}  // namespace tagrec

#endif  // TAGREC_CODECS_HPP_
