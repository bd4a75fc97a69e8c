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

#ifndef TAGREC_ONTOLOGY_HPP_
#define TAGREC_ONTOLOGY_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "tagrec/text.hpp"

namespace tagrec {

// One entity sub-element: a node of the 4-level tag vocabulary.
struct Tag {
  int id = 0;                // stable, unique
  std::string name;          // lowercase snake_case identifier
  int level = 0;             // 1..4
  char32_t token = 0;        // reserved codepoint used in serialized text
  std::string display;       // human-readable
};

struct LevelCardinality {
  int min = 0;
  int max = 0;
};

// The eight page-structure markers. Unlike entity tags these are multi-byte
// ASCII literals, matching the published annotation format.
inline constexpr std::array<std::string_view, 8> kLayoutMarkers = {
    "<A>", "</A>", "<B>", "</B>", "<C>", "</C>", "<D>", "</D>"};

inline bool is_layout_marker(std::string_view s) {
  return std::find(kLayoutMarkers.begin(), kLayoutMarkers.end(), s) !=
         kLayoutMarkers.end();
}

// The tag vocabulary. Immutable after construction; declaration order within
// a level is the canonical intra-level order used everywhere downstream.
class TagOntology {
 public:
  static constexpr int kLevels = 4;

  // Cardinality rule for entity labels, per level. The defaults are the ones
  // every composite label in the source material satisfies: exactly one
  // level-1 tag, up to two level-2 tags, at most one level-3 tag, exactly one
  // level-4 tag. Overridable in ontology files.
  static constexpr std::array<LevelCardinality, kLevels> kDefaultCardinality =
      {{{1, 1}, {0, 2}, {0, 1}, {1, 1}}};

  TagOntology(std::vector<Tag> tags,
              std::array<LevelCardinality, kLevels> cardinality)
      : tags_(std::move(tags)), cardinality_(cardinality) {
    validate();
  }

  // The built-in default vocabulary: 24 tags over 4 levels (4 + 3 + 2 + 15).
  // Tokens are consecutive Private Use Area codepoints starting at U+E000 so
  // they can never collide with transcription text.
  static const TagOntology& built_in() {
    static const TagOntology ont = make_built_in();
    return ont;
  }

  static TagOntology from_json(std::string_view source);

  std::span<const Tag> tags() const { return tags_; }
  std::size_t size() const { return tags_.size(); }

  const Tag& tag(int id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw error("unknown tag id " + std::to_string(id));
    return tags_[it->second];
  }

  const Tag* find_name(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &tags_[it->second];
  }

  const Tag* find_token(char32_t cp) const {
    auto it = by_token_.find(cp);
    return it == by_token_.end() ? nullptr : &tags_[it->second];
  }

  bool is_tag_token(char32_t cp) const { return by_token_.count(cp) != 0; }

  // Position of a tag in declaration order; the intra-level tiebreak.
  std::size_t order_index(int id) const { return by_id_.at(id); }

  int level_count(int level) const {
    int n = 0;
    for (const Tag& t : tags_) n += (t.level == level);
    return n;
  }

  LevelCardinality cardinality(int level) const {
    return cardinality_[static_cast<std::size_t>(level - 1)];
  }

 private:
  static TagOntology make_built_in();
  void validate();

  std::vector<Tag> tags_;
  std::array<LevelCardinality, kLevels> cardinality_;
  std::unordered_map<int, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::unordered_map<char32_t, std::size_t> by_token_;
};

// One canonical composite entity label: component tag ids sorted coarse to
// fine (level ascending, declaration order within a level), no duplicates,
// cardinality-valid. Construct through canonical_label().
struct EntityLabel {
  std::vector<int> components;

  bool operator==(const EntityLabel& o) const {
    return components == o.components;
  }
  bool operator!=(const EntityLabel& o) const { return !(*this == o); }
  bool operator<(const EntityLabel& o) const {
    return components < o.components;
  }
};

inline void TagOntology::validate() {
  if (tags_.empty()) throw error("ontology has no tags");
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    const Tag& t = tags_[i];
    if (t.level < 1 || t.level > kLevels)
      throw error("tag '" + t.name + "': level " + std::to_string(t.level) +
                  " outside 1..4");
    if (t.name.empty()) throw error("tag with empty name");
    if (!by_id_.emplace(t.id, i).second)
      throw error("duplicate id " + std::to_string(t.id));
    if (!by_name_.emplace(t.name, i).second)
      throw error("duplicate name '" + t.name + "'");
    if (!by_token_.emplace(t.token, i).second)
      throw error("duplicate token for tag '" + t.name + "'");
    // Tokens must stay disjoint from the plain-text alphabet. ASCII is where
    // layout markers and transcription punctuation live, so it is rejected
    // outright; full corpus-wide disjointness is checked by `validate`.
    if (t.token < 0x80)
      throw error("tag '" + t.name +
                  "': token collides with layout tokens or ASCII text");
  }
  for (int lvl = 1; lvl <= kLevels; ++lvl) {
    LevelCardinality c = cardinality(lvl);
    if (c.min < 0 || c.max < c.min)
      throw error("invalid cardinality for level " + std::to_string(lvl));
  }
}

inline TagOntology TagOntology::make_built_in() {
  // 24 tags. Note that the source vocabulary prints one shared symbol for
  // departement and country; they are kept as distinct tags with distinct
  // tokens so no information is lost.
  static constexpr char32_t kBase = 0xE000;
  std::vector<Tag> tags;
  int id = 0;
  auto add = [&](const char* name, int level, const char* display) {
    tags.push_back(Tag{id, name, level, static_cast<char32_t>(kBase + id),
                       display});
    ++id;
  };
  add("administrative", 1, "Administrative");
  add("husband", 1, "Husband");
  add("wife", 1, "Wife");
  add("witness", 1, "Witness");
  add("father", 2, "Father");
  add("mother", 2, "Mother");
  add("ex_husband", 2, "Ex-husband");
  add("birth", 3, "Birth");
  add("residence", 3, "Residence");
  add("first_name", 4, "First name");
  add("family_name", 4, "Family name");
  add("age", 4, "Age");
  add("occupation", 4, "Occupation");
  add("street_number", 4, "Street number");
  add("street_type", 4, "Street type");
  add("street_name", 4, "Street name");
  add("city", 4, "City");
  add("departement", 4, "Departement");
  add("country", 4, "Country");
  add("day", 4, "Day");
  add("month", 4, "Month");
  add("year", 4, "Year");
  add("hour", 4, "Hour");
  add("minute", 4, "Minute");
  return TagOntology(std::move(tags), kDefaultCardinality);
}

inline TagOntology TagOntology::from_json(std::string_view source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(source);
  } catch (const nlohmann::json::exception& e) {
    throw error(std::string("malformed ontology file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("tags") || !j["tags"].is_array())
    throw error("malformed ontology file: missing 'tags' array");

  std::vector<Tag> tags;
  for (const auto& jt : j["tags"]) {
    Tag t;
    t.id = jt.at("id").get<int>();
    t.name = jt.at("name").get<std::string>();
    t.level = jt.at("level").get<int>();
    const std::string tok = jt.at("token").get<std::string>();
    std::u32string cps = utf8::decode(tok);
    if (cps.size() != 1)
      throw error("tag '" + t.name + "': token must be a single codepoint");
    t.token = cps[0];
    t.display = jt.value("display", t.name);
    tags.push_back(std::move(t));
  }

  std::array<LevelCardinality, kLevels> card = kDefaultCardinality;
  if (j.contains("level_cardinality")) {
    for (const auto& [key, val] : j["level_cardinality"].items()) {
      const int lvl = std::stoi(key);
      if (lvl < 1 || lvl > kLevels)
        throw error("level_cardinality key outside 1..4");
      if (!val.is_array() || val.size() != 2)
        throw error("level_cardinality values must be [min,max]");
      card[static_cast<std::size_t>(lvl - 1)] = {val[0].get<int>(),
                                                 val[1].get<int>()};
    }
  }
  return TagOntology(std::move(tags), card);
}

// Sorts and validates a set of tag ids into a canonical EntityLabel.
// Permutation-invariant; canonicalizing a canonical label is the identity.
inline EntityLabel canonical_label(std::span<const int> tag_ids,
                                   const TagOntology& ont) {
  if (tag_ids.empty()) throw error("empty label");
  std::vector<int> ids(tag_ids.begin(), tag_ids.end());
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const Tag& ta = ont.tag(a);
    const Tag& tb = ont.tag(b);
    if (ta.level != tb.level) return ta.level < tb.level;
    return ont.order_index(a) < ont.order_index(b);
  });
  std::array<int, TagOntology::kLevels> per_level{};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0 && ids[i] == ids[i - 1])
      throw error("duplicate component '" + ont.tag(ids[i]).name + "'");
    per_level[static_cast<std::size_t>(ont.tag(ids[i]).level - 1)]++;
  }
  for (int lvl = 1; lvl <= TagOntology::kLevels; ++lvl) {
    const int n = per_level[static_cast<std::size_t>(lvl - 1)];
    const LevelCardinality c = ont.cardinality(lvl);
    if (n < c.min)
      throw error("missing level-" + std::to_string(lvl) + " component");
    if (n > c.max)
      throw error("too many level-" + std::to_string(lvl) + " components");
  }
  return EntityLabel{std::move(ids)};
}

inline bool is_canonical(const EntityLabel& label, const TagOntology& ont) {
  try {
    return canonical_label(label.components, ont) == label;
  } catch (const error&) {
    return false;
  }
}

// Underscore-joined component names, coarse to fine. The combined single-tag
// encoding serializes labels this way.
inline std::string composite_name(const EntityLabel& label,
                                  const TagOntology& ont) {
  std::string out;
  for (std::size_t i = 0; i < label.components.size(); ++i) {
    if (i) out.push_back('_');
    out += ont.tag(label.components[i]).name;
  }
  return out;
}

// Inverse of composite_name. Tag names themselves contain underscores
// ("first_name"), so parsing is greedy longest-match over tag names.
inline EntityLabel parse_composite(std::string_view name,
                                   const TagOntology& ont) {
  std::vector<int> ids;
  std::size_t pos = 0;
  while (pos < name.size()) {
    const Tag* best = nullptr;
    for (const Tag& t : ont.tags()) {
      if (name.size() - pos < t.name.size()) continue;
      if (name.substr(pos, t.name.size()) != t.name) continue;
      const std::size_t end = pos + t.name.size();
      if (end != name.size() && name[end] != '_') continue;
      if (!best || t.name.size() > best->name.size()) best = &t;
    }
    if (!best)
      throw error("unknown component at '" + std::string(name.substr(pos)) +
                  "'");
    ids.push_back(best->id);
    pos += best->name.size();
    if (pos < name.size()) ++pos;  // skip '_'
  }
  return canonical_label(ids, ont);
}

}  // namespace tagrec

#endif  // TAGREC_ONTOLOGY_HPP_
