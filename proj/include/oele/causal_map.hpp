#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oele {

enum class Sign { Increase, Decrease };
enum class Marking { Unmarked, MarkedCorrect, MarkedCouldBeWrong };

inline Sign operator*(Sign a, Sign b) {
  return a == b ? Sign::Increase : Sign::Decrease;
}
inline Sign flip(Sign s) {
  return s == Sign::Increase ? Sign::Decrease : Sign::Increase;
}

std::string_view to_string(Sign s);      // "+" / "-"
std::string_view to_string(Marking m);   // "unmarked" / "correct" / "wrong"
Sign parse_sign(std::string_view s);
Marking parse_marking(std::string_view s);

struct Concept {
  std::string id;
  std::string name;
  std::string section;

  bool operator==(const Concept&) const = default;
};

struct CausalLink {
  std::string source;
  std::string target;
  Sign sign = Sign::Increase;
  Marking marking = Marking::Unmarked;
  std::optional<std::string> source_page;

  std::pair<std::string, std::string> endpoints() const { return {source, target}; }
  bool operator==(const CausalLink&) const = default;
};

using LinkKey = std::pair<std::string, std::string>;

// Directed signed graph. Concepts and links are kept in id order so every
// traversal is deterministic.
class CausalMap {
 public:
  CausalMap() = default;

  const std::map<std::string, Concept>& concepts() const { return concepts_; }
  const std::map<LinkKey, CausalLink>& links() const { return links_; }

  bool has_concept(const std::string& id) const { return concepts_.contains(id); }
  const CausalLink* find_link(const std::string& source, const std::string& target) const;

  // Throws InvalidMap on duplicate id.
  void add_concept(Concept c);
  // Removes the concept and every incident link. Throws UnknownConcept.
  void remove_concept(const std::string& id);
  // Throws UnknownConcept for a missing endpoint and InvalidMap for a
  // self-loop or an existing (source, target) pair.
  void add_link(CausalLink link);
  // Throws UnknownLink.
  void remove_link(const std::string& source, const std::string& target);
  void replace_link(const CausalLink& link);

  std::vector<std::string> concept_ids() const;
  std::size_t link_count() const { return links_.size(); }

  bool operator==(const CausalMap& other) const {
    return concepts_ == other.concepts_ && links_ == other.links_;
  }

 private:
  std::map<std::string, Concept> concepts_;
  std::map<LinkKey, CausalLink> links_;
};

struct Page {
  std::string id;
  std::string title;

  bool operator==(const Page&) const = default;
};

// Ground-truth map. Every link names the page that states it; the page ->
// supported links index is derived from those annotations.
class ExpertMap {
 public:
  ExpertMap() = default;
  // Throws InvalidMap when a link lacks a source page, names an unknown page,
  // or a page supports no link.
  ExpertMap(CausalMap map, std::vector<Page> pages);

  const CausalMap& map() const { return map_; }
  const std::map<std::string, Page>& pages() const { return pages_; }
  // Links supported by a page, ordered by (source, target). Empty if unknown.
  const std::vector<LinkKey>& page_links(const std::string& page_id) const;
  std::vector<std::string> section_concepts(const std::string& section) const;
  std::vector<std::string> sections() const;

 private:
  CausalMap map_;
  std::map<std::string, Page> pages_;
  std::map<std::string, std::vector<LinkKey>> page_links_;
};

// Line-oriented map file:
//
//   # comment
//   concept <id> <section> "<display name>"
//   page <id> "<title>"
//   link <source> <+|-> <target> [page=<page id>] [mark=unmarked|correct|wrong]
//
// Tokens are whitespace separated; names and titles are double quoted with
// \" and \\ escapes. Links may only reference concepts declared earlier.
struct MapDocument {
  CausalMap map;
  std::vector<Page> pages;
};

// Throws ParseError naming the 1-based line of the first violation.
MapDocument parse_map_document(std::string_view text);
// Canonical form: concepts by id, then pages by id, then links by endpoints.
std::string format_map_document(const MapDocument& doc);

MapDocument load_map_document(const std::string& path);
ExpertMap load_expert_map(const std::string& path);
CausalMap load_causal_map(const std::string& path);
void save_map_document(const std::string& path, const MapDocument& doc);

MapDocument to_document(const ExpertMap& expert);

// Bundled 12-concept, 15-link thermoregulation domain.
const ExpertMap& default_expert_map();
std::string_view default_expert_map_text();

}  // namespace oele
