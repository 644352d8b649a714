#include "oele/causal_map.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "oele/error.hpp"

namespace oele {

std::string_view to_string(Sign s) { return s == Sign::Increase ? "+" : "-"; }

std::string_view to_string(Marking m) {
  switch (m) {
    case Marking::Unmarked: return "unmarked";
    case Marking::MarkedCorrect: return "correct";
    case Marking::MarkedCouldBeWrong: return "wrong";
  }
  return "unmarked";
}

Sign parse_sign(std::string_view s) {
  if (s == "+") return Sign::Increase;
  if (s == "-") return Sign::Decrease;
  throw Error("invalid sign '" + std::string(s) + "' (expected + or -)");
}

Marking parse_marking(std::string_view s) {
  if (s == "unmarked") return Marking::Unmarked;
  if (s == "correct") return Marking::MarkedCorrect;
  if (s == "wrong") return Marking::MarkedCouldBeWrong;
  throw Error("invalid marking '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// CausalMap

const CausalLink* CausalMap::find_link(const std::string& source,
                                       const std::string& target) const {
  auto it = links_.find({source, target});
  return it == links_.end() ? nullptr : &it->second;
}

void CausalMap::add_concept(Concept c) {
  if (c.id.empty()) throw InvalidMap("concept id must be nonempty");
  if (concepts_.contains(c.id)) throw InvalidMap("duplicate concept '" + c.id + "'");
  auto id = c.id;
  concepts_.emplace(std::move(id), std::move(c));
}

void CausalMap::remove_concept(const std::string& id) {
  if (!concepts_.erase(id)) throw UnknownConcept(id);
  std::erase_if(links_, [&](const auto& kv) {
    return kv.first.first == id || kv.first.second == id;
  });
}

void CausalMap::add_link(CausalLink link) {
  if (!concepts_.contains(link.source)) throw UnknownConcept(link.source);
  if (!concepts_.contains(link.target)) throw UnknownConcept(link.target);
  if (link.source == link.target) throw InvalidMap("self-loop on '" + link.source + "'");
  LinkKey key{link.source, link.target};
  if (links_.contains(key)) {
    throw InvalidMap("duplicate link '" + link.source + "' -> '" + link.target + "'");
  }
  links_.emplace(std::move(key), std::move(link));
}

void CausalMap::remove_link(const std::string& source, const std::string& target) {
  if (!links_.erase({source, target})) throw UnknownLink(source, target);
}

void CausalMap::replace_link(const CausalLink& link) {
  auto it = links_.find({link.source, link.target});
  if (it == links_.end()) throw UnknownLink(link.source, link.target);
  it->second = link;
}

std::vector<std::string> CausalMap::concept_ids() const {
  std::vector<std::string> ids;
  ids.reserve(concepts_.size());
  for (const auto& [id, c] : concepts_) ids.push_back(id);
  return ids;
}

// ---------------------------------------------------------------------------
// ExpertMap

ExpertMap::ExpertMap(CausalMap map, std::vector<Page> pages) : map_(std::move(map)) {
  for (auto& p : pages) {
    if (pages_.contains(p.id)) throw InvalidMap("duplicate page '" + p.id + "'");
    auto id = p.id;
    pages_.emplace(std::move(id), std::move(p));
  }
  for (const auto& [key, link] : map_.links()) {
    if (!link.source_page) {
      throw InvalidMap("expert link '" + key.first + "' -> '" + key.second +
                       "' has no source page");
    }
    if (!pages_.contains(*link.source_page)) {
      throw InvalidMap("expert link '" + key.first + "' -> '" + key.second +
                       "' names unknown page '" + *link.source_page + "'");
    }
    page_links_[*link.source_page].push_back(key);
  }
  for (const auto& [id, page] : pages_) {
    if (!page_links_.contains(id)) throw InvalidMap("page '" + id + "' supports no link");
  }
}

const std::vector<LinkKey>& ExpertMap::page_links(const std::string& page_id) const {
  static const std::vector<LinkKey> kNone;
  auto it = page_links_.find(page_id);
  return it == page_links_.end() ? kNone : it->second;
}

std::vector<std::string> ExpertMap::section_concepts(const std::string& section) const {
  std::vector<std::string> ids;
  for (const auto& [id, c] : map_.concepts()) {
    if (c.section == section) ids.push_back(id);
  }
  return ids;
}

std::vector<std::string> ExpertMap::sections() const {
  std::set<std::string> s;
  for (const auto& [id, c] : map_.concepts()) s.insert(c.section);
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Map document

namespace {

bool is_bare_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
         c == ':' || c == '+' || c == '=' || c == '/';
}

struct Token {
  std::string text;
  bool quoted = false;
};

std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '#') {
      break;
    } else if (c == '"') {
      Token t{"", true};
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char d = line[i++];
        if (d == '\\' && i < line.size()) {
          t.text.push_back(line[i++]);
        } else if (d == '"') {
          closed = true;
          break;
        } else {
          t.text.push_back(d);
        }
      }
      if (!closed) throw ParseError(line_no, "unterminated quoted string");
      out.push_back(std::move(t));
    } else if (is_bare_token_char(c)) {
      Token t;
      while (i < line.size() && is_bare_token_char(line[i])) t.text.push_back(line[i++]);
      out.push_back(std::move(t));
    } else {
      throw ParseError(line_no, std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void require_bare(const Token& t, std::size_t line_no, const char* what) {
  if (t.quoted || t.text.empty()) {
    throw ParseError(line_no, std::string(what) + " must be a bare identifier");
  }
}

}  // namespace

MapDocument parse_map_document(std::string_view text) {
  MapDocument doc;
  std::set<std::string> page_ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto tokens = tokenize(line, line_no);
    if (tokens.empty()) continue;
    const std::string& keyword = tokens[0].text;
    try {
      if (keyword == "concept") {
        if (tokens.size() != 4 || !tokens[3].quoted) {
          throw ParseError(line_no, "expected: concept <id> <section> \"<name>\"");
        }
        require_bare(tokens[1], line_no, "concept id");
        require_bare(tokens[2], line_no, "section id");
        doc.map.add_concept({tokens[1].text, tokens[3].text, tokens[2].text});
      } else if (keyword == "page") {
        if (tokens.size() != 3 || !tokens[2].quoted) {
          throw ParseError(line_no, "expected: page <id> \"<title>\"");
        }
        require_bare(tokens[1], line_no, "page id");
        if (!page_ids.insert(tokens[1].text).second) {
          throw ParseError(line_no, "duplicate page '" + tokens[1].text + "'");
        }
        doc.pages.push_back({tokens[1].text, tokens[2].text});
      } else if (keyword == "link") {
        if (tokens.size() < 4) {
          throw ParseError(line_no, "expected: link <source> <+|-> <target> [page=..] [mark=..]");
        }
        CausalLink link;
        require_bare(tokens[1], line_no, "link source");
        require_bare(tokens[3], line_no, "link target");
        link.source = tokens[1].text;
        link.target = tokens[3].text;
        link.sign = parse_sign(tokens[2].text);
        for (std::size_t k = 4; k < tokens.size(); ++k) {
          const std::string& attr = tokens[k].text;
          if (attr.starts_with("page=") && attr.size() > 5) {
            link.source_page = attr.substr(5);
          } else if (attr.starts_with("mark=")) {
            link.marking = parse_marking(attr.substr(5));
          } else {
            throw ParseError(line_no, "unknown link attribute '" + attr + "'");
          }
        }
        if (link.source_page && !page_ids.contains(*link.source_page)) {
          throw ParseError(line_no, "link names undeclared page '" + *link.source_page + "'");
        }
        doc.map.add_link(std::move(link));
      } else {
        throw ParseError(line_no, "unknown record '" + keyword + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return doc;
}

std::string format_map_document(const MapDocument& doc) {
  std::ostringstream os;
  for (const auto& [id, c] : doc.map.concepts()) {
    os << "concept " << id << ' ' << c.section << ' ' << quote(c.name) << '\n';
  }
  auto pages = doc.pages;
  std::sort(pages.begin(), pages.end(),
            [](const Page& a, const Page& b) { return a.id < b.id; });
  for (const auto& p : pages) os << "page " << p.id << ' ' << quote(p.title) << '\n';
  for (const auto& [key, l] : doc.map.links()) {
    os << "link " << l.source << ' ' << to_string(l.sign) << ' ' << l.target;
    if (l.source_page) os << " page=" << *l.source_page;
    if (l.marking != Marking::Unmarked) os << " mark=" << to_string(l.marking);
    os << '\n';
  }
  return os.str();
}

MapDocument load_map_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read map file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_map_document(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

ExpertMap load_expert_map(const std::string& path) {
  auto doc = load_map_document(path);
  try {
    return ExpertMap(std::move(doc.map), std::move(doc.pages));
  } catch (const InvalidMap& e) {
    throw InvalidMap(path + ": " + e.what());
  }
}

CausalMap load_causal_map(const std::string& path) { return load_map_document(path).map; }

void save_map_document(const std::string& path, const MapDocument& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write map file '" + path + "'");
  out << format_map_document(doc);
}

MapDocument to_document(const ExpertMap& expert) {
  MapDocument doc{expert.map(), {}};
  for (const auto& [id, p] : expert.pages()) doc.pages.push_back(p);
  return doc;
}

// ---------------------------------------------------------------------------
// Bundled domain pack

std::string_view default_expert_map_text() {
  static constexpr std::string_view kText =
      R"(# Thermoregulation domain pack: 12 concepts, 15 expert links.
concept blood_vessel_constriction cooling "Blood vessel constriction"
concept blood_vessel_dilation cooling "Blood vessel dilation"
concept body_temperature sensing "Body temperature"
concept evaporation cooling "Evaporation"
concept external_temperature sensing "External temperature"
concept heat_generation warming "Heat generation"
concept heat_loss sensing "Heat loss"
concept hypothalamus_response sensing "Hypothalamus response"
concept shivering warming "Shivering"
concept skin_blood_flow cooling "Blood flow to skin"
concept skin_contraction warming "Skin contraction"
concept sweating cooling "Sweating"
page heat_loss "Heat Loss"
page hypothalamus "The Hypothalamus"
page response_1 "Response 1: Skin Contraction"
page response_2 "Response 2: Sweating"
page response_3 "Response 3: Blood Vessels"
page response_4 "Response 4: Shivering"
link blood_vessel_constriction - skin_blood_flow page=response_3
link blood_vessel_dilation + skin_blood_flow page=response_3
link body_temperature + hypothalamus_response page=hypothalamus
link evaporation + heat_loss page=response_2
link external_temperature - heat_loss page=heat_loss
link heat_generation + body_temperature page=response_4
link heat_loss - body_temperature page=heat_loss
link hypothalamus_response + blood_vessel_dilation page=response_3
link hypothalamus_response - shivering page=response_4
link hypothalamus_response - skin_contraction page=response_1
link hypothalamus_response + sweating page=response_2
link shivering + heat_generation page=response_4
link skin_blood_flow + heat_loss page=response_3
link skin_contraction - heat_loss page=response_1
link sweating + evaporation page=response_2
)";
  return kText;
}

const ExpertMap& default_expert_map() {
  static const ExpertMap kExpert = [] {
    auto doc = parse_map_document(default_expert_map_text());
    return ExpertMap(std::move(doc.map), std::move(doc.pages));
  }();
  return kExpert;
}

}  // namespace oele
