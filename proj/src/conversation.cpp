#include "oele/conversation.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "oele/error.hpp"

namespace oele {

using nlohmann::json;

std::string_view to_string(ScaffoldKind k) {
  switch (k) {
    case ScaffoldKind::Hint1MarkCorrect: return "Hint1";
    case ScaffoldKind::Hint2AssessByQuiz: return "Hint2";
    case ScaffoldKind::Hint3MarkWrong: return "Hint3";
    case ScaffoldKind::Hint4ShortcutLink: return "Hint4";
    case ScaffoldKind::Hint5DebugFromMap: return "Hint5";
    case ScaffoldKind::Hint6DebugFromRead: return "Hint6";
    case ScaffoldKind::Enc1Praise: return "Enc1";
    case ScaffoldKind::Enc2PraiseAndQuiz: return "Enc2";
    case ScaffoldKind::Enc3Reassure: return "Enc3";
  }
  return "Hint1";
}

std::string_view to_string(Agent a) { return a == Agent::Betty ? "Betty" : "MrDavis"; }

ScaffoldKind parse_scaffold_kind(std::string_view s) {
  for (ScaffoldKind k : kAllScaffoldKinds) {
    if (to_string(k) == s) return k;
  }
  throw Error("unknown scaffold kind '" + std::string(s) + "'");
}

Agent agent_of(ScaffoldKind k) {
  switch (k) {
    case ScaffoldKind::Hint2AssessByQuiz:
    case ScaffoldKind::Enc1Praise:
    case ScaffoldKind::Enc3Reassure: return Agent::Betty;
    default: return Agent::MrDavis;
  }
}

ConversationTree::ConversationTree(ScaffoldKind kind, std::string root,
                                   std::vector<ConversationNode> nodes)
    : kind_(kind), root_(std::move(root)) {
  const std::string where = "tree " + std::string(to_string(kind)) + ": ";
  for (auto& n : nodes) {
    if (n.id.empty()) throw MalformedTree(where + "node with empty id");
    const std::string id = n.id;
    if (!nodes_.emplace(id, std::move(n)).second) {
      throw MalformedTree(where + "duplicate node '" + id + "'");
    }
  }
  if (!nodes_.contains(root_)) throw MalformedTree(where + "missing root '" + root_ + "'");
  for (const auto& [id, n] : nodes_) {
    bool has_exit = false;
    for (const auto& r : n.responses) {
      if (!r.next) {
        has_exit = true;
      } else if (!nodes_.contains(*r.next)) {
        throw MalformedTree(where + "node '" + id + "' points to unknown node '" + *r.next + "'");
      }
    }
    if (!has_exit) throw MalformedTree(where + "node '" + id + "' offers no exit");
  }

  // Reachability and acyclicity in one colored DFS.
  std::map<std::string, int> color;  // 1 = on stack, 2 = done
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    color[id] = 1;
    for (const auto& r : nodes_.at(id).responses) {
      if (!r.next) continue;
      int c = color[*r.next];
      if (c == 1) throw MalformedTree(where + "cycle through node '" + *r.next + "'");
      if (c == 0) visit(*r.next);
    }
    color[id] = 2;
  };
  visit(root_);
  for (const auto& [id, n] : nodes_) {
    if (color[id] != 2) throw MalformedTree(where + "node '" + id + "' unreachable from root");
  }
}

const ConversationNode& ConversationTree::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw MalformedTree("unknown node '" + id + "'");
  return it->second;
}

std::size_t first_option_responder(const ConversationNode&, std::size_t) { return 0; }

std::size_t exit_responder(const ConversationNode& node, std::size_t) {
  for (std::size_t i = 0; i < node.responses.size(); ++i) {
    if (!node.responses[i].next) return i;
  }
  return 0;
}

std::string render_template(std::string_view text, const TemplateVars& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      auto close = text.find('}', i);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

Transcript run_conversation(const ConversationTree& tree, const Responder& responder,
                            const TemplateVars& vars) {
  Transcript transcript;
  std::set<std::string> seen;
  std::optional<std::string> current = tree.root();
  while (current) {
    const ConversationNode& node = tree.node(*current);
    if (!seen.insert(node.id).second) throw MalformedTree("walk revisited '" + node.id + "'");
    std::size_t choice = responder(node, transcript.size());
    if (choice >= node.responses.size()) {
      throw MalformedTree("responder picked option " + std::to_string(choice) + " at node '" +
                          node.id + "'");
    }
    const auto& r = node.responses[choice];
    transcript.push_back({node.id, choice, render_template(node.prompt, vars), r.text});
    current = r.next;
  }
  return transcript;
}

void TreeLibrary::add(ConversationTree tree) {
  ScaffoldKind k = tree.kind();
  trees_.insert_or_assign(k, std::move(tree));
}

const ConversationTree& TreeLibrary::tree(ScaffoldKind k) const {
  auto it = trees_.find(k);
  if (it == trees_.end()) {
    throw MalformedTree("no conversation tree for " + std::string(to_string(k)));
  }
  return it->second;
}

namespace {

constexpr std::string_view kBundledTrees = R"json({"trees": [
 {"kind": "Hint1", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "If Betty got an answer graded correct, remember to mark those links as 'correct' in the map. This can help you keep track of what you have taught her correctly so far. Do you know how to mark links?",
   "responses": [{"text": "No, show me how.", "next": "n1"}, {"text": "Yes, thanks.", "next": null}]},
  {"id": "n1", "prompt": "Open the quiz results, check which links Betty used for a correct answer, then click each link and choose 'Mark as correct'.",
   "responses": [{"text": "Got it.", "next": null}]}]},
 {"kind": "Hint2", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "Hi, I think you just added a causal link on your map after looking at the science book. Do you think I am ready for a quiz now?",
   "responses": [{"text": "Why should you take a quiz?", "next": "n1"}, {"text": "Not yet.", "next": null}]},
  {"id": "n1", "prompt": "A quiz shows which of my answers are right and which are wrong, so we can find the links that need fixing.",
   "responses": [{"text": "OK, let's try a quiz.", "next": null}]}]},
 {"kind": "Hint3", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "From the quiz results, looks like Betty may have some incorrect links on her map. You can mark those links as 'could be wrong'. Do you want to know more?",
   "responses": [{"text": "Yes, tell me more.", "next": "n1"}, {"text": "No, thanks.", "next": null}]},
  {"id": "n1", "prompt": "Marking a link as 'could be wrong' reminds you to check it later. The link {link} is a good place to start.",
   "responses": [{"text": "Thanks.", "next": null}]}]},
 {"kind": "Hint4", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "From the quiz, it seems you may have an incorrect shortcut link on your map. Do you want to know more about shortcut links?",
   "responses": [{"text": "Yes, what is a shortcut link?", "next": "n1"}, {"text": "No, thanks.", "next": null}]},
  {"id": "n1", "prompt": "A shortcut link goes straight from one concept to another and skips the concepts in between. Take another look at the link {link}.",
   "responses": [{"text": "Got it.", "next": null}]}]},
 {"kind": "Hint5", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "Betty got some quiz questions wrong, so some links on her map need fixing. Do you want a hint?",
   "responses": [{"text": "Tell me more.", "next": "n1"}, {"text": "No, thanks.", "next": null}]},
  {"id": "n1", "prompt": "One of the links going out of '{concept}' is wrong. Try to find out which one it is.",
   "responses": [{"text": "Tell me more.", "next": "n2"}, {"text": "I'll look for it.", "next": null}]},
  {"id": "n2", "prompt": "Check the link {link} against what the science book says.",
   "responses": [{"text": "Thanks.", "next": null}]}]},
 {"kind": "Hint6", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "Some of Betty's answers were wrong because her map is missing information. Do you want a hint about where to read?",
   "responses": [{"text": "Tell me more.", "next": "n1"}, {"text": "No, thanks.", "next": null}]},
  {"id": "n1", "prompt": "You are missing a link that comes out of '{concept}'. Try reading up on Page '{page}' and see if you can find the link.",
   "responses": [{"text": "Thanks.", "next": null}]}]},
 {"kind": "Enc1", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "Wow! I think I have some correct links on the map. This is fun! Thanks, {student}.",
   "responses": [{"text": "You're welcome!", "next": null}]}]},
 {"kind": "Enc2", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "Looks like you're doing a good job teaching correct causal links to Betty. Make sure you check her progress by asking her to take a quiz",
   "responses": [{"text": "How do I do that?", "next": "n1"}, {"text": "OK.", "next": null}]},
  {"id": "n1", "prompt": "Click the quiz button and pick a section, or quiz Betty on everything.",
   "responses": [{"text": "Thanks.", "next": null}]}]},
 {"kind": "Enc3", "root": "n0", "nodes": [
  {"id": "n0", "prompt": "Sometimes I find all this a little tricky. But with you to teach me, I'm sure we can do it.",
   "responses": [{"text": "We can do it!", "next": null}]}]}
]})json";

}  // namespace

TreeLibrary parse_trees(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("conversation trees: ") + e.what());
  }
  TreeLibrary lib;
  try {
    for (const auto& t : j.at("trees")) {
      std::vector<ConversationNode> nodes;
      for (const auto& n : t.at("nodes")) {
        ConversationNode node{n.at("id").get<std::string>(), n.at("prompt").get<std::string>(),
                              {}};
        for (const auto& r : n.at("responses")) {
          ConversationResponse resp{r.at("text").get<std::string>(), std::nullopt};
          if (r.contains("next") && !r.at("next").is_null()) {
            resp.next = r.at("next").get<std::string>();
          }
          node.responses.push_back(std::move(resp));
        }
        nodes.push_back(std::move(node));
      }
      lib.add(ConversationTree(parse_scaffold_kind(t.at("kind").get<std::string>()),
                               t.at("root").get<std::string>(), std::move(nodes)));
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("conversation trees: ") + e.what());
  }
  return lib;
}

std::string format_trees(const TreeLibrary& lib) {
  json trees = json::array();
  for (const auto& [kind, tree] : lib.trees()) {
    json nodes = json::array();
    for (const auto& [id, n] : tree.nodes()) {
      json responses = json::array();
      for (const auto& r : n.responses) {
        responses.push_back({{"text", r.text}, {"next", r.next ? json(*r.next) : json(nullptr)}});
      }
      nodes.push_back({{"id", id}, {"prompt", n.prompt}, {"responses", responses}});
    }
    trees.push_back({{"kind", to_string(kind)}, {"root", tree.root()}, {"nodes", nodes}});
  }
  return json{{"trees", trees}}.dump(2) + "\n";
}

TreeLibrary load_trees(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read conversation trees '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trees(ss.str());
}

const TreeLibrary& bundled_trees() {
  static const TreeLibrary kLib = parse_trees(kBundledTrees);
  return kLib;
}

}  // namespace oele
