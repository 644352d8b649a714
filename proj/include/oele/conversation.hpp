#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oele {

enum class ScaffoldKind {
  Hint1MarkCorrect,
  Hint2AssessByQuiz,
  Hint3MarkWrong,
  Hint4ShortcutLink,
  Hint5DebugFromMap,
  Hint6DebugFromRead,
  Enc1Praise,
  Enc2PraiseAndQuiz,
  Enc3Reassure,
};

inline constexpr std::array<ScaffoldKind, 9> kAllScaffoldKinds = {
    ScaffoldKind::Hint1MarkCorrect,  ScaffoldKind::Hint2AssessByQuiz,
    ScaffoldKind::Hint3MarkWrong,    ScaffoldKind::Hint4ShortcutLink,
    ScaffoldKind::Hint5DebugFromMap, ScaffoldKind::Hint6DebugFromRead,
    ScaffoldKind::Enc1Praise,        ScaffoldKind::Enc2PraiseAndQuiz,
    ScaffoldKind::Enc3Reassure};

enum class Agent { MrDavis, Betty };

// Short names: "Hint1" ... "Enc3".
std::string_view to_string(ScaffoldKind k);
std::string_view to_string(Agent a);
ScaffoldKind parse_scaffold_kind(std::string_view s);
Agent agent_of(ScaffoldKind k);
inline std::size_t index_of(ScaffoldKind k) { return static_cast<std::size_t>(k); }

struct ConversationResponse {
  std::string text;
  std::optional<std::string> next;  // nullopt exits the conversation
};

struct ConversationNode {
  std::string id;
  std::string prompt;  // may contain {concept}, {link}, {page} placeholders
  std::vector<ConversationResponse> responses;
};

// Acyclic prompt/response graph rooted at root(). Every node offers an exit
// and every node is reachable from the root.
class ConversationTree {
 public:
  // Throws MalformedTree.
  ConversationTree(ScaffoldKind kind, std::string root, std::vector<ConversationNode> nodes);

  ScaffoldKind kind() const { return kind_; }
  const std::string& root() const { return root_; }
  const ConversationNode& node(const std::string& id) const;
  const std::map<std::string, ConversationNode>& nodes() const { return nodes_; }

 private:
  ScaffoldKind kind_;
  std::string root_;
  std::map<std::string, ConversationNode> nodes_;
};

struct TranscriptStep {
  std::string node;
  std::size_t response = 0;
  std::string prompt;  // rendered
  std::string reply;
  bool operator==(const TranscriptStep&) const = default;
};

using Transcript = std::vector<TranscriptStep>;
using TemplateVars = std::map<std::string, std::string>;

// Picks a response index for the node at the given depth (root = 0).
using Responder = std::function<std::size_t(const ConversationNode&, std::size_t depth)>;

// Always takes the first offered response.
std::size_t first_option_responder(const ConversationNode& node, std::size_t depth);
// Takes the first exit response.
std::size_t exit_responder(const ConversationNode& node, std::size_t depth);

std::string render_template(std::string_view text, const TemplateVars& vars);

// Walks from the root until the responder picks an exit. Throws
// MalformedTree if the responder picks an out-of-range response.
Transcript run_conversation(const ConversationTree& tree, const Responder& responder,
                            const TemplateVars& vars = {});

class TreeLibrary {
 public:
  TreeLibrary() = default;
  void add(ConversationTree tree);
  bool contains(ScaffoldKind k) const { return trees_.contains(k); }
  // Throws MalformedTree if no tree is registered for the kind.
  const ConversationTree& tree(ScaffoldKind k) const;
  const std::map<ScaffoldKind, ConversationTree>& trees() const { return trees_; }

 private:
  std::map<ScaffoldKind, ConversationTree> trees_;
};

// One tree per kind, with the agent dialogue used in the classroom system.
const TreeLibrary& bundled_trees();

// JSON schema: {"trees": [{"kind": "Hint5", "root": "n0", "nodes": [{"id":
// "n0", "prompt": "...", "responses": [{"text": "...", "next": "n1" | null}]}]}]}
// Throws ParseError or MalformedTree.
TreeLibrary parse_trees(std::string_view json_text);
std::string format_trees(const TreeLibrary& lib);
TreeLibrary load_trees(const std::string& path);

}  // namespace oele
