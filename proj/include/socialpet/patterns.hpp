#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "socialpet/corpus.hpp"
#include "socialpet/social_graph.hpp"

namespace socialpet {

// Appended verbatim between the comment and the community name in social mode.
inline constexpr std::string_view kCommunityPhrasePrefix = "I am in the community of ";

enum class PatternId { P1, P2 };

std::string_view to_string(PatternId id);
PatternId parse_pattern_id(std::string_view text);

// Label -> cloze token mapping. The default is the English verbalizer
// (FAVOR -> "Yes", AGAINST -> "No").
struct Verbalizer {
  std::string favor_token = "Yes";
  std::string against_token = "No";

  const std::string& token(StanceLabel label) const;
  StanceLabel label(std::string_view token) const;  // throws ValidationError
  void validate() const;                            // tokens must be distinct and non-empty
};

struct PatternVerbalizerPair {
  PatternId pattern_id = PatternId::P1;
  bool social = false;
  Verbalizer verbalizer;

  std::string id() const;  // "P1" / "P2"
};

struct ClozeInstance {
  std::string rendered_text;  // exactly one occurrence of mask_token
  PatternVerbalizerPair pvp;
  std::string source_post_id;
  std::optional<CommunityLabel> community;  // present iff pvp.social

  // Source parts kept so truncation can re-render.
  std::string comment_text;
  std::string target_text;
  std::string mask_token;
};

// Renders a post through one pattern-verbalizer pair.
//   P1: "a" || <mask> "b"        P2: a || <mask> b
// In social mode the community phrase is appended to the comment with a
// single joining space before templating.
ClozeInstance render(const Post& post, const PatternVerbalizerPair& pvp,
                     const std::optional<CommunityLabel>& community,
                     const std::string& mask_token);

std::string verbalize(StanceLabel label, const Verbalizer& verbalizer = {});
StanceLabel unverbalize(std::string_view token, const Verbalizer& verbalizer = {});

using TokenCounter = std::function<std::size_t(std::string_view)>;

// Trims the comment from its right end (at token boundaries) until the whole
// rendering fits token_budget. Scaffold, mask, target and community phrase
// are never trimmed; if they alone exceed the budget this is a ConfigError.
ClozeInstance truncate_for_budget(const ClozeInstance& instance, std::size_t token_budget,
                                  const TokenCounter& count_tokens);

}  // namespace socialpet
