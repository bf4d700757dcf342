#include "socialpet/patterns.hpp"

#include <cctype>

#include "socialpet/errors.hpp"
#include "socialpet/util.hpp"

namespace socialpet {

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

std::string compose_comment(const std::string& comment,
                            const std::optional<CommunityLabel>& community) {
  if (!community.has_value()) return comment;
  std::string phrase = std::string(kCommunityPhrasePrefix) + community->render();
  if (comment.empty()) return phrase;
  return comment + " " + phrase;
}

std::string render_template(PatternId id, const std::string& augmented_comment,
                            const std::string& target, const std::string& mask_token) {
  if (id == PatternId::P1) {
    return "\"" + augmented_comment + "\" || " + mask_token + " \"" + target + "\"";
  }
  return augmented_comment + " || " + mask_token + " " + target;
}

std::string render_text(const ClozeInstance& instance, const std::string& comment) {
  std::string augmented = compose_comment(comment, instance.community);
  return render_template(instance.pvp.pattern_id, augmented, instance.target_text,
                         instance.mask_token);
}

}  // namespace

std::string_view to_string(PatternId id) {
  return id == PatternId::P1 ? "P1" : "P2";
}

PatternId parse_pattern_id(std::string_view text) {
  std::string lowered = to_lower_ascii(text);
  if (lowered == "p1") return PatternId::P1;
  if (lowered == "p2") return PatternId::P2;
  throw ValidationError("unknown pattern id: '" + std::string(text) + "'");
}

const std::string& Verbalizer::token(StanceLabel label) const {
  return label == StanceLabel::FAVOR ? favor_token : against_token;
}

StanceLabel Verbalizer::label(std::string_view token) const {
  if (token == favor_token) return StanceLabel::FAVOR;
  if (token == against_token) return StanceLabel::AGAINST;
  throw ValidationError("token '" + std::string(token) + "' is not in the verbalizer");
}

void Verbalizer::validate() const {
  if (favor_token.empty() || against_token.empty()) {
    throw ValidationError("verbalizer tokens must be non-empty");
  }
  if (favor_token == against_token) {
    throw ValidationError("verbalizer must map the two labels to distinct tokens");
  }
}

std::string PatternVerbalizerPair::id() const {
  return std::string(to_string(pattern_id));
}

ClozeInstance render(const Post& post, const PatternVerbalizerPair& pvp,
                     const std::optional<CommunityLabel>& community,
                     const std::string& mask_token) {
  pvp.verbalizer.validate();
  if (mask_token.empty()) {
    throw ValidationError("mask token must be non-empty");
  }
  if (pvp.social && !community.has_value()) {
    throw ContractViolation("social pattern requires a community for post " + post.post_id);
  }

  ClozeInstance instance;
  instance.pvp = pvp;
  instance.source_post_id = post.post_id;
  instance.community = pvp.social ? community : std::nullopt;
  instance.comment_text = trim(post.text);
  instance.target_text = post.target;
  instance.mask_token = mask_token;

  if (instance.comment_text.empty()) {
    throw ValidationError("post " + post.post_id + " has empty text after trimming");
  }

  instance.rendered_text = render_text(instance, instance.comment_text);
  if (count_occurrences(instance.rendered_text, mask_token) != 1) {
    throw ValidationError("rendering of post " + post.post_id +
                          " does not contain exactly one mask occurrence; the input likely "
                          "contains the mask token '" + mask_token + "'");
  }
  return instance;
}

std::string verbalize(StanceLabel label, const Verbalizer& verbalizer) {
  verbalizer.validate();
  return verbalizer.token(label);
}

StanceLabel unverbalize(std::string_view token, const Verbalizer& verbalizer) {
  verbalizer.validate();
  return verbalizer.label(token);
}

ClozeInstance truncate_for_budget(const ClozeInstance& instance, std::size_t token_budget,
                                  const TokenCounter& count_tokens) {
  if (token_budget == 0) {
    throw ConfigError("token budget must be positive");
  }
  if (count_tokens(instance.rendered_text) <= token_budget) {
    return instance;
  }

  if (count_tokens(render_text(instance, std::string())) > token_budget) {
    throw ConfigError("pattern scaffold alone exceeds the token budget of " +
                      std::to_string(token_budget) + " for post " + instance.source_post_id);
  }

  // Token end offsets in the original comment, so internal spacing survives.
  const std::string& comment = instance.comment_text;
  std::vector<std::size_t> token_ends;
  std::size_t i = 0;
  while (i < comment.size()) {
    while (i < comment.size() && std::isspace(static_cast<unsigned char>(comment[i]))) ++i;
    std::size_t start = i;
    while (i < comment.size() && !std::isspace(static_cast<unsigned char>(comment[i]))) ++i;
    if (i > start) token_ends.push_back(i);
  }

  // Largest prefix of comment tokens that still fits.
  std::size_t lo = 0;
  std::size_t hi = token_ends.size();  // hi is known not to fit, lo always fits
  while (lo < hi) {
    std::size_t mid = (lo + hi + 1) / 2;
    std::string candidate = comment.substr(0, token_ends[mid - 1]);
    if (count_tokens(render_text(instance, candidate)) <= token_budget) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }

  ClozeInstance trimmed = instance;
  trimmed.comment_text = lo == 0 ? std::string() : comment.substr(0, token_ends[lo - 1]);
  trimmed.rendered_text = render_text(trimmed, trimmed.comment_text);
  return trimmed;
}

}  // namespace socialpet
