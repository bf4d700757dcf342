#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "socialpet/corpus.hpp"

namespace socialpet {

struct UserNetwork {
  std::string user_id;
  std::set<std::string> followers;
  std::set<std::string> friends;
  std::set<std::string> liked_users;
};

enum class Polarity { SUPPORTER, OPPONENT };

Polarity polarity_for(StanceLabel stance);

struct CommunityLabel {
  std::string target;
  Polarity polarity = Polarity::SUPPORTER;

  // "<target> supporter" or "<target> opponent".
  std::string render() const;

  auto operator<=>(const CommunityLabel&) const = default;
};

// Aggregated member set over the few-shot authors of one polarity.
struct CommunityProfile {
  CommunityLabel label;
  std::set<std::string> members;            // union of aggregate_network over contributors
  std::set<std::string> contributing_users; // the few-shot authors
};

struct CommunityProfiles {
  CommunityProfile supporter;
  CommunityProfile opponent;
  std::vector<std::string> warnings;
};

// Per-user overlap diagnostics; `label` is the final decision.
struct CommunityInference {
  CommunityLabel label;
  std::size_t overlap_supporter = 0;
  std::size_t overlap_opponent = 0;
  bool tie_on_overlap = false;   // fell through to profile-size comparison
  bool tie_on_size = false;      // fell through to the fixed SUPPORTER fallback
};

using NetworkMap = std::map<std::string, UserNetwork>;

// JSON Lines: {"user_id": str, "followers": [str], "friends": [str], "likes": [str]}.
// Missing arrays are empty sets; self-ids are stripped; the first record wins
// on duplicate user_ids.
NetworkMap load_networks(const std::filesystem::path& path,
                         std::vector<std::string>* warnings = nullptr);

// N_j for a user: followers ∪ friends ∪ liked_users.
std::set<std::string> aggregate_network(const UserNetwork& net);

// Builds the supporter/opponent profiles from the destination few shots.
// Authors with shots of both stances go to their majority polarity and are
// excluded from both on an exact tie.
CommunityProfiles build_community_profiles(const std::vector<std::pair<Post, UserNetwork>>& shots,
                                           const std::string& destination);

// argmax over |N_j ∩ N_G|; ties fall to the larger profile, then SUPPORTER.
CommunityInference infer_community_explain(const std::set<std::string>& user_net,
                                           const CommunityProfile& supporter,
                                           const CommunityProfile& opponent);
CommunityLabel infer_community(const std::set<std::string>& user_net,
                               const CommunityProfile& supporter,
                               const CommunityProfile& opponent);

// |N_S ∩ N_O| / |N_S ∪ N_O|. Errors when both member sets are empty.
double jaccard_overlap(const CommunityProfile& supporter, const CommunityProfile& opponent);

}  // namespace socialpet
