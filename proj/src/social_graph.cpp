#include "socialpet/social_graph.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "socialpet/errors.hpp"
#include "socialpet/util.hpp"

namespace socialpet {

namespace {

std::set<std::string> read_id_array(const nlohmann::json& record, const char* field,
                                    const std::string& self_id, std::size_t line) {
  std::set<std::string> ids;
  if (!record.contains(field)) return ids;
  const auto& value = record.at(field);
  if (!value.is_array()) {
    throw ParseError(std::string("field '") + field + "' must be an array", line);
  }
  for (const auto& entry : value) {
    if (!entry.is_string()) {
      throw ParseError(std::string("field '") + field + "' must contain strings", line);
    }
    std::string id = entry.get<std::string>();
    if (id == self_id) continue;
    ids.insert(std::move(id));
  }
  return ids;
}

std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
  const std::set<std::string>& small = a.size() <= b.size() ? a : b;
  const std::set<std::string>& large = a.size() <= b.size() ? b : a;
  std::size_t count = 0;
  for (const auto& id : small) {
    if (large.count(id) > 0) ++count;
  }
  return count;
}

}  // namespace

Polarity polarity_for(StanceLabel stance) {
  return stance == StanceLabel::FAVOR ? Polarity::SUPPORTER : Polarity::OPPONENT;
}

std::string CommunityLabel::render() const {
  return target + (polarity == Polarity::SUPPORTER ? " supporter" : " opponent");
}

NetworkMap load_networks(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open networks file: " + path.string());
  }

  NetworkMap networks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) {
      throw ParseError("record is not a JSON object", line_no);
    }
    if (!record.contains("user_id") || !record.at("user_id").is_string()) {
      throw ParseError("missing required string field 'user_id'", line_no);
    }

    UserNetwork net;
    net.user_id = record.at("user_id").get<std::string>();
    if (net.user_id.empty()) {
      throw ParseError("user_id is empty", line_no);
    }
    net.followers = read_id_array(record, "followers", net.user_id, line_no);
    net.friends = read_id_array(record, "friends", net.user_id, line_no);
    net.liked_users = read_id_array(record, "likes", net.user_id, line_no);

    auto [it, inserted] = networks.emplace(net.user_id, std::move(net));
    if (!inserted && warnings != nullptr) {
      warnings->push_back("duplicate user_id kept-first: " + it->first + " at line " +
                          std::to_string(line_no));
    }
  }
  return networks;
}

std::set<std::string> aggregate_network(const UserNetwork& net) {
  std::set<std::string> all = net.followers;
  all.insert(net.friends.begin(), net.friends.end());
  all.insert(net.liked_users.begin(), net.liked_users.end());
  all.erase(net.user_id);
  return all;
}

CommunityProfiles build_community_profiles(const std::vector<std::pair<Post, UserNetwork>>& shots,
                                           const std::string& destination) {
  struct AuthorTally {
    const UserNetwork* network = nullptr;
    int favor = 0;
    int against = 0;
  };

  std::map<std::string, AuthorTally> authors;
  for (const auto& [post, network] : shots) {
    if (post.target != destination) {
      throw ContractViolation("shot post " + post.post_id + " targets '" + post.target +
                              "', expected destination '" + destination + "'");
    }
    if (post.user_id != network.user_id) {
      throw ContractViolation("shot post " + post.post_id + " paired with network of different user");
    }
    AuthorTally& tally = authors[post.user_id];
    tally.network = &network;
    if (post.stance == StanceLabel::FAVOR) {
      ++tally.favor;
    } else {
      ++tally.against;
    }
  }

  CommunityProfiles profiles;
  profiles.supporter.label = CommunityLabel{destination, Polarity::SUPPORTER};
  profiles.opponent.label = CommunityLabel{destination, Polarity::OPPONENT};

  for (const auto& [user_id, tally] : authors) {
    if (tally.favor == tally.against) {
      profiles.warnings.push_back("author " + user_id +
                                  " has an exact favor/against tie; excluded from both profiles");
      continue;
    }
    CommunityProfile& profile =
        tally.favor > tally.against ? profiles.supporter : profiles.opponent;
    profile.contributing_users.insert(user_id);
    std::set<std::string> aggregated = aggregate_network(*tally.network);
    profile.members.insert(aggregated.begin(), aggregated.end());
  }

  if (profiles.supporter.contributing_users.empty()) {
    profiles.warnings.push_back("no supporter shots for '" + destination +
                                "'; supporter profile is empty");
  }
  if (profiles.opponent.contributing_users.empty()) {
    profiles.warnings.push_back("no opponent shots for '" + destination +
                                "'; opponent profile is empty");
  }
  return profiles;
}

CommunityInference infer_community_explain(const std::set<std::string>& user_net,
                                           const CommunityProfile& supporter,
                                           const CommunityProfile& opponent) {
  if (supporter.label.target != opponent.label.target) {
    throw ContractViolation("community profiles target different entities: '" +
                            supporter.label.target + "' vs '" + opponent.label.target + "'");
  }

  CommunityInference result;
  result.overlap_supporter = intersection_size(user_net, supporter.members);
  result.overlap_opponent = intersection_size(user_net, opponent.members);

  if (result.overlap_supporter != result.overlap_opponent) {
    result.label = result.overlap_supporter > result.overlap_opponent ? supporter.label
                                                                      : opponent.label;
    return result;
  }

  result.tie_on_overlap = true;
  if (supporter.members.size() != opponent.members.size()) {
    result.label = supporter.members.size() > opponent.members.size() ? supporter.label
                                                                      : opponent.label;
    return result;
  }

  result.tie_on_size = true;
  result.label = supporter.label;
  return result;
}

CommunityLabel infer_community(const std::set<std::string>& user_net,
                               const CommunityProfile& supporter,
                               const CommunityProfile& opponent) {
  return infer_community_explain(user_net, supporter, opponent).label;
}

double jaccard_overlap(const CommunityProfile& supporter, const CommunityProfile& opponent) {
  if (supporter.members.empty() && opponent.members.empty()) {
    throw ValidationError("jaccard_overlap is undefined when both member sets are empty");
  }
  std::size_t inter = intersection_size(supporter.members, opponent.members);
  std::size_t uni = supporter.members.size() + opponent.members.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace socialpet
