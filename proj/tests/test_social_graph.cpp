#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "socialpet/errors.hpp"
#include "socialpet/social_graph.hpp"
#include "socialpet/util.hpp"
#include "support/helpers.hpp"

using namespace socialpet;
using socialpet::test::TempDir;
using socialpet::test::make_network;
using socialpet::test::make_post;
using socialpet::test::write_lines;

TEST_CASE("community labels render the two documented phrasings") {
  CHECK(CommunityLabel{"Bernie Sanders", Polarity::SUPPORTER}.render() ==
        "Bernie Sanders supporter");
  CHECK(CommunityLabel{"Donald Trump", Polarity::OPPONENT}.render() == "Donald Trump opponent");
}

TEST_CASE("load_networks parses, dedupes and strips self links") {
  TempDir dir;
  auto path = dir.path() / "nets.jsonl";
  write_lines(path, {R"({"user_id":"u1","followers":["u2"],"friends":[],"likes":["u3","u3"]})",
                     R"({"user_id":"u2","followers":["u2","u9"]})"});
  auto networks = load_networks(path);
  REQUIRE(networks.size() == 2);

  const UserNetwork& u1 = networks.at("u1");
  CHECK(u1.followers == std::set<std::string>{"u2"});
  CHECK(u1.friends.empty());
  CHECK(u1.liked_users == std::set<std::string>{"u3"});

  // Self-id removed; missing arrays are empty sets.
  const UserNetwork& u2 = networks.at("u2");
  CHECK(u2.followers == std::set<std::string>{"u9"});
  CHECK(u2.friends.empty());
  CHECK(u2.liked_users.empty());
}

TEST_CASE("load_networks reports malformed lines with their number") {
  TempDir dir;
  auto path = dir.path() / "nets.jsonl";
  write_lines(path, {R"({"user_id":"u1"})", R"({"followers":["x"]})"});
  try {
    load_networks(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("load_networks agrees with an independent minimal reparse") {
  TempDir dir;
  auto path = dir.path() / "synthetic.jsonl";

  std::mt19937_64 gen(99);
  std::vector<std::string> lines;
  for (int u = 0; u < 50; ++u) {
    std::ostringstream line;
    line << "{\"user_id\":\"user" << u << "\",\"followers\":[";
    const int n_followers = static_cast<int>(gen() % 5);
    for (int i = 0; i < n_followers; ++i) {
      if (i > 0) line << ',';
      line << "\"f" << gen() % 30 << "\"";
    }
    line << "],\"friends\":[";
    const int n_friends = static_cast<int>(gen() % 5);
    for (int i = 0; i < n_friends; ++i) {
      if (i > 0) line << ',';
      line << "\"r" << gen() % 30 << "\"";
    }
    line << "],\"likes\":[\"l" << gen() % 30 << "\"]}";
    lines.push_back(line.str());
  }
  write_lines(path, lines);

  // Oracle: independent hand-rolled extraction of the quoted strings in each
  // bracketed section.
  auto extract = [](const std::string& line, const std::string& field) {
    std::set<std::string> ids;
    const std::size_t key = line.find("\"" + field + "\"");
    if (key == std::string::npos) return ids;
    const std::size_t open = line.find('[', key);
    const std::size_t close = line.find(']', open);
    std::size_t pos = open;
    while (true) {
      const std::size_t quote_start = line.find('"', pos + 1);
      if (quote_start == std::string::npos || quote_start > close) break;
      const std::size_t quote_end = line.find('"', quote_start + 1);
      ids.insert(line.substr(quote_start + 1, quote_end - quote_start - 1));
      pos = quote_end;
    }
    return ids;
  };

  auto networks = load_networks(path);
  REQUIRE(networks.size() == 50);
  for (const std::string& line : lines) {
    const std::size_t id_start = line.find(':') + 2;
    const std::string user_id = line.substr(id_start, line.find('"', id_start) - id_start);
    const UserNetwork& net = networks.at(user_id);
    CHECK(net.followers == extract(line, "followers"));
    CHECK(net.friends == extract(line, "friends"));
    CHECK(net.liked_users == extract(line, "likes"));
  }
}

TEST_CASE("aggregate_network unions the three relation sets") {
  CHECK(aggregate_network(make_network("u", {"a"}, {"b"}, {"a", "c"})) ==
        std::set<std::string>{"a", "b", "c"});
  CHECK(aggregate_network(make_network("u", {}, {}, {})).empty());

  // Random sets vs element-membership oracle.
  std::mt19937_64 gen(7);
  for (int round = 0; round < 50; ++round) {
    std::set<std::string> followers, friends, liked;
    auto fill = [&](std::set<std::string>& out) {
      const int size = static_cast<int>(gen() % 21);
      for (int i = 0; i < size; ++i) out.insert("id" + std::to_string(gen() % 40));
    };
    fill(followers);
    fill(friends);
    fill(liked);
    auto result = aggregate_network(make_network("self", followers, friends, liked));
    for (int i = 0; i < 40; ++i) {
      const std::string id = "id" + std::to_string(i);
      const bool expected = followers.count(id) || friends.count(id) || liked.count(id);
      CHECK(result.count(id) == (expected ? 1 : 0));
    }
  }
}

TEST_CASE("build_community_profiles unions member networks by polarity") {
  std::vector<std::pair<Post, UserNetwork>> shots;
  shots.emplace_back(make_post("p1", "f1", "t", "X", StanceLabel::FAVOR),
                     make_network("f1", {"a"}, {"b"}, {}));
  shots.emplace_back(make_post("p2", "f2", "t", "X", StanceLabel::FAVOR),
                     make_network("f2", {}, {"b"}, {"c"}));
  shots.emplace_back(make_post("p3", "a1", "t", "X", StanceLabel::AGAINST),
                     make_network("a1", {"d"}, {}, {}));
  auto profiles = build_community_profiles(shots, "X");
  CHECK(profiles.supporter.members == std::set<std::string>{"a", "b", "c"});
  CHECK(profiles.opponent.members == std::set<std::string>{"d"});
  CHECK(profiles.supporter.contributing_users == std::set<std::string>{"f1", "f2"});
  CHECK(profiles.opponent.contributing_users == std::set<std::string>{"a1"});
  CHECK(profiles.supporter.label.render() == "X supporter");
  CHECK(profiles.opponent.label.render() == "X opponent");
}

TEST_CASE("mixed-stance authors resolve by majority, exact ties are excluded") {
  UserNetwork net = make_network("u", {"a"}, {}, {});

  SUBCASE("exact tie excluded from both") {
    std::vector<std::pair<Post, UserNetwork>> shots;
    shots.emplace_back(make_post("p1", "u", "t", "X", StanceLabel::FAVOR), net);
    shots.emplace_back(make_post("p2", "u", "t", "X", StanceLabel::AGAINST), net);
    auto profiles = build_community_profiles(shots, "X");
    CHECK(profiles.supporter.contributing_users.empty());
    CHECK(profiles.opponent.contributing_users.empty());
    CHECK(profiles.supporter.members.empty());
    CHECK(profiles.opponent.members.empty());
    CHECK(profiles.warnings.size() >= 1);
  }
  SUBCASE("majority wins") {
    std::vector<std::pair<Post, UserNetwork>> shots;
    shots.emplace_back(make_post("p1", "u", "t", "X", StanceLabel::FAVOR), net);
    shots.emplace_back(make_post("p2", "u", "t", "X", StanceLabel::FAVOR), net);
    shots.emplace_back(make_post("p3", "u", "t", "X", StanceLabel::AGAINST), net);
    auto profiles = build_community_profiles(shots, "X");
    CHECK(profiles.supporter.contributing_users == std::set<std::string>{"u"});
    CHECK(profiles.opponent.contributing_users.empty());
  }
}

TEST_CASE("build_community_profiles matches a per-author grouping oracle on 100 shots") {
  std::mt19937_64 gen(42);
  std::vector<UserNetwork> networks;
  for (int u = 0; u < 30; ++u) {
    std::set<std::string> friends;
    for (int i = 0; i < 4; ++i) friends.insert("n" + std::to_string(gen() % 50));
    networks.push_back(make_network("author" + std::to_string(u), {}, friends, {}));
  }
  std::vector<std::pair<Post, UserNetwork>> shots;
  for (int i = 0; i < 100; ++i) {
    const UserNetwork& net = networks[gen() % networks.size()];
    shots.emplace_back(make_post("p" + std::to_string(i), net.user_id, "t", "X",
                                 gen() % 2 == 0 ? StanceLabel::FAVOR : StanceLabel::AGAINST),
                       net);
  }

  // Oracle: group labels per author, then union aggregate networks.
  std::map<std::string, std::pair<int, int>> tally;  // favor, against
  std::map<std::string, const UserNetwork*> nets;
  for (const auto& [post, net] : shots) {
    if (post.stance == StanceLabel::FAVOR) {
      tally[post.user_id].first++;
    } else {
      tally[post.user_id].second++;
    }
    nets[post.user_id] = &net;
  }
  std::set<std::string> expect_sup_members, expect_opp_members;
  std::set<std::string> expect_sup_users, expect_opp_users;
  for (const auto& [user, counts] : tally) {
    if (counts.first == counts.second) continue;
    auto agg = aggregate_network(*nets.at(user));
    if (counts.first > counts.second) {
      expect_sup_users.insert(user);
      expect_sup_members.insert(agg.begin(), agg.end());
    } else {
      expect_opp_users.insert(user);
      expect_opp_members.insert(agg.begin(), agg.end());
    }
  }

  auto profiles = build_community_profiles(shots, "X");
  CHECK(profiles.supporter.members == expect_sup_members);
  CHECK(profiles.opponent.members == expect_opp_members);
  CHECK(profiles.supporter.contributing_users == expect_sup_users);
  CHECK(profiles.opponent.contributing_users == expect_opp_users);
}

namespace {

CommunityProfile profile_of(Polarity polarity, std::set<std::string> members) {
  CommunityProfile profile;
  profile.label = CommunityLabel{"X", polarity};
  profile.members = std::move(members);
  return profile;
}

}  // namespace

TEST_CASE("infer_community follows overlap argmax with the documented tie chain") {
  SUBCASE("strict dominance") {
    auto label = infer_community({"5", "6"}, profile_of(Polarity::SUPPORTER, {"5", "6", "7"}),
                                 profile_of(Polarity::OPPONENT, {"8"}));
    CHECK(label.polarity == Polarity::SUPPORTER);
  }
  SUBCASE("overlap tie, size tie, fixed-order fallback") {
    auto inference = infer_community_explain({"1"}, profile_of(Polarity::SUPPORTER, {"1", "2"}),
                                             profile_of(Polarity::OPPONENT, {"1", "3"}));
    CHECK(inference.label.polarity == Polarity::SUPPORTER);
    CHECK(inference.overlap_supporter == 1);
    CHECK(inference.overlap_opponent == 1);
    CHECK(inference.tie_on_overlap);
    CHECK(inference.tie_on_size);
  }
  SUBCASE("overlap tie broken by profile size") {
    auto inference = infer_community_explain({}, profile_of(Polarity::SUPPORTER, {"1"}),
                                             profile_of(Polarity::OPPONENT, {"1", "2"}));
    CHECK(inference.label.polarity == Polarity::OPPONENT);
    CHECK(inference.tie_on_overlap);
    CHECK_FALSE(inference.tie_on_size);
  }
  SUBCASE("profiles with different targets violate the contract") {
    CommunityProfile other = profile_of(Polarity::OPPONENT, {});
    other.label.target = "Y";
    CHECK_THROWS_AS(infer_community({}, profile_of(Polarity::SUPPORTER, {}), other),
                    ContractViolation);
  }
}

TEST_CASE("infer_community matches exhaustive overlap enumeration on random instances") {
  std::mt19937_64 gen(1234);
  for (int round = 0; round < 2000; ++round) {
    auto random_set = [&](int universe) {
      std::set<std::string> out;
      for (int id = 0; id < universe; ++id) {
        if (gen() % 2 == 0) out.insert("e" + std::to_string(id));
      }
      return out;
    };
    const int universe = 1 + static_cast<int>(gen() % 12);
    auto user = random_set(universe);
    auto sup = profile_of(Polarity::SUPPORTER, random_set(universe));
    auto opp = profile_of(Polarity::OPPONENT, random_set(universe));

    // Brute-force oracle: count intersections element by element.
    std::size_t overlap_sup = 0, overlap_opp = 0;
    for (const auto& id : user) {
      if (sup.members.count(id)) ++overlap_sup;
      if (opp.members.count(id)) ++overlap_opp;
    }
    Polarity expected;
    if (overlap_sup != overlap_opp) {
      expected = overlap_sup > overlap_opp ? Polarity::SUPPORTER : Polarity::OPPONENT;
    } else if (sup.members.size() != opp.members.size()) {
      expected = sup.members.size() > opp.members.size() ? Polarity::SUPPORTER
                                                         : Polarity::OPPONENT;
    } else {
      expected = Polarity::SUPPORTER;
    }
    CHECK(infer_community(user, sup, opp).polarity == expected);
  }
}

TEST_CASE("infer_community is invariant under consistent id relabeling") {
  std::mt19937_64 gen(555);
  for (int round = 0; round < 200; ++round) {
    auto random_ids = [&](int bound) {
      std::set<std::string> out;
      for (int i = 0; i < bound; ++i) {
        if (gen() % 2 == 0) out.insert("v" + std::to_string(i));
      }
      return out;
    };
    auto user = random_ids(10);
    auto sup = profile_of(Polarity::SUPPORTER, random_ids(10));
    auto opp = profile_of(Polarity::OPPONENT, random_ids(10));

    // Bijection: v<i> -> w<p(i)> for a random permutation p.
    std::vector<int> perm(10);
    for (int i = 0; i < 10; ++i) perm[i] = i;
    deterministic_shuffle(perm, gen);
    auto relabel = [&](const std::set<std::string>& ids) {
      std::set<std::string> out;
      for (const auto& id : ids) {
        out.insert("w" + std::to_string(perm[std::stoi(id.substr(1))]));
      }
      return out;
    };
    auto sup2 = profile_of(Polarity::SUPPORTER, relabel(sup.members));
    auto opp2 = profile_of(Polarity::OPPONENT, relabel(opp.members));
    CHECK(infer_community(user, sup, opp).polarity ==
          infer_community(relabel(user), sup2, opp2).polarity);
  }
}

TEST_CASE("adding a supporter-only id to the user never flips supporter to opponent") {
  std::mt19937_64 gen(777);
  for (int round = 0; round < 500; ++round) {
    auto random_ids = [&](int bound, char prefix) {
      std::set<std::string> out;
      for (int i = 0; i < bound; ++i) {
        if (gen() % 2 == 0) out.insert(std::string(1, prefix) + std::to_string(i));
      }
      return out;
    };
    auto user = random_ids(8, 'x');
    auto sup = profile_of(Polarity::SUPPORTER, random_ids(8, 'x'));
    auto opp = profile_of(Polarity::OPPONENT, random_ids(8, 'x'));
    if (infer_community(user, sup, opp).polarity != Polarity::SUPPORTER) continue;

    std::vector<std::string> sup_only;
    for (const auto& id : sup.members) {
      if (opp.members.count(id) == 0) sup_only.push_back(id);
    }
    if (sup_only.empty()) continue;
    user.insert(sup_only[gen() % sup_only.size()]);
    CHECK(infer_community(user, sup, opp).polarity == Polarity::SUPPORTER);
  }
}

TEST_CASE("jaccard_overlap definition and edge cases") {
  CHECK(jaccard_overlap(profile_of(Polarity::SUPPORTER, {"1", "2", "3"}),
                        profile_of(Polarity::OPPONENT, {"3", "4"})) == doctest::Approx(0.25));
  CHECK(jaccard_overlap(profile_of(Polarity::SUPPORTER, {"1", "2"}),
                        profile_of(Polarity::OPPONENT, {"1", "2"})) == doctest::Approx(1.0));
  CHECK(jaccard_overlap(profile_of(Polarity::SUPPORTER, {"1"}),
                        profile_of(Polarity::OPPONENT, {"2"})) == doctest::Approx(0.0));
  CHECK_THROWS_AS(jaccard_overlap(profile_of(Polarity::SUPPORTER, {}),
                                  profile_of(Polarity::OPPONENT, {})),
                  ValidationError);
}

TEST_CASE("jaccard_overlap is symmetric and zero iff disjoint") {
  std::mt19937_64 gen(31);
  for (int round = 0; round < 200; ++round) {
    auto random_ids = [&](int bound) {
      std::set<std::string> out;
      for (int i = 0; i < bound; ++i) {
        if (gen() % 3 == 0) out.insert("j" + std::to_string(i));
      }
      return out;
    };
    auto a = profile_of(Polarity::SUPPORTER, random_ids(12));
    auto b = profile_of(Polarity::OPPONENT, random_ids(12));
    if (a.members.empty() && b.members.empty()) continue;
    const double ab = jaccard_overlap(a, b);
    auto a_swapped = profile_of(Polarity::SUPPORTER, b.members);
    auto b_swapped = profile_of(Polarity::OPPONENT, a.members);
    CHECK(ab == doctest::Approx(jaccard_overlap(a_swapped, b_swapped)));

    bool disjoint = true;
    for (const auto& id : a.members) {
      if (b.members.count(id) > 0) disjoint = false;
    }
    CHECK((ab == 0.0) == disjoint);
  }
}

TEST_CASE("disjoint profiles with nested user networks are classified perfectly") {
  // When N_S and N_O are disjoint and every user's network sits inside their
  // own community, inference never errs.
  auto sup = profile_of(Polarity::SUPPORTER, {"s1", "s2", "s3", "s4"});
  auto opp = profile_of(Polarity::OPPONENT, {"o1", "o2", "o3"});
  std::mt19937_64 gen(4);
  for (int round = 0; round < 100; ++round) {
    const bool is_supporter = gen() % 2 == 0;
    const auto& pool = is_supporter ? sup.members : opp.members;
    std::set<std::string> user;
    std::vector<std::string> ids(pool.begin(), pool.end());
    user.insert(ids[gen() % ids.size()]);
    if (gen() % 2 == 0) user.insert(ids[gen() % ids.size()]);
    CHECK(infer_community(user, sup, opp).polarity ==
          (is_supporter ? Polarity::SUPPORTER : Polarity::OPPONENT));
  }
}
