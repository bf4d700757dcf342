#include "socialpet/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "socialpet/errors.hpp"
#include "socialpet/util.hpp"

namespace socialpet {

namespace {

constexpr std::uint64_t kStratifiedSeed = 13;
constexpr const char* kStratifiedSourceTag = "stratified_70_30(seed13)";
constexpr const char* kHintSourceTag = "split_hint";

bool is_none_stance(std::string_view text) {
  return to_lower_ascii(text) == "none";
}

std::optional<SplitHint> parse_split_hint(const nlohmann::json& record, std::size_t line) {
  if (!record.contains("split")) return std::nullopt;
  const auto& value = record.at("split");
  if (!value.is_string()) {
    throw ParseError("field 'split' must be a string", line);
  }
  std::string lowered = to_lower_ascii(value.get<std::string>());
  if (lowered == "train") return SplitHint::TRAIN;
  if (lowered == "test") return SplitHint::TEST;
  throw ParseError("field 'split' must be 'train' or 'test', got '" + value.get<std::string>() + "'", line);
}

std::string require_string(const nlohmann::json& record, const char* field, std::size_t line) {
  if (!record.contains(field)) {
    throw ParseError(std::string("missing required field '") + field + "'", line);
  }
  const auto& value = record.at(field);
  if (!value.is_string()) {
    throw ParseError(std::string("field '") + field + "' must be a string", line);
  }
  return value.get<std::string>();
}

std::uint64_t checksum_posts(const std::vector<PostKey>& keys) {
  std::vector<PostKey> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const auto& key : sorted) {
    hash = fnv1a64(key.post_id, hash);
    hash = fnv1a64("\x1f", hash);
    hash = fnv1a64(key.target, hash);
    hash = fnv1a64("\x1e", hash);
  }
  return hash;
}

void sort_canonical(std::vector<Post>& posts) {
  std::sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
    return key_of(a) < key_of(b);
  });
}

}  // namespace

std::string_view to_string(StanceLabel label) {
  return label == StanceLabel::FAVOR ? "FAVOR" : "AGAINST";
}

StanceLabel parse_stance(std::string_view text) {
  std::string lowered = to_lower_ascii(text);
  if (lowered == "favor") return StanceLabel::FAVOR;
  if (lowered == "against") return StanceLabel::AGAINST;
  throw ValidationError("unknown stance label: '" + std::string(text) + "'");
}

std::string_view to_string(DatasetKind kind) {
  return kind == DatasetKind::PSTANCE ? "pstance" : "multitarget";
}

DatasetKind parse_dataset_kind(std::string_view text) {
  std::string lowered = to_lower_ascii(text);
  if (lowered == "pstance" || lowered == "p-stance") return DatasetKind::PSTANCE;
  if (lowered == "multitarget" || lowered == "multi-target") return DatasetKind::MULTITARGET;
  throw ValidationError("unknown dataset kind: '" + std::string(text) + "'");
}

PostKey key_of(const Post& post) {
  return PostKey{post.post_id, post.target};
}

std::vector<Post> load_posts(const std::filesystem::path& path, DatasetKind kind,
                             std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open posts file: " + path.string());
  }

  std::vector<Post> posts;
  std::set<PostKey> seen;
  std::string line;
  std::size_t line_no = 0;

  auto warn = [&](const std::string& message) {
    if (warnings != nullptr) warnings->push_back(message);
  };

  auto add_post = [&](Post post, std::size_t line_number) {
    post.text = trim(post.text);
    if (post.text.empty()) {
      throw ParseError("post text is empty after trimming", line_number);
    }
    if (post.post_id.empty()) {
      throw ParseError("post_id is empty", line_number);
    }
    if (post.target.empty()) {
      throw ParseError("target is empty", line_number);
    }
    PostKey key = key_of(post);
    if (!seen.insert(key).second) {
      warn("duplicate (post_id, target) row kept-first: (" + key.post_id + ", " + key.target +
           ") at line " + std::to_string(line_number));
      return;
    }
    posts.push_back(std::move(post));
  };

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

    Post base;
    base.post_id = require_string(record, "post_id", line_no);
    base.user_id = require_string(record, "user_id", line_no);
    base.text = require_string(record, "text", line_no);
    base.split_hint = parse_split_hint(record, line_no);

    const bool has_annotations = record.contains("annotations");
    if (has_annotations && kind != DatasetKind::MULTITARGET) {
      throw ParseError("'annotations' arrays are only valid for multitarget datasets", line_no);
    }

    if (!has_annotations) {
      std::string target = require_string(record, "target", line_no);
      std::string stance = require_string(record, "stance", line_no);
      if (kind == DatasetKind::MULTITARGET) {
        if (target == "Ted Cruz" || is_none_stance(stance)) continue;
      }
      Post post = base;
      post.target = std::move(target);
      try {
        post.stance = parse_stance(stance);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line_no);
      }
      add_post(std::move(post), line_no);
      continue;
    }

    const auto& annotations = record.at("annotations");
    if (!annotations.is_array()) {
      throw ParseError("field 'annotations' must be an array", line_no);
    }
    for (const auto& annotation : annotations) {
      if (!annotation.is_object()) {
        throw ParseError("annotation entries must be objects", line_no);
      }
      std::string target = require_string(annotation, "target", line_no);
      std::string stance = require_string(annotation, "stance", line_no);
      if (target == "Ted Cruz" || is_none_stance(stance)) continue;
      Post post = base;
      post.target = std::move(target);
      try {
        post.stance = parse_stance(stance);
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line_no);
      }
      add_post(std::move(post), line_no);
    }
  }

  return posts;
}

DatasetStats dataset_stats(const std::vector<Post>& posts) {
  DatasetStats stats;
  for (const Post& post : posts) {
    TargetCounts& counts = stats[post.target];
    if (post.stance == StanceLabel::FAVOR) {
      ++counts.favor;
    } else {
      ++counts.against;
    }
  }
  return stats;
}

nlohmann::ordered_json SplitManifest::to_json() const {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["destination"] = destination;
  j["n"] = n;
  j["seed"] = seed;
  j["sampled_post_ids"] = sampled_post_ids;
  j["split_source"] = split_source;
  j["checksums"] = {{"train", train_checksum},
                    {"unlabeled_pool", unlabeled_checksum},
                    {"test", test_checksum}};
  return j;
}

SplitManifest SplitManifest::from_json(const nlohmann::json& j) {
  SplitManifest manifest;
  manifest.dataset = j.value("dataset", std::string());
  manifest.destination = j.at("destination").get<std::string>();
  manifest.n = j.at("n").get<int>();
  manifest.seed = j.at("seed").get<std::uint64_t>();
  manifest.sampled_post_ids = j.at("sampled_post_ids").get<std::vector<std::string>>();
  if (j.contains("split_source")) {
    manifest.split_source = j.at("split_source").get<std::map<std::string, std::string>>();
  }
  const auto& checksums = j.at("checksums");
  manifest.train_checksum = checksums.at("train").get<std::uint64_t>();
  manifest.unlabeled_checksum = checksums.at("unlabeled_pool").get<std::uint64_t>();
  manifest.test_checksum = checksums.at("test").get<std::uint64_t>();
  return manifest;
}

std::vector<Post> FewShotSplit::destination_shots() const {
  std::set<std::string> sampled(manifest.sampled_post_ids.begin(), manifest.sampled_post_ids.end());
  std::vector<Post> shots;
  for (const Post& post : train) {
    if (post.target == manifest.destination && sampled.count(post.post_id) > 0) {
      shots.push_back(post);
    }
  }
  return shots;
}

FewShotSplit split_few_shot(const std::vector<Post>& posts, const std::string& destination,
                            int n, std::uint64_t seed) {
  if (n <= 0) {
    throw ConfigError("n must be positive, got " + std::to_string(n));
  }

  std::vector<Post> sorted = posts;
  sort_canonical(sorted);

  std::vector<Post> destination_posts;
  std::vector<Post> source_posts;
  for (const Post& post : sorted) {
    (post.target == destination ? destination_posts : source_posts).push_back(post);
  }
  if (destination_posts.empty()) {
    throw ConfigError("unknown destination target: '" + destination + "'");
  }

  FewShotSplit split;
  split.manifest.destination = destination;
  split.manifest.n = n;
  split.manifest.seed = seed;

  // A target is honored per its hints only when every one of its posts
  // carries one; otherwise the stratified fallback governs the whole target.
  auto fully_hinted = [](const std::vector<Post>& group) {
    return std::all_of(group.begin(), group.end(),
                       [](const Post& p) { return p.split_hint.has_value(); });
  };

  std::vector<Post> destination_pool;  // destination training partition
  std::vector<Post> destination_test;
  if (fully_hinted(destination_posts)) {
    split.manifest.split_source[destination] = kHintSourceTag;
    for (const Post& post : destination_posts) {
      (*post.split_hint == SplitHint::TRAIN ? destination_pool : destination_test).push_back(post);
    }
  } else {
    split.manifest.split_source[destination] = kStratifiedSourceTag;
    std::map<StanceLabel, std::vector<Post>> by_stance;
    for (const Post& post : destination_posts) {
      by_stance[post.stance].push_back(post);
    }
    for (auto& [stance, group] : by_stance) {
      std::uint64_t group_seed = mix_seed(kStratifiedSeed, destination);
      group_seed = mix_seed(group_seed, to_string(stance));
      std::mt19937_64 gen(group_seed);
      deterministic_shuffle(group, gen);
      std::size_t train_count = group.size() * 7 / 10;
      for (std::size_t i = 0; i < group.size(); ++i) {
        (i < train_count ? destination_pool : destination_test).push_back(group[i]);
      }
    }
    sort_canonical(destination_pool);
    sort_canonical(destination_test);
  }

  if (static_cast<std::size_t>(n) > destination_pool.size()) {
    throw ConfigError("n=" + std::to_string(n) + " exceeds destination train pool of " +
                      std::to_string(destination_pool.size()) + " posts for '" + destination + "'");
  }

  // Source targets contribute their full data unless hints restrict them.
  std::map<std::string, std::vector<Post>> by_source_target;
  for (const Post& post : source_posts) {
    by_source_target[post.target].push_back(post);
  }
  for (auto& [target, group] : by_source_target) {
    if (fully_hinted(group)) {
      split.manifest.split_source[target] = kHintSourceTag;
      for (const Post& post : group) {
        if (*post.split_hint == SplitHint::TRAIN) split.train.push_back(post);
      }
    } else {
      split.manifest.split_source[target] = "all_posts";
      for (const Post& post : group) {
        split.train.push_back(post);
      }
    }
  }

  std::mt19937_64 gen(seed);
  std::vector<std::size_t> picked = sample_indices(destination_pool.size(),
                                                   static_cast<std::size_t>(n), gen);
  std::set<std::size_t> picked_set(picked.begin(), picked.end());
  for (std::size_t index : picked) {
    split.manifest.sampled_post_ids.push_back(destination_pool[index].post_id);
    split.train.push_back(destination_pool[index]);
  }
  for (std::size_t i = 0; i < destination_pool.size(); ++i) {
    if (picked_set.count(i) > 0) continue;
    const Post& post = destination_pool[i];
    split.unlabeled_pool.push_back(UnlabeledPost{post.post_id, post.user_id, post.text, post.target});
  }
  split.test = std::move(destination_test);

  sort_canonical(split.train);
  sort_canonical(split.test);
  std::sort(split.unlabeled_pool.begin(), split.unlabeled_pool.end(),
            [](const UnlabeledPost& a, const UnlabeledPost& b) {
              return std::tie(a.post_id, a.target) < std::tie(b.post_id, b.target);
            });

  std::vector<PostKey> train_keys, pool_keys, test_keys;
  for (const Post& post : split.train) train_keys.push_back(key_of(post));
  for (const UnlabeledPost& post : split.unlabeled_pool) pool_keys.push_back(PostKey{post.post_id, post.target});
  for (const Post& post : split.test) test_keys.push_back(key_of(post));
  split.manifest.train_checksum = checksum_posts(train_keys);
  split.manifest.unlabeled_checksum = checksum_posts(pool_keys);
  split.manifest.test_checksum = checksum_posts(test_keys);

  return split;
}

}  // namespace socialpet
