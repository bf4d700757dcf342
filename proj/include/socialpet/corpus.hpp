#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace socialpet {

// Binary stance space. AGAINST deliberately sorts first; confusion matrices,
// score arrays and tie-breaks all use this index order.
enum class StanceLabel { AGAINST = 0, FAVOR = 1 };

constexpr std::size_t label_index(StanceLabel label) {
  return static_cast<std::size_t>(label);
}
constexpr StanceLabel label_at(std::size_t index) {
  return index == 0 ? StanceLabel::AGAINST : StanceLabel::FAVOR;
}
constexpr StanceLabel other_label(StanceLabel label) {
  return label == StanceLabel::FAVOR ? StanceLabel::AGAINST : StanceLabel::FAVOR;
}

std::string_view to_string(StanceLabel label);

// Throws ValidationError on anything but FAVOR/AGAINST (case-insensitive).
StanceLabel parse_stance(std::string_view text);

enum class SplitHint { TRAIN, TEST };
enum class DatasetKind { PSTANCE, MULTITARGET };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view text);

struct Post {
  std::string post_id;
  std::string user_id;
  std::string text;
  std::string target;
  StanceLabel stance = StanceLabel::AGAINST;
  std::optional<SplitHint> split_hint;
};

// (post_id, target) is the uniqueness key; multi-target expansion reuses
// post_id across targets.
struct PostKey {
  std::string post_id;
  std::string target;

  auto operator<=>(const PostKey&) const = default;
};

PostKey key_of(const Post& post);

struct TargetCounts {
  std::int64_t favor = 0;
  std::int64_t against = 0;

  std::int64_t total() const { return favor + against; }
};

using DatasetStats = std::map<std::string, TargetCounts>;

// Stance deliberately absent: downstream stages must not see pool gold labels.
struct UnlabeledPost {
  std::string post_id;
  std::string user_id;
  std::string text;
  std::string target;
};

struct SplitManifest {
  std::string dataset;
  std::string destination;
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> sampled_post_ids;  // in sampling order
  std::map<std::string, std::string> split_source;  // target -> "split_hint" | "stratified_70_30(seed13)"
  std::uint64_t train_checksum = 0;
  std::uint64_t unlabeled_checksum = 0;
  std::uint64_t test_checksum = 0;

  nlohmann::ordered_json to_json() const;
  static SplitManifest from_json(const nlohmann::json& j);

  bool operator==(const SplitManifest&) const = default;
};

struct FewShotSplit {
  std::vector<Post> train;  // all source-target training posts + the n shots
  std::vector<UnlabeledPost> unlabeled_pool;
  std::vector<Post> test;
  SplitManifest manifest;

  // The n destination-target posts inside `train`.
  std::vector<Post> destination_shots() const;
};

// Reads a JSON Lines posts file. MULTITARGET expands "annotations" arrays,
// drops "Ted Cruz" targets and NONE stances, and keeps the first of any
// duplicated (post_id, target) row. PSTANCE applies schema validation only.
std::vector<Post> load_posts(const std::filesystem::path& path, DatasetKind kind,
                             std::vector<std::string>* warnings = nullptr);

DatasetStats dataset_stats(const std::vector<Post>& posts);

// Assembles the n-shot experiment split for one destination target.
// Pure function of the post multiset, destination, n and seed.
FewShotSplit split_few_shot(const std::vector<Post>& posts, const std::string& destination,
                            int n, std::uint64_t seed);

}  // namespace socialpet
