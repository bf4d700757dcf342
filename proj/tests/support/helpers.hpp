#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "socialpet/corpus.hpp"
#include "socialpet/social_graph.hpp"

namespace socialpet::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "socialpet") {
    static std::atomic<unsigned> counter{0};
    const unsigned id = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(id));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Post make_post(std::string post_id, std::string user_id, std::string text,
                      std::string target, StanceLabel stance) {
  Post post;
  post.post_id = std::move(post_id);
  post.user_id = std::move(user_id);
  post.text = std::move(text);
  post.target = std::move(target);
  post.stance = stance;
  return post;
}

inline UserNetwork make_network(std::string user_id, std::set<std::string> followers,
                                std::set<std::string> friends, std::set<std::string> liked) {
  UserNetwork net;
  net.user_id = std::move(user_id);
  net.followers = std::move(followers);
  net.friends = std::move(friends);
  net.liked_users = std::move(liked);
  return net;
}

inline void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const std::string& line : lines) out << line << '\n';
}

// JSONL fixture matching the published P-Stance statistics:
// Donald Trump 519/947, Joe Biden 702/716, Bernie Sanders 776/553.
inline std::filesystem::path write_pstance_fixture(const std::filesystem::path& dir) {
  struct Row {
    const char* target;
    int favor;
    int against;
  };
  const Row rows[] = {{"Donald Trump", 519, 947},
                      {"Joe Biden", 702, 716},
                      {"Bernie Sanders", 776, 553}};

  std::vector<std::string> lines;
  int serial = 0;
  for (const Row& row : rows) {
    for (int i = 0; i < row.favor + row.against; ++i) {
      const bool favor = i < row.favor;
      std::ostringstream line;
      line << "{\"post_id\":\"ps_p" << serial << "\",\"user_id\":\"ps_u" << serial
           << "\",\"text\":\"fixture tweet " << serial << " about the campaign\",\"target\":\""
           << row.target << "\",\"stance\":\"" << (favor ? "FAVOR" : "AGAINST") << "\"}";
      lines.push_back(line.str());
      ++serial;
    }
  }
  const std::filesystem::path path = dir / "pstance.jsonl";
  write_lines(path, lines);
  return path;
}

// Multi-target fixture with "annotations" arrays. Kept annotations match the
// published statistics (Trump 699/503, Clinton 331/872, Sanders 387/226);
// Ted Cruz and NONE annotations are sprinkled in and must be filtered out.
inline std::filesystem::path write_multitarget_fixture(const std::filesystem::path& dir) {
  auto stance_list = [](int favor, int against) {
    std::vector<const char*> stances;
    for (int i = 0; i < favor; ++i) stances.push_back("FAVOR");
    for (int i = 0; i < against; ++i) stances.push_back("AGAINST");
    return stances;
  };
  const std::vector<const char*> trump = stance_list(699, 503);      // 1202
  const std::vector<const char*> clinton = stance_list(331, 872);    // 1203
  const std::vector<const char*> sanders = stance_list(387, 226);    // 613

  std::vector<std::string> lines;
  int serial = 0;
  auto begin_record = [&]() {
    std::ostringstream line;
    line << "{\"post_id\":\"mt_p" << serial << "\",\"user_id\":\"mt_u" << serial
         << "\",\"text\":\"multi target fixture tweet " << serial
         << " text\",\"annotations\":[";
    return line;
  };

  // Trump/Clinton pairs share one tweet each, mirroring multi-target rows.
  for (std::size_t i = 0; i < trump.size(); ++i) {
    std::ostringstream line = begin_record();
    line << "{\"target\":\"Donald Trump\",\"stance\":\"" << trump[i] << "\"},"
         << "{\"target\":\"Hillary Clinton\",\"stance\":\"" << clinton[i] << "\"}";
    if (serial < 100) {
      line << ",{\"target\":\"Ted Cruz\",\"stance\":\"FAVOR\"}";
    } else if (serial < 200) {
      line << ",{\"target\":\"Bernie Sanders\",\"stance\":\"None\"}";
    }
    line << "]}";
    lines.push_back(line.str());
    ++serial;
  }
  // The one leftover Clinton annotation.
  {
    std::ostringstream line = begin_record();
    line << "{\"target\":\"Hillary Clinton\",\"stance\":\"" << clinton.back() << "\"}]}";
    lines.push_back(line.str());
    ++serial;
  }
  // Sanders annotations, one per tweet.
  for (const char* stance : sanders) {
    std::ostringstream line = begin_record();
    line << "{\"target\":\"Bernie Sanders\",\"stance\":\"" << stance << "\"}]}";
    lines.push_back(line.str());
    ++serial;
  }

  const std::filesystem::path path = dir / "multitarget.jsonl";
  write_lines(path, lines);
  return path;
}

}  // namespace socialpet::test
