#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "socialpet/errors.hpp"
#include "socialpet/harness.hpp"
#include "socialpet/util.hpp"

using namespace socialpet;

namespace {

// Exit status contract: 0 success, 1 partial failure, 2 input error,
// 3 refusal (existing output without --force).
constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kInputError = 2;
constexpr int kRefusal = 3;

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string escaped = "\"";
  for (char c : field) {
    if (c == '"') escaped += '"';
    escaped += c;
  }
  escaped += '"';
  return escaped;
}

bool output_dir_busy(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir) && !std::filesystem::is_empty(dir);
}

int refuse(const std::filesystem::path& dir) {
  std::cerr << "refusing to write into non-empty directory " << dir
            << " (pass --force to override)\n";
  return kRefusal;
}

ExperimentConfig load_experiment(const std::string& config_path,
                                 const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty()) {
    kv = parse_config_file(config_path);
  }
  for (const auto& [key, value] : overrides) {
    kv[key] = value;
  }
  return experiment_config_from_kv(kv);
}

int cmd_stats(const std::string& posts_path, const std::string& kind_name,
              const std::string& out_dir) {
  auto posts = load_posts(posts_path, parse_dataset_kind(kind_name));
  auto stats = dataset_stats(posts);

  std::size_t width = 6;
  for (const auto& [target, counts] : stats) width = std::max(width, target.size());
  std::cout << std::left << std::setw(static_cast<int>(width + 2)) << "target" << std::right
            << std::setw(8) << "favor" << std::setw(8) << "against" << std::setw(8) << "total"
            << '\n';
  std::ostringstream csv;
  csv << "target,favor,against,total\n";
  for (const auto& [target, counts] : stats) {
    std::cout << std::left << std::setw(static_cast<int>(width + 2)) << target << std::right
              << std::setw(8) << counts.favor << std::setw(8) << counts.against << std::setw(8)
              << counts.total() << '\n';
    csv << csv_escape(target) << ',' << counts.favor << ',' << counts.against << ','
        << counts.total() << '\n';
  }
  write_file(std::filesystem::path(out_dir) / "stats.csv", csv.str());
  return kOk;
}

int cmd_render(const std::string& posts_path, const std::string& kind_name,
               const std::vector<std::string>& pattern_names, bool social,
               const std::string& mask, std::size_t limit) {
  auto posts = load_posts(posts_path, parse_dataset_kind(kind_name));
  std::vector<PatternId> patterns;
  for (const std::string& name : pattern_names) patterns.push_back(parse_pattern_id(name));
  if (patterns.empty()) patterns = {PatternId::P1, PatternId::P2};

  // Debug rendering uses gold-label communities, as in training.
  auto communities = assign_training_communities(posts);
  std::size_t printed = 0;
  for (const Post& post : posts) {
    if (limit > 0 && printed >= limit) break;
    for (PatternId id : patterns) {
      std::optional<CommunityLabel> community;
      if (social) community = communities.at(key_of(post));
      std::cout << render(post, {id, social, {}}, community, mask).rendered_text << '\n';
    }
    ++printed;
  }
  return kOk;
}

int cmd_communities(const std::string& posts_path, const std::string& networks_path,
                    const std::string& kind_name, const std::string& destination, int n,
                    std::uint64_t seed, std::string out_file) {
  auto posts = load_posts(posts_path, parse_dataset_kind(kind_name));
  auto networks = load_networks(networks_path);

  auto split = split_few_shot(posts, destination, n, seed);
  std::vector<std::pair<Post, UserNetwork>> shot_pairs;
  for (const Post& post : split.destination_shots()) {
    auto it = networks.find(post.user_id);
    UserNetwork net = it != networks.end() ? it->second : UserNetwork{post.user_id, {}, {}, {}};
    shot_pairs.emplace_back(post, std::move(net));
  }
  auto profiles = build_community_profiles(shot_pairs, destination);
  for (const std::string& warning : profiles.warnings) {
    std::cerr << "warning: " << warning << '\n';
  }

  std::set<std::string> users;
  for (const auto& post : split.unlabeled_pool) users.insert(post.user_id);
  for (const auto& post : split.test) users.insert(post.user_id);

  std::map<std::string, CommunityLabel> assignments;
  std::map<std::string, std::size_t> counts;
  std::size_t fallbacks = 0;
  std::size_t missing_networks = 0;
  for (const std::string& user : users) {
    std::set<std::string> net;
    auto it = networks.find(user);
    if (it != networks.end()) {
      net = aggregate_network(it->second);
    } else {
      ++missing_networks;
    }
    auto inference = infer_community_explain(net, profiles.supporter, profiles.opponent);
    if (inference.tie_on_overlap) ++fallbacks;
    assignments.emplace(user, inference.label);
    ++counts[inference.label.render()];
  }

  if (out_file.empty()) {
    const char* cache_root = std::getenv("SOCIALPET_CACHE");
    std::filesystem::path root = cache_root != nullptr ? cache_root : ".";
    std::string slug;
    for (char c : destination) slug += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    out_file = (root / ("communities_" + slug + "_" + std::to_string(n) + "_" +
                        std::to_string(seed) + ".json"))
                   .string();
  }
  nlohmann::ordered_json communities_json;
  for (const auto& [user, label] : assignments) communities_json[user] = label.render();
  nlohmann::ordered_json cache;
  cache["destination"] = destination;
  cache["n"] = n;
  cache["seed"] = seed;
  cache["tie_break_fallbacks"] = fallbacks;
  cache["communities"] = std::move(communities_json);
  write_file(out_file, cache.dump(2) + "\n");

  std::ostringstream csv;
  csv << "community,users\n";
  for (const auto& [label, count] : counts) {
    std::cout << label << ": " << count << '\n';
    csv << csv_escape(label) << ',' << count << '\n';
  }
  std::cout << "assigned: " << users.size() << " users (100%)\n";
  std::cout << "tie-break fallbacks: " << fallbacks << '\n';
  if (missing_networks == users.size() && !users.empty()) {
    std::cerr << "warning: no user had network data; every assignment used the tie-break path\n";
  }
  write_file(std::filesystem::path(out_file).parent_path() / "communities_summary.csv", csv.str());
  std::cout << "cache written to " << out_file << '\n';
  return kOk;
}

int cmd_jaccard(const std::string& posts_path, const std::string& networks_path,
                const std::string& kind_name, const std::string& dataset_name,
                const std::string& destination, int n, std::uint64_t seed,
                const std::string& out_dir) {
  auto posts = load_posts(posts_path, parse_dataset_kind(kind_name));
  auto networks = load_networks(networks_path);

  auto profile_pairs = [&](const std::vector<Post>& group, const std::string& target) {
    std::vector<std::pair<Post, UserNetwork>> pairs;
    for (const Post& post : group) {
      if (post.target != target) continue;
      auto it = networks.find(post.user_id);
      UserNetwork net = it != networks.end() ? it->second : UserNetwork{post.user_id, {}, {}, {}};
      pairs.emplace_back(post, std::move(net));
    }
    return pairs;
  };

  std::vector<JaccardRow> rows;
  if (n > 0) {
    // Few-shot profiles for one destination.
    auto split = split_few_shot(posts, destination, n, seed);
    auto profiles = build_community_profiles(
        profile_pairs(split.destination_shots(), destination), destination);
    rows.push_back(JaccardRow{dataset_name, destination,
                              jaccard_overlap(profiles.supporter, profiles.opponent)});
  } else {
    std::set<std::string> targets;
    for (const Post& post : posts) targets.insert(post.target);
    for (const std::string& target : targets) {
      if (!destination.empty() && target != destination) continue;
      auto profiles = build_community_profiles(profile_pairs(posts, target), target);
      rows.push_back(JaccardRow{dataset_name, target,
                                jaccard_overlap(profiles.supporter, profiles.opponent)});
    }
  }

  std::ostringstream csv;
  csv << "dataset,target,jaccard\n";
  for (const JaccardRow& row : rows) {
    std::cout << row.dataset << '\t' << row.target << '\t' << format_fixed(row.score, 4) << '\n';
    csv << csv_escape(row.dataset) << ',' << csv_escape(row.target) << ','
        << format_fixed(row.score, 6) << '\n';
  }
  write_file(std::filesystem::path(out_dir) / "jaccard.csv", csv.str());
  return kOk;
}

int cmd_run(const ExperimentConfig& config, const std::string& method_name, bool force) {
  if (!force && output_dir_busy(config.output_dir)) {
    return refuse(config.output_dir);
  }
  const Method method =
      method_name.empty() ? (config.social ? Method::SOCIALPET : Method::PET)
                          : parse_method(method_name);

  RunContext context = load_run_context(config.primary_dataset());
  RunRecord record = run_cell(context, config, method, config.destination, config.n_shots);
  emit_reports({record}, {}, config.output_dir);

  for (const SeedReport& seed : record.seeds) {
    std::cout << "seed " << seed.seed << ": macro-F1 " << format_fixed(seed.report.macro_f1, 4)
              << " (favor " << format_fixed(seed.report.favor.f1, 4) << ", against "
              << format_fixed(seed.report.against.f1, 4) << ")\n";
  }
  std::cout << "mean macro-F1 over " << record.seeds.size()
            << " seeds: " << format_fixed(record.macro_f1_mean, 4) << '\n';
  for (std::uint64_t seed : record.failed_seeds) {
    std::cerr << "seed " << seed << " failed (see failure.json in its run directory)\n";
  }
  if (record.seeds.empty()) return kInputError;
  return record.failed_seeds.empty() ? kOk : kPartial;
}

int cmd_matrix(const ExperimentConfig& config, bool force) {
  if (!force && output_dir_busy(config.output_dir)) {
    return refuse(config.output_dir);
  }
  MatrixResult result = run_matrix(config);
  for (const RunRecord& record : result.records) {
    std::cout << record.method << ' ' << record.dataset << '/' << record.destination
              << " n=" << record.n << ": macro-F1 " << format_fixed(record.macro_f1_mean, 4)
              << " over " << record.seeds.size() << " seeds\n";
  }
  if (!result.failures.empty()) {
    std::cerr << result.failures.size() << " failures:\n";
    for (const std::string& failure : result.failures) std::cerr << "  " << failure << '\n';
    return kPartial;
  }
  return kOk;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_dir) {
  auto data = generate_synthetic(spec);
  write_posts_jsonl(data.posts, std::filesystem::path(out_dir) / "posts.jsonl");
  write_networks_jsonl(data.networks, std::filesystem::path(out_dir) / "networks.jsonl");
  std::cout << "wrote " << data.posts.size() << " posts and " << data.networks.size()
            << " user networks under " << out_dir << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& runs_dir, const std::string& out_dir) {
  // Re-derive reports from stored predictions laid out as
  // <dataset>/<destination>/<n>/<seed>/<method>/predictions.jsonl.
  struct Key {
    std::string dataset, destination, method;
    int n = 0;
    bool operator<(const Key& other) const {
      return std::tie(dataset, destination, n, method) <
             std::tie(other.dataset, other.destination, other.n, other.method);
    }
  };
  std::map<Key, std::vector<SeedReport>> grouped;

  for (const auto& entry : std::filesystem::recursive_directory_iterator(runs_dir)) {
    if (!entry.is_regular_file() || entry.path().filename() != "predictions.jsonl") continue;
    const auto rel = std::filesystem::relative(entry.path(), runs_dir);
    std::vector<std::string> parts;
    for (const auto& part : rel) parts.push_back(part.string());
    if (parts.size() < 6) continue;
    Key key;
    key.dataset = parts[parts.size() - 6];
    key.destination = parts[parts.size() - 5];
    std::uint64_t seed = 0;
    try {
      key.n = std::stoi(parts[parts.size() - 4]);
      seed = std::stoull(parts[parts.size() - 3]);
    } catch (const std::exception&) {
      continue;  // not a run directory layout
    }
    key.method = parts[parts.size() - 2];

    std::vector<StanceLabel> gold, predicted;
    std::istringstream in(read_file(entry.path()));
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line);
      gold.push_back(parse_stance(j.at("gold").get<std::string>()));
      predicted.push_back(parse_stance(j.at("predicted").get<std::string>()));
    }
    if (gold.empty()) continue;
    grouped[key].push_back(SeedReport{seed, evaluate(gold, predicted)});
  }
  if (grouped.empty()) {
    std::cerr << "no predictions.jsonl files found under " << runs_dir << '\n';
    return kInputError;
  }

  std::vector<RunRecord> records;
  for (auto& [key, seeds] : grouped) {
    RunRecord record;
    record.dataset = key.dataset;
    record.destination = key.destination;
    record.n = key.n;
    record.method = key.method;
    std::sort(seeds.begin(), seeds.end(),
              [](const SeedReport& a, const SeedReport& b) { return a.seed < b.seed; });
    record.seeds = std::move(seeds);
    summarize_run(record);
    records.push_back(std::move(record));
    const RunRecord& r = records.back();
    std::cout << r.method << ' ' << r.dataset << '/' << r.destination << " n=" << r.n
              << ": macro-F1 " << format_fixed(r.macro_f1_mean, 4) << " over " << r.seeds.size()
              << " seeds\n";
  }
  emit_reports(records, {}, out_dir);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SocialPET: socially informed pattern-exploiting training for few-shot stance "
               "detection"};
  app.require_subcommand(1);

  auto* stats = app.add_subcommand("stats", "Per-target label statistics of a posts file");
  std::string stats_posts, stats_kind = "pstance", stats_out = ".";
  stats->add_option("--posts", stats_posts, "Posts JSONL file")->required();
  stats->add_option("--kind", stats_kind, "Dataset kind: pstance|multitarget");
  stats->add_option("--out-dir", stats_out, "Directory for stats.csv");

  auto* render_cmd = app.add_subcommand("render", "Print pattern renderings for inspection");
  std::string render_posts, render_kind = "pstance", render_mask = "<mask>";
  std::vector<std::string> render_patterns;
  bool render_social = false;
  std::size_t render_limit = 0;
  render_cmd->add_option("--posts", render_posts, "Posts JSONL file")->required();
  render_cmd->add_option("--kind", render_kind, "Dataset kind");
  render_cmd->add_option("--patterns", render_patterns, "Patterns (P1, P2)")->delimiter(',');
  render_cmd->add_flag("--social", render_social, "Append gold-label community phrases");
  render_cmd->add_option("--mask", render_mask, "Mask placeholder token");
  render_cmd->add_option("--limit", render_limit, "Render at most this many posts (0 = all)");

  auto* communities = app.add_subcommand("communities", "Infer destination communities");
  std::string comm_posts, comm_networks, comm_kind = "pstance", comm_destination, comm_out;
  int comm_n = 100;
  std::uint64_t comm_seed = 24;
  communities->add_option("--posts", comm_posts, "Posts JSONL file")->required();
  communities->add_option("--networks", comm_networks, "Networks JSONL file")->required();
  communities->add_option("--kind", comm_kind, "Dataset kind");
  communities->add_option("--destination", comm_destination, "Destination target")->required();
  communities->add_option("--n", comm_n, "Number of shots");
  communities->add_option("--seed", comm_seed, "Sampling seed");
  communities->add_option(
      "--out", comm_out,
      "Cache file (default: $SOCIALPET_CACHE/communities_<dest>_<n>_<seed>.json)");

  auto* jaccard = app.add_subcommand("jaccard", "Supporter/opponent network overlap");
  std::string jac_posts, jac_networks, jac_kind = "pstance", jac_dataset = "dataset";
  std::string jac_destination, jac_out = ".";
  int jac_n = 0;
  std::uint64_t jac_seed = 24;
  jaccard->add_option("--posts", jac_posts, "Posts JSONL file")->required();
  jaccard->add_option("--networks", jac_networks, "Networks JSONL file")->required();
  jaccard->add_option("--kind", jac_kind, "Dataset kind");
  jaccard->add_option("--dataset-name", jac_dataset, "Dataset name for the report");
  jaccard->add_option("--destination", jac_destination, "Restrict to one target");
  jaccard->add_option("--n", jac_n, "Few-shot profile size (0 = whole-dataset profiles)");
  jaccard->add_option("--seed", jac_seed, "Few-shot sampling seed");
  jaccard->add_option("--out-dir", jac_out, "Directory for jaccard.csv");

  auto* run_cmd = app.add_subcommand("run", "Run one experiment cell across its seeds");
  std::string run_config_path, run_destination, run_backend, run_out, run_method, run_social_flag;
  std::vector<std::uint64_t> run_seeds;
  int run_n = 0;
  bool run_force = false;
  run_cmd->add_option("--config", run_config_path, "Experiment config file")->required();
  run_cmd->add_option("--destination", run_destination, "Override run.destination");
  run_cmd->add_option("--n", run_n, "Override run.n");
  run_cmd->add_option("--seed", run_seeds, "Override run.seeds")->delimiter(',');
  run_cmd->add_option("--social", run_social_flag, "Override run.social (true|false)");
  run_cmd->add_option("--backend", run_backend, "Override backend.name");
  run_cmd->add_option("--out", run_out, "Override output.dir");
  run_cmd->add_option("--method", run_method, "Method label: pet|socialpet");
  run_cmd->add_flag("--force", run_force, "Write into an existing output directory");

  auto* matrix = app.add_subcommand("matrix", "Run the full experiment grid");
  std::string matrix_config_path, matrix_out;
  int matrix_jobs = 0;
  bool matrix_force = false;
  matrix->add_option("--config", matrix_config_path, "Experiment config file")->required();
  matrix->add_option("--jobs", matrix_jobs, "Parallel cells (default 1)");
  matrix->add_option("--out", matrix_out, "Override output.dir");
  matrix->add_flag("--force", matrix_force, "Write into an existing output directory");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Recompute reports from stored predictions");
  std::string eval_runs, eval_out = "evaluation";
  evaluate_cmd->add_option("--runs", eval_runs, "Runs directory")->required();
  evaluate_cmd->add_option("--out", eval_out, "Report output directory");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic stance corpus with networks");
  SyntheticSpec synth_spec;
  std::string synth_out = ".";
  std::vector<std::string> synth_sources;
  synth->add_option("--out-dir", synth_out, "Directory for posts.jsonl and networks.jsonl");
  synth->add_option("--destination", synth_spec.destination, "Destination target name");
  synth->add_option("--sources", synth_sources, "Additional source targets")->delimiter(',');
  synth->add_option("--posts-per-polarity", synth_spec.posts_per_polarity,
                    "Posts per community per target");
  synth->add_option("--pool-size", synth_spec.pool_size, "Community id-universe size");
  synth->add_option("--links", synth_spec.links_per_user, "Links sampled per user");
  synth->add_option("--homophily", synth_spec.homophily,
                    "Probability a link stays inside the user's community");
  synth->add_option("--label-flip", synth_spec.label_flip,
                    "Probability a stance disagrees with the community");
  synth->add_flag("--identical-texts", synth_spec.identical_texts,
                  "Make every post text identical (no textual signal)");
  synth->add_option("--seed", synth_spec.seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) {
      return cmd_stats(stats_posts, stats_kind, stats_out);
    }
    if (render_cmd->parsed()) {
      return cmd_render(render_posts, render_kind, render_patterns, render_social, render_mask,
                        render_limit);
    }
    if (communities->parsed()) {
      return cmd_communities(comm_posts, comm_networks, comm_kind, comm_destination, comm_n,
                             comm_seed, comm_out);
    }
    if (jaccard->parsed()) {
      return cmd_jaccard(jac_posts, jac_networks, jac_kind, jac_dataset, jac_destination, jac_n,
                         jac_seed, jac_out);
    }
    if (run_cmd->parsed()) {
      std::map<std::string, std::string> overrides;
      if (!run_destination.empty()) overrides["run.destination"] = run_destination;
      if (run_n > 0) overrides["run.n"] = std::to_string(run_n);
      if (!run_seeds.empty()) {
        std::string list;
        for (std::uint64_t seed : run_seeds) {
          if (!list.empty()) list += ',';
          list += std::to_string(seed);
        }
        overrides["run.seeds"] = list;
      }
      if (!run_social_flag.empty()) overrides["run.social"] = run_social_flag;
      if (!run_backend.empty()) overrides["backend.name"] = run_backend;
      if (!run_out.empty()) overrides["output.dir"] = run_out;
      return cmd_run(load_experiment(run_config_path, overrides), run_method, run_force);
    }
    if (matrix->parsed()) {
      std::map<std::string, std::string> overrides;
      if (matrix_jobs > 0) overrides["matrix.jobs"] = std::to_string(matrix_jobs);
      if (!matrix_out.empty()) overrides["output.dir"] = matrix_out;
      return cmd_matrix(load_experiment(matrix_config_path, overrides), matrix_force);
    }
    if (evaluate_cmd->parsed()) {
      return cmd_evaluate(eval_runs, eval_out);
    }
    if (synth->parsed()) {
      synth_spec.source_targets = synth_sources;
      return cmd_synth(synth_spec, synth_out);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
