#include "socialpet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "socialpet/errors.hpp"
#include "socialpet/util.hpp"

namespace socialpet {

namespace {

std::string slugify(std::string_view text) {
  std::string slug;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      slug += '_';
    }
  }
  return slug;
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  std::istringstream in(value);
  while (std::getline(in, current, ',')) {
    std::string trimmed = trim(current);
    if (!trimmed.empty()) items.push_back(std::move(trimmed));
  }
  return items;
}

bool parse_bool(const std::string& value, const std::string& key) {
  std::string lowered = to_lower_ascii(trim(value));
  if (lowered == "true" || lowered == "1" || lowered == "yes") return true;
  if (lowered == "false" || lowered == "0" || lowered == "no") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + value + "'");
}

int parse_int(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    int parsed = std::stoi(trim(value), &pos);
    if (pos != trim(value).size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    double parsed = std::stod(trim(value), &pos);
    if (pos != trim(value).size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
  }
}

}  // namespace

std::string_view to_string(Method method) {
  return method == Method::PET ? "pet" : "socialpet";
}

Method parse_method(std::string_view text) {
  std::string lowered = to_lower_ascii(text);
  if (lowered == "pet") return Method::PET;
  if (lowered == "socialpet") return Method::SOCIALPET;
  throw ValidationError("unknown method: '" + std::string(text) + "'");
}

const DatasetConfig& ExperimentConfig::primary_dataset() const {
  if (datasets.empty()) {
    throw ConfigError("no dataset configured");
  }
  return datasets.front();
}

ScorerConfig ExperimentConfig::scorer_config(const Backend& backend, std::uint64_t seed) const {
  ScorerConfig config = backend.default_config();
  for (const auto& [key, value] : scorer_overrides) {
    if (key == "learning_rate") {
      config.learning_rate = parse_double(value, "scorer.learning_rate");
    } else if (key == "batch_size") {
      config.batch_size = parse_int(value, "scorer.batch_size");
    } else if (key == "max_sequence_length") {
      config.max_sequence_length = parse_int(value, "scorer.max_sequence_length");
    } else if (key == "auxiliary_lm_weight") {
      config.auxiliary_lm_weight = parse_double(value, "scorer.auxiliary_lm_weight");
    } else if (key == "training_steps") {
      config.training_steps = parse_int(value, "scorer.training_steps");
    } else {
      throw ConfigError("unknown scorer option: 'scorer." + key + "'");
    }
  }
  if (config.batch_size <= 0 || config.max_sequence_length <= 0 || config.training_steps < 0 ||
      config.auxiliary_lm_weight < 0.0) {
    throw ConfigError("invalid scorer configuration values");
  }
  config.seed = seed;
  return config;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path.string());
  }
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key=value", line_no);
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError("empty key", line_no);
    }
    kv[key] = value;  // later keys win
  }
  return kv;
}

ExperimentConfig experiment_config_from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentConfig config;

  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  // Datasets: either a single flat "dataset.*" section, or named sections
  // listed in "matrix.datasets".
  std::vector<std::string> dataset_names;
  if (const std::string* names = get("matrix.datasets")) {
    dataset_names = split_list(*names);
  }
  if (dataset_names.empty()) {
    if (get("dataset.posts") != nullptr) {
      DatasetConfig dataset;
      if (const std::string* v = get("dataset.name")) dataset.name = *v;
      dataset.posts_path = *get("dataset.posts");
      if (const std::string* v = get("dataset.networks")) dataset.networks_path = *v;
      if (const std::string* v = get("dataset.kind")) dataset.kind = parse_dataset_kind(*v);
      config.datasets.push_back(std::move(dataset));
    }
  } else {
    for (const std::string& name : dataset_names) {
      DatasetConfig dataset;
      dataset.name = name;
      const std::string* posts = get("dataset." + name + ".posts");
      if (posts == nullptr) {
        throw ConfigError("missing key 'dataset." + name + ".posts'");
      }
      dataset.posts_path = *posts;
      if (const std::string* v = get("dataset." + name + ".networks")) dataset.networks_path = *v;
      if (const std::string* v = get("dataset." + name + ".kind")) {
        dataset.kind = parse_dataset_kind(*v);
      }
      config.datasets.push_back(std::move(dataset));
    }
  }

  if (const std::string* v = get("run.destination")) config.destination = *v;
  if (const std::string* v = get("run.n")) config.n_shots = parse_int(*v, "run.n");
  if (const std::string* v = get("run.seeds")) {
    config.seeds.clear();
    for (const std::string& item : split_list(*v)) {
      config.seeds.push_back(static_cast<std::uint64_t>(parse_int(item, "run.seeds")));
    }
  }
  if (const std::string* v = get("run.social")) config.social = parse_bool(*v, "run.social");
  if (const std::string* v = get("run.pvps")) {
    config.pattern_ids.clear();
    for (const std::string& item : split_list(*v)) {
      config.pattern_ids.push_back(parse_pattern_id(item));
    }
  }
  if (const std::string* v = get("backend.name")) config.backend_name = *v;
  if (const std::string* v = get("ensemble.temperature")) {
    config.temperature = parse_double(*v, "ensemble.temperature");
  }
  if (const std::string* v = get("ensemble.mode")) config.weight_mode = parse_weight_mode(*v);
  if (const std::string* v = get("output.dir")) config.output_dir = *v;
  if (const std::string* v = get("matrix.n_shots")) {
    config.matrix_n.clear();
    for (const std::string& item : split_list(*v)) {
      config.matrix_n.push_back(parse_int(item, "matrix.n_shots"));
    }
  }
  if (const std::string* v = get("matrix.destinations")) {
    config.matrix_destinations = split_list(*v);
  }
  if (const std::string* v = get("matrix.methods")) {
    config.methods.clear();
    for (const std::string& item : split_list(*v)) {
      config.methods.push_back(parse_method(item));
    }
  }
  if (const std::string* v = get("matrix.jobs")) config.jobs = parse_int(*v, "matrix.jobs");

  for (const auto& [key, value] : kv) {
    if (key.rfind("scorer.", 0) == 0) {
      config.scorer_overrides[key.substr(7)] = value;
    }
  }

  // Reject unknown keys so typos do not silently change an experiment.
  static const std::set<std::string> known{
      "dataset.name", "dataset.posts", "dataset.networks", "dataset.kind",
      "run.destination", "run.n", "run.seeds", "run.social", "run.pvps",
      "backend.name", "ensemble.temperature", "ensemble.mode", "output.dir",
      "matrix.datasets", "matrix.n_shots", "matrix.destinations", "matrix.methods",
      "matrix.jobs"};
  for (const auto& [key, value] : kv) {
    if (known.count(key) > 0 || key.rfind("scorer.", 0) == 0) continue;
    bool named_dataset = false;
    for (const std::string& name : dataset_names) {
      const std::string prefix = "dataset." + name + ".";
      if (key.rfind(prefix, 0) == 0) {
        const std::string field = key.substr(prefix.size());
        if (field == "posts" || field == "networks" || field == "kind") {
          named_dataset = true;
          break;
        }
      }
    }
    if (!named_dataset) {
      throw ConfigError("unknown config key: '" + key + "'");
    }
  }

  if (config.seeds.empty()) {
    throw ConfigError("at least one seed is required");
  }
  std::set<std::uint64_t> distinct(config.seeds.begin(), config.seeds.end());
  if (distinct.size() != config.seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (config.n_shots < 1) {
    throw ConfigError("run.n must be >= 1");
  }
  if (config.jobs < 1) {
    throw ConfigError("matrix.jobs must be >= 1");
  }
  return config;
}

std::map<PostKey, CommunityLabel> assign_training_communities(const std::vector<Post>& train) {
  std::map<PostKey, CommunityLabel> communities;
  for (const Post& post : train) {
    communities.emplace(key_of(post), CommunityLabel{post.target, polarity_for(post.stance)});
  }
  return communities;
}

RunContext load_run_context(const DatasetConfig& dataset) {
  RunContext context;
  context.dataset = dataset;
  context.posts = load_posts(dataset.posts_path, dataset.kind);
  if (!dataset.networks_path.empty()) {
    context.networks = load_networks(dataset.networks_path);
    context.networks_available = true;
  }
  return context;
}

namespace {

nlohmann::ordered_json scorer_sidecar(const PvpScorerRecord& record, const ScorerConfig& config,
                                      std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["backend_name"] = record.scorer->backend_name();
  j["pvp_id"] = record.pvp.id();
  j["config"] = config.to_json();
  j["seed"] = seed;
  j["training_accuracy"] = record.post_train_accuracy;
  j["pre_training_accuracy"] = record.pre_train_accuracy;
  return j;
}

std::string prediction_lines(const std::vector<Post>& test,
                             const std::vector<StanceLabel>& predicted,
                             const std::map<std::string, CommunityLabel>& user_communities,
                             bool have_communities) {
  std::ostringstream out;
  for (std::size_t i = 0; i < test.size(); ++i) {
    nlohmann::ordered_json j;
    j["post_id"] = test[i].post_id;
    j["gold"] = std::string(to_string(test[i].stance));
    j["predicted"] = std::string(to_string(predicted[i]));
    if (have_communities) {
      j["community"] = user_communities.at(test[i].user_id).render();
    } else {
      j["community"] = nullptr;
    }
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace

SeedRunOutput run_single_loaded(const RunContext& context, const ExperimentConfig& config,
                                bool social, const std::string& method_label, std::uint64_t seed) {
  const Backend& backend = lookup_backend(config.backend_name);
  const ScorerConfig scorer_config = config.scorer_config(backend, seed);

  FewShotSplit split = split_few_shot(context.posts, config.destination, config.n_shots, seed);
  split.manifest.dataset = context.dataset.name;
  if (split.test.empty()) {
    throw ConfigError("destination '" + config.destination + "' has no test posts");
  }

  const auto training_communities = assign_training_communities(split.train);

  // Profiles come from the n shots only; absent users contribute empty
  // networks and flow through the tie-break path.
  const std::vector<Post> shots = split.destination_shots();
  std::vector<std::pair<Post, UserNetwork>> shot_pairs;
  shot_pairs.reserve(shots.size());
  for (const Post& post : shots) {
    auto it = context.networks.find(post.user_id);
    UserNetwork net = it != context.networks.end() ? it->second : UserNetwork{post.user_id, {}, {}, {}};
    shot_pairs.emplace_back(post, std::move(net));
  }
  const CommunityProfiles profiles = build_community_profiles(shot_pairs, config.destination);

  const bool infer = social || context.networks_available;
  std::map<std::string, CommunityLabel> user_communities;
  std::size_t fallback_count = 0;
  if (infer) {
    std::set<std::string> users;
    for (const UnlabeledPost& post : split.unlabeled_pool) users.insert(post.user_id);
    for (const Post& post : split.test) users.insert(post.user_id);
    for (const std::string& user : users) {
      std::set<std::string> net;
      auto it = context.networks.find(user);
      if (it != context.networks.end()) net = aggregate_network(it->second);
      CommunityInference inference =
          infer_community_explain(net, profiles.supporter, profiles.opponent);
      if (inference.tie_on_overlap) ++fallback_count;
      user_communities.emplace(user, inference.label);
    }
  }

  std::vector<PatternVerbalizerPair> pvps;
  for (PatternId id : config.pattern_ids) {
    pvps.push_back(PatternVerbalizerPair{id, social, Verbalizer{}});
  }

  std::vector<PvpScorerRecord> records =
      train_pvp_scorers(split, pvps, training_communities, backend, scorer_config);

  std::vector<double> accuracies;
  for (const PvpScorerRecord& record : records) accuracies.push_back(record.pre_train_accuracy);
  EnsembleSpec spec;
  spec.mode = config.weight_mode;
  spec.temperature = config.temperature;
  spec.weights = compute_ensemble_weights(accuracies, config.weight_mode);

  std::vector<PoolItem> pool;
  pool.reserve(split.unlabeled_pool.size());
  for (const UnlabeledPost& unlabeled : split.unlabeled_pool) {
    std::optional<CommunityLabel> community;
    if (social) community = user_communities.at(unlabeled.user_id);
    PoolItem item;
    item.post_id = unlabeled.post_id;
    item.text = classification_text(unlabeled.text, community, social);
    Post as_post{unlabeled.post_id, unlabeled.user_id, unlabeled.text, unlabeled.target,
                 StanceLabel::AGAINST, std::nullopt};
    for (std::size_t p = 0; p < pvps.size(); ++p) {
      ClozeInstance instance =
          render(as_post, pvps[p], community, records[p].scorer->mask_token());
      instance = truncate_for_budget(
          instance, static_cast<std::size_t>(scorer_config.max_sequence_length),
          [&](std::string_view text) { return records[p].scorer->token_count(text); });
      item.renderings.push_back(std::move(instance));
    }
    pool.push_back(std::move(item));
  }

  const std::vector<SoftLabeledExample> soft = ensemble_soft_label(pool, records, spec);

  std::vector<ShotExample> shot_examples;
  shot_examples.reserve(shots.size());
  for (const Post& post : shots) {
    std::optional<CommunityLabel> community;
    if (social) community = training_communities.at(key_of(post));
    shot_examples.push_back(
        ShotExample{classification_text(post.text, community, social), post.stance});
  }

  const std::unique_ptr<TextClassifier> classifier =
      distill_final_classifier(soft, shot_examples, backend, scorer_config);

  std::vector<StanceLabel> gold;
  std::vector<StanceLabel> predicted;
  gold.reserve(split.test.size());
  predicted.reserve(split.test.size());
  for (const Post& post : split.test) {
    std::optional<CommunityLabel> community;
    if (infer) community = user_communities.at(post.user_id);
    predicted.push_back(predict_stance(*classifier, post, community, social));
    gold.push_back(post.stance);
  }

  SeedRunOutput output;
  output.seed_report = SeedReport{seed, evaluate(gold, predicted)};
  output.manifest = split.manifest;

  const std::filesystem::path seed_dir = config.output_dir / slugify(context.dataset.name) /
                                         slugify(config.destination) /
                                         std::to_string(config.n_shots) / std::to_string(seed);
  const std::filesystem::path run_dir = seed_dir / method_label;
  output.run_dir = run_dir;
  std::filesystem::create_directories(run_dir);

  write_file_atomic(seed_dir / "manifest.json", split.manifest.to_json().dump(2) + "\n");

  if (infer) {
    nlohmann::ordered_json communities_json;
    for (const auto& [user, label] : user_communities) {
      communities_json[user] = label.render();
    }
    nlohmann::ordered_json cache;
    cache["destination"] = config.destination;
    cache["n"] = config.n_shots;
    cache["seed"] = seed;
    cache["tie_break_fallbacks"] = fallback_count;
    cache["communities"] = std::move(communities_json);
    write_file_atomic(seed_dir / "communities.json", cache.dump(2) + "\n");
  }

  for (const PvpScorerRecord& record : records) {
    const std::string stem = "scorer_" + record.pvp.id();
    write_file(run_dir / (stem + ".json"),
               scorer_sidecar(record, scorer_config, seed).dump(2) + "\n");
    write_file(run_dir / (stem + ".ckpt.json"), record.scorer->checkpoint().dump() + "\n");
  }

  nlohmann::ordered_json run_config;
  run_config["dataset"] = context.dataset.name;
  run_config["destination"] = config.destination;
  run_config["n"] = config.n_shots;
  run_config["seed"] = seed;
  run_config["method"] = method_label;
  run_config["social"] = social;
  run_config["backend"] = config.backend_name;
  nlohmann::ordered_json pvp_names = nlohmann::ordered_json::array();
  for (PatternId id : config.pattern_ids) pvp_names.push_back(std::string(to_string(id)));
  run_config["pvps"] = std::move(pvp_names);
  run_config["scorer"] = scorer_config.to_json();
  run_config["ensemble"] = {{"mode", std::string(to_string(spec.mode))},
                            {"temperature", spec.temperature}};
  write_file(run_dir / "run_config.json", run_config.dump(2) + "\n");

  nlohmann::ordered_json weights_json;
  weights_json["mode"] = std::string(to_string(spec.mode));
  weights_json["temperature"] = spec.temperature;
  nlohmann::ordered_json per_pvp;
  for (std::size_t p = 0; p < records.size(); ++p) {
    per_pvp[records[p].pvp.id()] = spec.weights[p];
  }
  weights_json["weights"] = std::move(per_pvp);
  write_file(run_dir / "weights.json", weights_json.dump(2) + "\n");

  std::ostringstream soft_lines;
  for (const SoftLabeledExample& example : soft) {
    nlohmann::ordered_json j;
    j["text"] = example.text;
    j["p_favor"] = example.distribution[label_index(StanceLabel::FAVOR)];
    j["p_against"] = example.distribution[label_index(StanceLabel::AGAINST)];
    soft_lines << j.dump() << '\n';
  }
  write_file(run_dir / "soft_labels.jsonl", soft_lines.str());

  write_file(run_dir / "predictions.jsonl",
             prediction_lines(split.test, predicted, user_communities, infer));

  return output;
}

EvaluationReport run_single(const ExperimentConfig& config, std::uint64_t seed) {
  RunContext context = load_run_context(config.primary_dataset());
  const std::string method_label(to_string(config.social ? Method::SOCIALPET : Method::PET));
  return run_single_loaded(context, config, config.social, method_label, seed).seed_report.report;
}

RunRecord run_cell(const RunContext& context, const ExperimentConfig& config, Method method,
                   const std::string& destination, int n) {
  ExperimentConfig cell_config = config;
  cell_config.destination = destination;
  cell_config.n_shots = n;
  const bool social = method == Method::SOCIALPET && config.social;
  const std::string method_label(to_string(method));

  RunRecord record;
  record.dataset = context.dataset.name;
  record.destination = destination;
  record.n = n;
  record.method = method_label;

  for (std::uint64_t seed : config.seeds) {
    try {
      SeedRunOutput output = run_single_loaded(context, cell_config, social, method_label, seed);
      record.seeds.push_back(output.seed_report);
    } catch (const std::exception& e) {
      record.failed_seeds.push_back(seed);
      const std::filesystem::path failure_dir =
          config.output_dir / slugify(context.dataset.name) / slugify(destination) /
          std::to_string(n) / std::to_string(seed) / method_label;
      nlohmann::ordered_json failure;
      failure["seed"] = seed;
      failure["error"] = e.what();
      try {
        std::filesystem::create_directories(failure_dir);
        write_file(failure_dir / "failure.json", failure.dump(2) + "\n");
      } catch (const std::exception&) {
        // The failure is still reported through the run record.
      }
    }
  }
  summarize_run(record);
  return record;
}

MatrixResult run_matrix(const ExperimentConfig& config) {
  if (config.datasets.empty()) {
    throw ConfigError("matrix requires at least one dataset");
  }
  if (config.matrix_n.empty() || config.methods.empty()) {
    throw ConfigError("matrix requires n-shot settings and methods");
  }

  MatrixResult result;

  std::vector<RunContext> contexts;
  std::vector<const RunContext*> loaded;
  for (const DatasetConfig& dataset : config.datasets) {
    try {
      contexts.push_back(load_run_context(dataset));
    } catch (const std::exception& e) {
      result.failures.push_back("dataset '" + dataset.name + "': " + e.what());
    }
  }
  for (const RunContext& context : contexts) loaded.push_back(&context);

  struct Cell {
    const RunContext* context;
    std::string destination;
    int n;
    Method method;
  };
  std::vector<Cell> cells;
  for (const RunContext* context : loaded) {
    std::vector<std::string> destinations = config.matrix_destinations;
    if (destinations.empty()) {
      std::set<std::string> targets;
      for (const Post& post : context->posts) targets.insert(post.target);
      destinations.assign(targets.begin(), targets.end());
    }
    for (const std::string& destination : destinations) {
      for (int n : config.matrix_n) {
        for (Method method : config.methods) {
          cells.push_back(Cell{context, destination, n, method});
        }
      }
    }
  }

  result.records.resize(cells.size());
  std::atomic<std::size_t> next{0};
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(cells.size())));
  auto worker = [&] {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= cells.size()) break;
      const Cell& cell = cells[index];
      result.records[index] =
          run_cell(*cell.context, config, cell.method, cell.destination, cell.n);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int i = 0; i < jobs; ++i) threads.emplace_back(worker);
    for (std::thread& thread : threads) thread.join();
  }

  for (const RunRecord& record : result.records) {
    for (std::uint64_t seed : record.failed_seeds) {
      result.failures.push_back(record.method + " " + record.dataset + "/" + record.destination +
                                " n=" + std::to_string(record.n) +
                                " seed=" + std::to_string(seed) + " failed");
    }
  }

  // Whole-dataset supporter/opponent separability per target.
  for (const RunContext* context : loaded) {
    if (!context->networks_available) continue;
    std::set<std::string> targets;
    for (const Post& post : context->posts) targets.insert(post.target);
    for (const std::string& target : targets) {
      std::vector<std::pair<Post, UserNetwork>> pairs;
      for (const Post& post : context->posts) {
        if (post.target != target) continue;
        auto it = context->networks.find(post.user_id);
        UserNetwork net =
            it != context->networks.end() ? it->second : UserNetwork{post.user_id, {}, {}, {}};
        pairs.emplace_back(post, std::move(net));
      }
      try {
        CommunityProfiles profiles = build_community_profiles(pairs, target);
        result.jaccard.push_back(
            JaccardRow{context->dataset.name, target,
                       jaccard_overlap(profiles.supporter, profiles.opponent)});
      } catch (const std::exception&) {
        // Both profiles empty (no networks for this target); no row.
      }
    }
  }

  emit_reports(result.records, result.jaccard, config.output_dir);

  if (!result.failures.empty()) {
    std::ostringstream out;
    for (const std::string& failure : result.failures) out << failure << '\n';
    write_file(config.output_dir / "failures.txt", out.str());
  }
  return result;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.posts_per_polarity <= 0 || spec.pool_size <= 0 || spec.links_per_user < 0) {
    throw ConfigError("invalid synthetic generator sizes");
  }
  if (spec.homophily < 0.0 || spec.homophily > 1.0 || spec.label_flip < 0.0 ||
      spec.label_flip > 1.0) {
    throw ConfigError("homophily and label_flip must be in [0, 1]");
  }

  std::mt19937_64 gen(spec.seed);
  SyntheticData data;

  std::vector<std::string> targets{spec.destination};
  targets.insert(targets.end(), spec.source_targets.begin(), spec.source_targets.end());

  const std::array<std::vector<std::string>, 2> cues = {
      std::vector<std::string>{"disaster", "corrupt", "furious", "failed", "resign"},
      std::vector<std::string>{"fantastic", "proud", "hopeful", "inspiring", "landslide"}};

  for (const std::string& target : targets) {
    const std::string slug = slugify(target);
    std::array<std::vector<std::string>, 2> pools;  // [polarity==SUPPORTER ? 1 : 0]
    for (int i = 0; i < spec.pool_size; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%04d", i);
      pools[0].push_back(slug + "_opp_" + buf);
      pools[1].push_back(slug + "_sup_" + buf);
    }
    const std::array<std::string, 2> hubs{slug + "_opp_hub", slug + "_sup_hub"};

    for (int side = 0; side < 2; ++side) {
      const Polarity polarity = side == 1 ? Polarity::SUPPORTER : Polarity::OPPONENT;
      for (int i = 0; i < spec.posts_per_polarity; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d", i);
        const std::string suffix = std::string(side == 1 ? "s" : "o") + buf;
        const std::string user_id = "user_" + slug + "_" + suffix;
        const std::string post_id = "post_" + slug + "_" + suffix;

        UserNetwork net;
        net.user_id = user_id;
        net.friends.insert(hubs[static_cast<std::size_t>(side)]);
        for (int k = 0; k < spec.links_per_user; ++k) {
          const bool own = uniform01(gen) < spec.homophily;
          const auto& pool = pools[static_cast<std::size_t>(own ? side : 1 - side)];
          const std::string& id = pool[draw_below(gen, pool.size())];
          switch (k % 3) {
            case 0: net.followers.insert(id); break;
            case 1: net.friends.insert(id); break;
            default: net.liked_users.insert(id); break;
          }
        }

        StanceLabel community_stance =
            polarity == Polarity::SUPPORTER ? StanceLabel::FAVOR : StanceLabel::AGAINST;
        StanceLabel stance = uniform01(gen) < spec.label_flip ? other_label(community_stance)
                                                              : community_stance;

        std::string text;
        if (spec.identical_texts) {
          text = "another big rally happening downtown tonight";
        } else {
          const auto& cue = cues[label_index(stance)];
          text = cue[draw_below(gen, cue.size())] + " " + cue[draw_below(gen, cue.size())] +
                 " campaign post " + suffix;
        }

        Post post;
        post.post_id = post_id;
        post.user_id = user_id;
        post.text = std::move(text);
        post.target = target;
        post.stance = stance;
        data.posts.push_back(std::move(post));
        data.true_user_communities.emplace(user_id, CommunityLabel{target, polarity});
        data.networks.emplace(user_id, std::move(net));
      }
    }
  }
  return data;
}

void write_posts_jsonl(const std::vector<Post>& posts, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const Post& post : posts) {
    nlohmann::ordered_json j;
    j["post_id"] = post.post_id;
    j["user_id"] = post.user_id;
    j["text"] = post.text;
    j["target"] = post.target;
    j["stance"] = std::string(to_string(post.stance));
    if (post.split_hint.has_value()) {
      j["split"] = *post.split_hint == SplitHint::TRAIN ? "train" : "test";
    }
    out << j.dump() << '\n';
  }
  write_file(path, out.str());
}

void write_networks_jsonl(const NetworkMap& networks, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& [user_id, net] : networks) {
    nlohmann::ordered_json j;
    j["user_id"] = user_id;
    j["followers"] = net.followers;
    j["friends"] = net.friends;
    j["likes"] = net.liked_users;
    out << j.dump() << '\n';
  }
  write_file(path, out.str());
}

}  // namespace socialpet
