#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socialpet/corpus.hpp"
#include "socialpet/evaluation.hpp"
#include "socialpet/mlm_backend.hpp"
#include "socialpet/pet_pipeline.hpp"
#include "socialpet/social_graph.hpp"

namespace socialpet {

enum class Method { PET, SOCIALPET };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct DatasetConfig {
  std::string name = "dataset";
  std::filesystem::path posts_path;
  std::filesystem::path networks_path;  // may be empty (PET-only runs)
  DatasetKind kind = DatasetKind::PSTANCE;
};

struct ExperimentConfig {
  std::vector<DatasetConfig> datasets;  // single runs use the first entry
  std::string destination;
  int n_shots = 100;
  std::vector<std::uint64_t> seeds{24, 524, 1024, 1524, 2024};
  std::vector<PatternId> pattern_ids{PatternId::P1, PatternId::P2};
  bool social = true;
  std::string backend_name = "reference";
  std::map<std::string, std::string> scorer_overrides;  // applied over backend defaults
  double temperature = 2.0;
  WeightMode weight_mode = WeightMode::ACCURACY_WEIGHTED;
  std::filesystem::path output_dir = "runs";

  // Matrix settings.
  std::vector<int> matrix_n{100, 200, 300, 400};
  std::vector<std::string> matrix_destinations;  // empty -> every target in the dataset
  std::vector<Method> methods{Method::PET, Method::SOCIALPET};
  int jobs = 1;

  const DatasetConfig& primary_dataset() const;

  // Backend defaults overlaid with the explicit scorer.* overrides; the run
  // seed is always stamped in.
  ScorerConfig scorer_config(const Backend& backend, std::uint64_t seed) const;
};

// Flat dotted-key config file ("scorer.learning_rate=1e-5"). '#' starts a
// comment; later keys win.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);
ExperimentConfig experiment_config_from_kv(const std::map<std::string, std::string>& kv);

// Training posts carry gold labels, so their community is read off directly:
// FAVOR -> (target, SUPPORTER), AGAINST -> (target, OPPONENT).
std::map<PostKey, CommunityLabel> assign_training_communities(const std::vector<Post>& train);

// Dataset loaded once and shared across seeds/methods.
struct RunContext {
  DatasetConfig dataset;
  std::vector<Post> posts;
  NetworkMap networks;
  bool networks_available = false;
};

RunContext load_run_context(const DatasetConfig& dataset);

struct SeedRunOutput {
  SeedReport seed_report;
  SplitManifest manifest;
  std::filesystem::path run_dir;
};

// One (destination, n, seed, method) pipeline execution; writes all
// artifacts under out_dir/<dataset>/<destination>/<n>/<seed>/<method>/.
SeedRunOutput run_single_loaded(const RunContext& context, const ExperimentConfig& config,
                                bool social, const std::string& method_label, std::uint64_t seed);

// Single-seed entry point: loads data and runs with the configured
// social flag.
EvaluationReport run_single(const ExperimentConfig& config, std::uint64_t seed);

// All seeds of one cell; failed seeds are recorded and excluded from the
// averages.
RunRecord run_cell(const RunContext& context, const ExperimentConfig& config, Method method,
                   const std::string& destination, int n);

struct MatrixResult {
  std::vector<RunRecord> records;
  std::vector<JaccardRow> jaccard;
  std::vector<std::string> failures;  // human-readable per-cell/per-seed failures
};

// Full grid: datasets x destinations x n x methods, then summary emission
// under config.output_dir.
MatrixResult run_matrix(const ExperimentConfig& config);

// ---- Synthetic data (acceptance-scale stand-in for the tweet corpora) ----

struct SyntheticSpec {
  std::string destination = "Jordan Reyes";
  std::vector<std::string> source_targets;
  int posts_per_polarity = 300;
  int pool_size = 48;       // community id-universe size
  int links_per_user = 8;
  double homophily = 1.0;   // P(link drawn from own community pool)
  double label_flip = 0.0;  // P(stance disagrees with community)
  bool identical_texts = false;
  std::uint64_t seed = 7;
};

struct SyntheticData {
  std::vector<Post> posts;
  NetworkMap networks;
  std::map<std::string, CommunityLabel> true_user_communities;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

void write_posts_jsonl(const std::vector<Post>& posts, const std::filesystem::path& path);
void write_networks_jsonl(const NetworkMap& networks, const std::filesystem::path& path);

}  // namespace socialpet
