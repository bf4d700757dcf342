#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "socialpet/corpus.hpp"
#include "socialpet/patterns.hpp"

namespace socialpet {

struct ScorerConfig {
  double learning_rate = 1e-5;
  int batch_size = 16;
  int max_sequence_length = 256;
  double auxiliary_lm_weight = 1e-4;
  int training_steps = 200;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const;
};

// Log-domain score per stance label; higher means more likely.
struct LabelScores {
  std::array<double, 2> log_scores{};  // indexed by label_index

  double at(StanceLabel label) const { return log_scores[label_index(label)]; }
  double& at(StanceLabel label) { return log_scores[label_index(label)]; }
};

// Deterministic argmax; exact ties resolve to AGAINST (first in label order).
StanceLabel argmax_label(const LabelScores& scores);

struct LabeledInstance {
  ClozeInstance instance;
  StanceLabel label = StanceLabel::AGAINST;
};

// One trainable cloze scorer bound to a single pattern-verbalizer pair.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::string backend_name() const = 0;
  virtual std::string mask_token() const = 0;
  virtual bool supports_auxiliary_lm() const = 0;
  virtual std::size_t token_count(std::string_view text) const = 0;

  // Trains on the labeled cloze instances. unlabeled_texts feed the auxiliary
  // language-modeling objective when the scorer supports it.
  virtual void fine_tune(const std::vector<LabeledInstance>& labeled,
                         const std::vector<std::string>& unlabeled_texts,
                         const ScorerConfig& config) = 0;

  virtual LabelScores score(const ClozeInstance& instance) const = 0;

  // Backend-owned checkpoint payload for persistence.
  virtual nlohmann::ordered_json checkpoint() const = 0;
};

// Fraction of instances whose argmax score equals the gold label.
double training_accuracy(const Scorer& scorer, const std::vector<LabeledInstance>& labeled);

// Plain sequence classifier used for the distillation stage.
class TextClassifier {
 public:
  virtual ~TextClassifier() = default;

  struct Example {
    std::string text;
    std::array<double, 2> target_distribution{};  // indexed by label_index
  };

  virtual void train(const std::vector<Example>& examples, const ScorerConfig& config) = 0;
  virtual std::array<double, 2> scores(std::string_view text) const = 0;

  StanceLabel predict(std::string_view text) const;
};

// Factory for the scorers and classifiers of one model family.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;
  virtual std::string mask_token() const = 0;

  // Standard fine-tuning hyperparameters; backends may tune values for
  // their own estimator family.
  virtual ScorerConfig default_config() const { return ScorerConfig{}; }

  virtual std::unique_ptr<Scorer> make_scorer(const PatternVerbalizerPair& pvp,
                                              const ScorerConfig& config) const = 0;
  virtual std::unique_ptr<TextClassifier> make_classifier(const ScorerConfig& config) const = 0;
};

// Process-wide backend registry. "reference" is always present.
const Backend& lookup_backend(std::string_view name);
void register_backend(std::unique_ptr<Backend> backend);
std::vector<std::string> registered_backends();

}  // namespace socialpet
