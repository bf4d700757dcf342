#pragma once

#include <cstdint>
#include <vector>

#include "socialpet/mlm_backend.hpp"

namespace socialpet {

// Deterministic scorer over hashed bag-of-words features: whitespace-split
// lowercased tokens of the rendered text, hashed into 2^18 buckets, one
// linear head per verbalizer token, trained by full-batch gradient descent
// from zero initialization. Exactly reproducible for a fixed
// (training multiset, seed, config); training-order independent by canonical
// internal ordering.
class ReferenceScorer : public Scorer {
 public:
  static constexpr std::size_t kHashBits = 18;
  static constexpr std::size_t kFeatureSpace = std::size_t{1} << kHashBits;

  ReferenceScorer(PatternVerbalizerPair pvp, ScorerConfig config);

  std::string backend_name() const override { return "reference"; }
  std::string mask_token() const override { return "<mask>"; }
  bool supports_auxiliary_lm() const override { return false; }
  std::size_t token_count(std::string_view text) const override;

  void fine_tune(const std::vector<LabeledInstance>& labeled,
                 const std::vector<std::string>& unlabeled_texts,
                 const ScorerConfig& config) override;

  LabelScores score(const ClozeInstance& instance) const override;

  nlohmann::ordered_json checkpoint() const override;

  // Linear-model introspection; weights are per verbalizer head.
  std::vector<double>& weights(StanceLabel label);
  const std::vector<double>& weights(StanceLabel label) const;

  const PatternVerbalizerPair& pvp() const { return pvp_; }

 private:
  PatternVerbalizerPair pvp_;
  ScorerConfig config_;
  std::array<std::vector<double>, 2> weights_;  // [label_index][feature]
};

// The same linear model trained against soft target distributions.
class ReferenceTextClassifier : public TextClassifier {
 public:
  explicit ReferenceTextClassifier(ScorerConfig config);

  void train(const std::vector<Example>& examples, const ScorerConfig& config) override;
  std::array<double, 2> scores(std::string_view text) const override;

 private:
  ScorerConfig config_;
  std::array<std::vector<double>, 2> weights_;
};

class ReferenceBackend : public Backend {
 public:
  std::string name() const override { return "reference"; }
  std::string mask_token() const override { return "<mask>"; }

  // Learning rate and step budget are tuned for gradient descent on count
  // features rather than transformer fine-tuning.
  ScorerConfig default_config() const override;

  std::unique_ptr<Scorer> make_scorer(const PatternVerbalizerPair& pvp,
                                      const ScorerConfig& config) const override;
  std::unique_ptr<TextClassifier> make_classifier(const ScorerConfig& config) const override;
};

// Shared by scorer and classifier: hashed token counts of `text`.
std::vector<std::pair<std::uint32_t, double>> hashed_features(std::string_view text);

}  // namespace socialpet
