#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "socialpet/mlm_backend.hpp"

namespace socialpet {

// Contract a pretrained masked language model must satisfy to back PET.
// The adapter below turns any implementation into a Scorer.
class MaskedLanguageModel {
 public:
  virtual ~MaskedLanguageModel() = default;

  virtual std::string model_name() const = 0;
  virtual std::string mask_token() const = 0;

  virtual std::vector<std::string> tokenize(std::string_view text) const = 0;

  // The vocabulary id of `word` when it is a single vocabulary item,
  // std::nullopt otherwise (unknown or multi-token).
  virtual std::optional<std::int64_t> single_token_id(std::string_view word) const = 0;

  virtual std::size_t vocab_size() const = 0;

  // Logits over the vocabulary at the (unique) mask position.
  virtual std::vector<double> logits_at_mask(const std::vector<std::string>& tokens) const = 0;

  struct ClozeExample {
    std::vector<std::string> tokens;
    std::int64_t gold_vocab_id = 0;
  };

  // One gradient step over a cloze batch.
  virtual void train_cloze_batch(const std::vector<ClozeExample>& batch, double learning_rate) = 0;

  // Auxiliary language-modeling step on raw texts; optional capability.
  virtual bool supports_auxiliary_lm() const { return false; }
  virtual void train_lm_batch(const std::vector<std::vector<std::string>>& token_streams,
                              double learning_rate, double weight) {
    (void)token_streams;
    (void)learning_rate;
    (void)weight;
  }
};

// PET scorer over a masked LM: renders are re-masked with the model's own
// mask token, scored by comparing the verbalizer tokens' logits at the mask.
// Construction fails fast when a verbalizer token is not a single vocabulary
// item.
class MlmScorer : public Scorer {
 public:
  MlmScorer(std::shared_ptr<MaskedLanguageModel> model, PatternVerbalizerPair pvp,
            ScorerConfig config);

  std::string backend_name() const override;
  std::string mask_token() const override;
  bool supports_auxiliary_lm() const override;
  std::size_t token_count(std::string_view text) const override;

  void fine_tune(const std::vector<LabeledInstance>& labeled,
                 const std::vector<std::string>& unlabeled_texts,
                 const ScorerConfig& config) override;

  LabelScores score(const ClozeInstance& instance) const override;

  nlohmann::ordered_json checkpoint() const override;

 private:
  std::vector<std::string> prepare_tokens(const ClozeInstance& instance,
                                          int max_sequence_length) const;

  std::shared_ptr<MaskedLanguageModel> model_;
  PatternVerbalizerPair pvp_;
  ScorerConfig config_;
  std::array<std::int64_t, 2> verbalizer_ids_{};  // by label_index
};

// Backend wrapper for a masked LM; the classifier side reuses the reference
// linear model (PET distills into a standard classifier).
class MlmBackend : public Backend {
 public:
  explicit MlmBackend(std::shared_ptr<MaskedLanguageModel> model);

  std::string name() const override;
  std::string mask_token() const override;

  std::unique_ptr<Scorer> make_scorer(const PatternVerbalizerPair& pvp,
                                      const ScorerConfig& config) const override;
  std::unique_ptr<TextClassifier> make_classifier(const ScorerConfig& config) const override;

 private:
  std::shared_ptr<MaskedLanguageModel> model_;
};

}  // namespace socialpet
