#include "socialpet/mlm_adapter.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "socialpet/errors.hpp"
#include "socialpet/reference_backend.hpp"

namespace socialpet {

MlmScorer::MlmScorer(std::shared_ptr<MaskedLanguageModel> model, PatternVerbalizerPair pvp,
                     ScorerConfig config)
    : model_(std::move(model)), pvp_(std::move(pvp)), config_(std::move(config)) {
  pvp_.verbalizer.validate();
  for (StanceLabel label : {StanceLabel::AGAINST, StanceLabel::FAVOR}) {
    const std::string& token = pvp_.verbalizer.token(label);
    std::optional<std::int64_t> id = model_->single_token_id(token);
    if (!id.has_value()) {
      throw ValidationError("verbalizer token '" + token +
                            "' is not a single vocabulary item of " + model_->model_name());
    }
    verbalizer_ids_[label_index(label)] = *id;
  }
}

std::string MlmScorer::backend_name() const { return model_->model_name(); }

std::string MlmScorer::mask_token() const { return model_->mask_token(); }

bool MlmScorer::supports_auxiliary_lm() const { return model_->supports_auxiliary_lm(); }

std::size_t MlmScorer::token_count(std::string_view text) const {
  return model_->tokenize(text).size();
}

std::vector<std::string> MlmScorer::prepare_tokens(const ClozeInstance& instance,
                                                   int max_sequence_length) const {
  if (instance.mask_token.empty() ||
      instance.rendered_text.find(instance.mask_token) == std::string::npos) {
    throw ContractViolation("mask token absent from rendering of post " + instance.source_post_id);
  }
  std::string text = instance.rendered_text;
  if (instance.mask_token != model_->mask_token()) {
    text.replace(text.find(instance.mask_token), instance.mask_token.size(),
                 model_->mask_token());
  }
  std::vector<std::string> tokens = model_->tokenize(text);
  if (tokens.size() > static_cast<std::size_t>(max_sequence_length)) {
    throw ContractViolation("instance for post " + instance.source_post_id +
                            " exceeds max_sequence_length after truncation");
  }
  if (std::count(tokens.begin(), tokens.end(), model_->mask_token()) != 1) {
    throw ContractViolation("tokenization of post " + instance.source_post_id +
                            " must contain exactly one mask token");
  }
  return tokens;
}

void MlmScorer::fine_tune(const std::vector<LabeledInstance>& labeled,
                          const std::vector<std::string>& unlabeled_texts,
                          const ScorerConfig& config) {
  if (labeled.empty()) {
    throw ConfigError("fine_tune requires a non-empty labeled set");
  }
  for (const LabeledInstance& item : labeled) {
    if (item.instance.pvp.pattern_id != pvp_.pattern_id || item.instance.pvp.social != pvp_.social) {
      throw ContractViolation("all training instances must share the scorer's PVP");
    }
  }

  std::vector<MaskedLanguageModel::ClozeExample> examples;
  examples.reserve(labeled.size());
  for (const LabeledInstance& item : labeled) {
    MaskedLanguageModel::ClozeExample example;
    example.tokens = prepare_tokens(item.instance, config.max_sequence_length);
    example.gold_vocab_id = verbalizer_ids_[label_index(item.label)];
    examples.push_back(std::move(example));
  }
  std::sort(examples.begin(), examples.end(),
            [](const MaskedLanguageModel::ClozeExample& a,
               const MaskedLanguageModel::ClozeExample& b) {
              return std::tie(a.tokens, a.gold_vocab_id) < std::tie(b.tokens, b.gold_vocab_id);
            });

  std::vector<std::vector<std::string>> lm_streams;
  const bool use_aux = config.auxiliary_lm_weight > 0.0 && model_->supports_auxiliary_lm();
  if (use_aux) {
    for (const std::string& text : unlabeled_texts) {
      lm_streams.push_back(model_->tokenize(text));
    }
    std::sort(lm_streams.begin(), lm_streams.end());
  }

  const std::size_t batch_size = std::max(1, config.batch_size);
  std::size_t cursor = 0;
  std::size_t lm_cursor = 0;
  for (int step = 0; step < config.training_steps; ++step) {
    std::vector<MaskedLanguageModel::ClozeExample> batch;
    for (std::size_t i = 0; i < batch_size; ++i) {
      batch.push_back(examples[cursor]);
      cursor = (cursor + 1) % examples.size();
    }
    model_->train_cloze_batch(batch, config.learning_rate);

    if (use_aux && !lm_streams.empty()) {
      std::vector<std::vector<std::string>> lm_batch;
      for (std::size_t i = 0; i < batch_size; ++i) {
        lm_batch.push_back(lm_streams[lm_cursor]);
        lm_cursor = (lm_cursor + 1) % lm_streams.size();
      }
      model_->train_lm_batch(lm_batch, config.learning_rate, config.auxiliary_lm_weight);
    }
  }
}

LabelScores MlmScorer::score(const ClozeInstance& instance) const {
  const std::vector<std::string> tokens = prepare_tokens(instance, config_.max_sequence_length);
  const std::vector<double> logits = model_->logits_at_mask(tokens);

  const double l_against = logits.at(static_cast<std::size_t>(verbalizer_ids_[0]));
  const double l_favor = logits.at(static_cast<std::size_t>(verbalizer_ids_[1]));
  const double m = std::max(l_against, l_favor);
  const double z = std::exp(l_against - m) + std::exp(l_favor - m);

  LabelScores scores;
  scores.log_scores[0] = (l_against - m) - std::log(z);
  scores.log_scores[1] = (l_favor - m) - std::log(z);
  return scores;
}

nlohmann::ordered_json MlmScorer::checkpoint() const {
  nlohmann::ordered_json j;
  j["type"] = "mlm_adapter";
  j["model"] = model_->model_name();
  j["mask_token"] = model_->mask_token();
  j["pattern"] = std::string(to_string(pvp_.pattern_id));
  j["social"] = pvp_.social;
  j["verbalizer_ids"] = {verbalizer_ids_[0], verbalizer_ids_[1]};
  return j;
}

MlmBackend::MlmBackend(std::shared_ptr<MaskedLanguageModel> model) : model_(std::move(model)) {}

std::string MlmBackend::name() const { return model_->model_name(); }

std::string MlmBackend::mask_token() const { return model_->mask_token(); }

std::unique_ptr<Scorer> MlmBackend::make_scorer(const PatternVerbalizerPair& pvp,
                                                const ScorerConfig& config) const {
  return std::make_unique<MlmScorer>(model_, pvp, config);
}

std::unique_ptr<TextClassifier> MlmBackend::make_classifier(const ScorerConfig& config) const {
  return std::make_unique<ReferenceTextClassifier>(config);
}

}  // namespace socialpet
