#include "socialpet/pet_pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "socialpet/errors.hpp"
#include "socialpet/util.hpp"

namespace socialpet {

std::string_view to_string(WeightMode mode) {
  return mode == WeightMode::UNIFORM ? "uniform" : "accuracy_weighted";
}

WeightMode parse_weight_mode(std::string_view text) {
  std::string lowered = to_lower_ascii(text);
  if (lowered == "uniform") return WeightMode::UNIFORM;
  if (lowered == "accuracy_weighted" || lowered == "accuracy-weighted") {
    return WeightMode::ACCURACY_WEIGHTED;
  }
  throw ValidationError("unknown ensemble weight mode: '" + std::string(text) + "'");
}

std::vector<PvpScorerRecord> train_pvp_scorers(
    const FewShotSplit& split, const std::vector<PatternVerbalizerPair>& pvps,
    const std::map<PostKey, CommunityLabel>& communities, const Backend& backend,
    const ScorerConfig& config) {
  if (pvps.empty()) {
    throw ConfigError("at least one pattern-verbalizer pair is required");
  }

  const bool any_social = std::any_of(pvps.begin(), pvps.end(),
                                      [](const PatternVerbalizerPair& p) { return p.social; });
  if (any_social) {
    for (const Post& post : split.train) {
      if (communities.find(key_of(post)) == communities.end()) {
        throw ContractViolation("training post " + post.post_id + " (target '" + post.target +
                                "') has no community assignment for a social pattern");
      }
    }
  }

  std::vector<std::string> unlabeled_texts;
  unlabeled_texts.reserve(split.unlabeled_pool.size());
  for (const UnlabeledPost& post : split.unlabeled_pool) {
    unlabeled_texts.push_back(post.text);
  }

  std::vector<PvpScorerRecord> records;
  records.reserve(pvps.size());
  for (const PatternVerbalizerPair& pvp : pvps) {
    PvpScorerRecord record;
    record.pvp = pvp;
    record.scorer = backend.make_scorer(pvp, config);

    std::vector<LabeledInstance> labeled;
    labeled.reserve(split.train.size());
    for (const Post& post : split.train) {
      std::optional<CommunityLabel> community;
      if (pvp.social) {
        community = communities.at(key_of(post));
      }
      ClozeInstance instance = render(post, pvp, community, record.scorer->mask_token());
      instance = truncate_for_budget(
          instance, static_cast<std::size_t>(config.max_sequence_length),
          [&](std::string_view text) { return record.scorer->token_count(text); });
      labeled.push_back(LabeledInstance{std::move(instance), post.stance});
    }

    record.pre_train_accuracy = training_accuracy(*record.scorer, labeled);
    record.scorer->fine_tune(labeled, unlabeled_texts, config);
    record.post_train_accuracy = training_accuracy(*record.scorer, labeled);
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<double> compute_ensemble_weights(std::span<const double> accuracies, WeightMode mode) {
  if (accuracies.empty()) {
    throw ConfigError("cannot compute ensemble weights for zero scorers");
  }
  const double uniform = 1.0 / static_cast<double>(accuracies.size());
  std::vector<double> weights(accuracies.size(), uniform);
  if (mode == WeightMode::UNIFORM) {
    return weights;
  }
  double sum = 0.0;
  for (double accuracy : accuracies) {
    if (accuracy < 0.0) {
      throw ConfigError("accuracies must be non-negative");
    }
    sum += accuracy;
  }
  if (sum <= 0.0) {
    return weights;  // all-zero accuracies fall back to uniform
  }
  for (std::size_t i = 0; i < accuracies.size(); ++i) {
    weights[i] = accuracies[i] / sum;
  }
  return weights;
}

std::vector<SoftLabeledExample> ensemble_soft_label(const std::vector<PoolItem>& pool,
                                                    const std::vector<PvpScorerRecord>& scorers,
                                                    const EnsembleSpec& spec) {
  if (spec.weights.size() != scorers.size()) {
    throw ConfigError("ensemble has " + std::to_string(spec.weights.size()) + " weights for " +
                      std::to_string(scorers.size()) + " scorers");
  }
  if (spec.temperature <= 0.0) {
    throw ConfigError("ensemble temperature must be positive");
  }
  double weight_sum = 0.0;
  for (double w : spec.weights) {
    if (w < 0.0) throw ConfigError("ensemble weights must be non-negative");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw ConfigError("ensemble weights must sum to 1");
  }

  std::vector<SoftLabeledExample> soft;
  soft.reserve(pool.size());
  for (const PoolItem& item : pool) {
    if (item.renderings.size() != scorers.size()) {
      throw ConfigError("pool post " + item.post_id + " has " +
                        std::to_string(item.renderings.size()) + " renderings for " +
                        std::to_string(scorers.size()) + " scorers");
    }
    std::array<double, 2> combined{0.0, 0.0};
    for (std::size_t p = 0; p < scorers.size(); ++p) {
      const LabelScores scores = scorers[p].scorer->score(item.renderings[p]);
      combined[0] += spec.weights[p] * scores.log_scores[0];
      combined[1] += spec.weights[p] * scores.log_scores[1];
    }
    const double s0 = combined[0] / spec.temperature;
    const double s1 = combined[1] / spec.temperature;
    const double m = std::max(s0, s1);
    const double e0 = std::exp(s0 - m);
    const double e1 = std::exp(s1 - m);
    SoftLabeledExample example;
    example.text = item.text;
    example.distribution = {e0 / (e0 + e1), e1 / (e0 + e1)};
    soft.push_back(std::move(example));
  }
  return soft;
}

std::unique_ptr<TextClassifier> distill_final_classifier(
    const std::vector<SoftLabeledExample>& soft, const std::vector<ShotExample>& shots,
    const Backend& backend, const ScorerConfig& config) {
  if (soft.empty() && shots.empty()) {
    throw ConfigError("distillation requires soft examples or labeled shots");
  }
  std::vector<TextClassifier::Example> examples;
  examples.reserve(soft.size() + shots.size());
  for (const SoftLabeledExample& example : soft) {
    examples.push_back(TextClassifier::Example{example.text, example.distribution});
  }
  for (const ShotExample& shot : shots) {
    TextClassifier::Example example;
    example.text = shot.text;
    example.target_distribution[label_index(shot.label)] = 1.0;
    examples.push_back(std::move(example));
  }
  std::unique_ptr<TextClassifier> classifier = backend.make_classifier(config);
  classifier->train(examples, config);
  return classifier;
}

std::string classification_text(const std::string& comment,
                                const std::optional<CommunityLabel>& community, bool social) {
  if (!social) return comment;
  if (!community.has_value()) {
    throw ContractViolation("social mode requires a community");
  }
  std::string phrase = std::string(kCommunityPhrasePrefix) + community->render();
  if (comment.empty()) return phrase;
  return comment + " " + phrase;
}

StanceLabel predict_stance(const TextClassifier& classifier, const Post& post,
                           const std::optional<CommunityLabel>& community, bool social) {
  if (social && !community.has_value()) {
    throw ContractViolation("social prediction for post " + post.post_id +
                            " requires a community");
  }
  return classifier.predict(classification_text(post.text, community, social));
}

}  // namespace socialpet
