#include "socialpet/reference_backend.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "socialpet/errors.hpp"
#include "socialpet/util.hpp"

namespace socialpet {

namespace {

struct TrainExample {
  std::vector<std::pair<std::uint32_t, double>> features;
  std::array<double, 2> target{};
};

std::array<double, 2> raw_logits(const std::array<std::vector<double>, 2>& weights,
                                 const std::vector<std::pair<std::uint32_t, double>>& features) {
  std::array<double, 2> logits{0.0, 0.0};
  for (const auto& [index, value] : features) {
    logits[0] += weights[0][index] * value;
    logits[1] += weights[1][index] * value;
  }
  return logits;
}

std::array<double, 2> softmax2(const std::array<double, 2>& logits) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  return {e0 / z, e1 / z};
}

// Full-batch gradient descent on softmax cross-entropy against (possibly
// soft) target distributions. The step size is normalized by the largest
// squared feature norm, which keeps the iteration inside the stability
// region for any input scale.
void train_linear(std::array<std::vector<double>, 2>& weights,
                  const std::vector<TrainExample>& examples, double learning_rate, int steps) {
  if (examples.empty() || steps <= 0) return;

  double max_sq_norm = 0.0;
  std::vector<std::uint32_t> touched;
  for (const TrainExample& example : examples) {
    double sq = 0.0;
    for (const auto& [index, value] : example.features) {
      sq += value * value;
      touched.push_back(index);
    }
    max_sq_norm = std::max(max_sq_norm, sq);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  const double step = learning_rate / std::max(1.0, max_sq_norm / 4.0);
  const double inv_n = 1.0 / static_cast<double>(examples.size());

  std::array<std::vector<double>, 2> grad;
  grad[0].assign(weights[0].size(), 0.0);
  grad[1].assign(weights[1].size(), 0.0);

  for (int iter = 0; iter < steps; ++iter) {
    for (std::uint32_t index : touched) {
      grad[0][index] = 0.0;
      grad[1][index] = 0.0;
    }
    for (const TrainExample& example : examples) {
      const std::array<double, 2> p = softmax2(raw_logits(weights, example.features));
      const double err0 = (p[0] - example.target[0]) * inv_n;
      const double err1 = (p[1] - example.target[1]) * inv_n;
      for (const auto& [index, value] : example.features) {
        grad[0][index] += err0 * value;
        grad[1][index] += err1 * value;
      }
    }
    for (std::uint32_t index : touched) {
      weights[0][index] -= step * grad[0][index];
      weights[1][index] -= step * grad[1][index];
    }
  }
}

}  // namespace

std::vector<std::pair<std::uint32_t, double>> hashed_features(std::string_view text) {
  std::vector<std::pair<std::uint32_t, double>> features;
  for (const std::string& token : whitespace_tokens(text)) {
    const std::uint64_t hash = fnv1a64(to_lower_ascii(token));
    features.emplace_back(static_cast<std::uint32_t>(hash & (ReferenceScorer::kFeatureSpace - 1)),
                          1.0);
  }
  std::sort(features.begin(), features.end());
  // Collapse repeated tokens into counts.
  std::vector<std::pair<std::uint32_t, double>> collapsed;
  for (const auto& [index, value] : features) {
    if (!collapsed.empty() && collapsed.back().first == index) {
      collapsed.back().second += value;
    } else {
      collapsed.emplace_back(index, value);
    }
  }
  return collapsed;
}

ReferenceScorer::ReferenceScorer(PatternVerbalizerPair pvp, ScorerConfig config)
    : pvp_(std::move(pvp)), config_(std::move(config)) {
  pvp_.verbalizer.validate();
  weights_[0].assign(kFeatureSpace, 0.0);
  weights_[1].assign(kFeatureSpace, 0.0);
}

std::size_t ReferenceScorer::token_count(std::string_view text) const {
  return whitespace_token_count(text);
}

namespace {

// Patterns may carry a neutral placeholder; the scorer swaps in its own mask
// token before feature extraction.
std::string normalized_text(const ClozeInstance& instance, const std::string& mask_token) {
  if (instance.mask_token.empty()) {
    throw ContractViolation("instance for post " + instance.source_post_id + " carries no mask token");
  }
  const std::size_t pos = instance.rendered_text.find(instance.mask_token);
  if (pos == std::string::npos) {
    throw ContractViolation("mask token absent from rendering of post " + instance.source_post_id);
  }
  if (instance.mask_token == mask_token) return instance.rendered_text;
  std::string text = instance.rendered_text;
  text.replace(pos, instance.mask_token.size(), mask_token);
  return text;
}

}  // namespace

void ReferenceScorer::fine_tune(const std::vector<LabeledInstance>& labeled,
                                const std::vector<std::string>& unlabeled_texts,
                                const ScorerConfig& config) {
  (void)unlabeled_texts;  // no MLM capability; auxiliary objective does not apply
  if (labeled.empty()) {
    throw ConfigError("fine_tune requires a non-empty labeled set");
  }
  for (const LabeledInstance& item : labeled) {
    if (item.instance.pvp.pattern_id != pvp_.pattern_id || item.instance.pvp.social != pvp_.social) {
      throw ContractViolation("all training instances must share the scorer's PVP");
    }
    if (token_count(item.instance.rendered_text) >
        static_cast<std::size_t>(config.max_sequence_length)) {
      throw ContractViolation("instance for post " + item.instance.source_post_id +
                              " exceeds max_sequence_length after truncation");
    }
  }

  std::vector<TrainExample> examples;
  examples.reserve(labeled.size());
  for (const LabeledInstance& item : labeled) {
    TrainExample example;
    example.features = hashed_features(normalized_text(item.instance, mask_token()));
    example.target[label_index(item.label)] = 1.0;
    examples.push_back(std::move(example));
  }
  // Canonical order: results must not depend on caller ordering.
  std::sort(examples.begin(), examples.end(), [](const TrainExample& a, const TrainExample& b) {
    return std::tie(a.features, a.target) < std::tie(b.features, b.target);
  });

  train_linear(weights_, examples, config.learning_rate, config.training_steps);
}

LabelScores ReferenceScorer::score(const ClozeInstance& instance) const {
  const auto features = hashed_features(normalized_text(instance, mask_token()));
  const std::array<double, 2> logits = raw_logits(weights_, features);
  const std::array<double, 2> p = softmax2(logits);
  LabelScores scores;
  scores.log_scores[0] = std::log(p[0]);
  scores.log_scores[1] = std::log(p[1]);
  return scores;
}

nlohmann::ordered_json ReferenceScorer::checkpoint() const {
  nlohmann::ordered_json nonzero = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kFeatureSpace; ++i) {
    if (weights_[0][i] != 0.0 || weights_[1][i] != 0.0) {
      nonzero.push_back({i, weights_[0][i], weights_[1][i]});
    }
  }
  nlohmann::ordered_json j;
  j["type"] = "reference_scorer";
  j["hash_bits"] = kHashBits;
  j["pattern"] = std::string(to_string(pvp_.pattern_id));
  j["social"] = pvp_.social;
  j["nonzero_weights"] = std::move(nonzero);
  return j;
}

std::vector<double>& ReferenceScorer::weights(StanceLabel label) {
  return weights_[label_index(label)];
}

const std::vector<double>& ReferenceScorer::weights(StanceLabel label) const {
  return weights_[label_index(label)];
}

ReferenceTextClassifier::ReferenceTextClassifier(ScorerConfig config) : config_(std::move(config)) {
  weights_[0].assign(ReferenceScorer::kFeatureSpace, 0.0);
  weights_[1].assign(ReferenceScorer::kFeatureSpace, 0.0);
}

void ReferenceTextClassifier::train(const std::vector<Example>& examples,
                                    const ScorerConfig& config) {
  if (examples.empty()) {
    throw ConfigError("classifier training requires a non-empty example set");
  }
  std::vector<TrainExample> prepared;
  prepared.reserve(examples.size());
  for (const Example& example : examples) {
    TrainExample item;
    item.features = hashed_features(example.text);
    item.target = example.target_distribution;
    prepared.push_back(std::move(item));
  }
  std::sort(prepared.begin(), prepared.end(), [](const TrainExample& a, const TrainExample& b) {
    return std::tie(a.features, a.target) < std::tie(b.features, b.target);
  });
  train_linear(weights_, prepared, config.learning_rate, config.training_steps);
}

std::array<double, 2> ReferenceTextClassifier::scores(std::string_view text) const {
  const auto features = hashed_features(text);
  return raw_logits(weights_, features);
}

ScorerConfig ReferenceBackend::default_config() const {
  ScorerConfig config;
  config.learning_rate = 1.0;  // normalized-step GD on count features
  config.training_steps = 300;
  return config;
}

std::unique_ptr<Scorer> ReferenceBackend::make_scorer(const PatternVerbalizerPair& pvp,
                                                      const ScorerConfig& config) const {
  return std::make_unique<ReferenceScorer>(pvp, config);
}

std::unique_ptr<TextClassifier> ReferenceBackend::make_classifier(const ScorerConfig& config) const {
  return std::make_unique<ReferenceTextClassifier>(config);
}

}  // namespace socialpet
