#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socialpet/corpus.hpp"
#include "socialpet/mlm_backend.hpp"
#include "socialpet/patterns.hpp"
#include "socialpet/social_graph.hpp"

namespace socialpet {

struct SoftLabeledExample {
  std::string text;  // distillation input; includes the community phrase in social mode
  std::array<double, 2> distribution{};  // indexed by label_index, sums to 1
};

enum class WeightMode { UNIFORM, ACCURACY_WEIGHTED };

std::string_view to_string(WeightMode mode);
WeightMode parse_weight_mode(std::string_view text);

struct EnsembleSpec {
  std::vector<double> weights;  // aligned with the scorer list, sums to 1
  double temperature = 2.0;
  WeightMode mode = WeightMode::ACCURACY_WEIGHTED;
};

struct PvpScorerRecord {
  PatternVerbalizerPair pvp;
  std::unique_ptr<Scorer> scorer;
  double pre_train_accuracy = 0.0;   // zero-shot accuracy on the training set
  double post_train_accuracy = 0.0;
};

// One rendering of a pool post per PVP, in scorer order.
struct PoolItem {
  std::string post_id;
  std::string text;  // distillation text (community phrase already appended in social mode)
  std::vector<ClozeInstance> renderings;
};

// Fine-tunes one scorer per PVP on the split's training posts. Social PVPs
// require a community for every training post (gold-derived). The unlabeled
// pool texts feed the auxiliary LM objective where supported.
std::vector<PvpScorerRecord> train_pvp_scorers(
    const FewShotSplit& split, const std::vector<PatternVerbalizerPair>& pvps,
    const std::map<PostKey, CommunityLabel>& communities, const Backend& backend,
    const ScorerConfig& config);

// UNIFORM: 1/|pvps|. ACCURACY_WEIGHTED: the pre-fine-tuning accuracies
// normalized to sum 1, falling back to uniform when all are zero.
std::vector<double> compute_ensemble_weights(std::span<const double> accuracies, WeightMode mode);

// Per post: combined[l] = sum_p weight_p * logscore_p(l);
// distribution = softmax(combined / temperature).
std::vector<SoftLabeledExample> ensemble_soft_label(const std::vector<PoolItem>& pool,
                                                    const std::vector<PvpScorerRecord>& scorers,
                                                    const EnsembleSpec& spec);

struct ShotExample {
  std::string text;  // community phrase already appended in social mode
  StanceLabel label = StanceLabel::AGAINST;
};

// Trains the final classifier on the soft-labeled pool plus the shots
// converted to one-hot distributions.
std::unique_ptr<TextClassifier> distill_final_classifier(
    const std::vector<SoftLabeledExample>& soft, const std::vector<ShotExample>& shots,
    const Backend& backend, const ScorerConfig& config);

// Classifier argmax on the comment text (social mode appends the community
// phrase); exact ties resolve to AGAINST.
StanceLabel predict_stance(const TextClassifier& classifier, const Post& post,
                           const std::optional<CommunityLabel>& community, bool social);

// The distillation/prediction input text for a comment.
std::string classification_text(const std::string& comment,
                                const std::optional<CommunityLabel>& community, bool social);

}  // namespace socialpet
