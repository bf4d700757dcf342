#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "socialpet/errors.hpp"
#include "socialpet/mlm_adapter.hpp"
#include "socialpet/mlm_backend.hpp"
#include "socialpet/reference_backend.hpp"
#include "support/helpers.hpp"
#include "support/mock_mlm.hpp"

using namespace socialpet;
using socialpet::test::make_post;

namespace {

// Separable synthetic set: FAVOR texts carry "sunny", AGAINST texts "gloomy".
std::vector<LabeledInstance> separable_instances(const PatternVerbalizerPair& pvp, int count,
                                                 const std::string& mask) {
  std::vector<LabeledInstance> out;
  for (int i = 0; i < count; ++i) {
    const bool favor = i % 2 == 0;
    Post post = make_post("p" + std::to_string(i), "u" + std::to_string(i),
                          std::string(favor ? "sunny" : "gloomy") + " remark number " +
                              std::to_string(i),
                          "Topic", favor ? StanceLabel::FAVOR : StanceLabel::AGAINST);
    out.push_back(LabeledInstance{render(post, pvp, std::nullopt, mask), post.stance});
  }
  return out;
}

// Independent count-based oracle confirming the set is separable: classify by
// which cue token appears; must reach accuracy 1.0.
double cue_word_oracle_accuracy(const std::vector<LabeledInstance>& instances) {
  std::size_t correct = 0;
  for (const LabeledInstance& item : instances) {
    const bool says_sunny = item.instance.rendered_text.find("sunny") != std::string::npos;
    const StanceLabel predicted = says_sunny ? StanceLabel::FAVOR : StanceLabel::AGAINST;
    if (predicted == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(instances.size());
}

ScorerConfig reference_config() {
  return ReferenceBackend{}.default_config();
}

}  // namespace

TEST_CASE("reference scorer reaches training accuracy 1.0 on separable data") {
  PatternVerbalizerPair pvp{PatternId::P1, false, {}};
  ReferenceBackend backend;
  auto scorer = backend.make_scorer(pvp, reference_config());
  auto instances = separable_instances(pvp, 20, scorer->mask_token());

  REQUIRE(cue_word_oracle_accuracy(instances) == 1.0);

  scorer->fine_tune(instances, {}, reference_config());
  CHECK(training_accuracy(*scorer, instances) == 1.0);
}

TEST_CASE("zero training steps leave the scorer unchanged") {
  PatternVerbalizerPair pvp{PatternId::P2, false, {}};
  ReferenceBackend backend;
  ScorerConfig config = reference_config();
  auto scorer = backend.make_scorer(pvp, config);
  auto instances = separable_instances(pvp, 10, scorer->mask_token());

  auto before = scorer->score(instances[0].instance);
  config.training_steps = 0;
  scorer->fine_tune(instances, {}, config);
  auto after = scorer->score(instances[0].instance);
  CHECK(before.log_scores[0] == after.log_scores[0]);
  CHECK(before.log_scores[1] == after.log_scores[1]);
}

TEST_CASE("reference scorer training is deterministic and order-independent") {
  PatternVerbalizerPair pvp{PatternId::P1, false, {}};
  ReferenceBackend backend;
  auto instances = separable_instances(pvp, 16, "<mask>");

  auto train_and_score = [&](std::vector<LabeledInstance> data) {
    auto scorer = backend.make_scorer(pvp, reference_config());
    scorer->fine_tune(data, {}, reference_config());
    std::vector<double> outputs;
    for (const LabeledInstance& item : data) {
      auto s = scorer->score(item.instance);
      outputs.push_back(s.log_scores[0]);
      outputs.push_back(s.log_scores[1]);
    }
    std::sort(outputs.begin(), outputs.end());
    return outputs;
  };

  auto first = train_and_score(instances);
  auto second = train_and_score(instances);
  CHECK(first == second);

  std::vector<LabeledInstance> permuted = instances;
  std::reverse(permuted.begin(), permuted.end());
  auto third = train_and_score(permuted);
  CHECK(first == third);
}

TEST_CASE("untrained scorer is symmetric; one-sided training orders the scores") {
  PatternVerbalizerPair pvp{PatternId::P1, false, {}};
  ReferenceBackend backend;
  auto scorer = backend.make_scorer(pvp, reference_config());
  auto instances = separable_instances(pvp, 8, scorer->mask_token());

  SUBCASE("symmetric initialization gives equal scores") {
    auto scores = scorer->score(instances[0].instance);
    CHECK(scores.log_scores[0] == scores.log_scores[1]);
    CHECK(argmax_label(scores) == StanceLabel::AGAINST);  // tie resolves to AGAINST
  }

  SUBCASE("training only on FAVOR examples of one pattern raises FAVOR strictly") {
    std::vector<LabeledInstance> favor_only;
    for (const LabeledInstance& item : instances) {
      if (item.label == StanceLabel::FAVOR) favor_only.push_back(item);
    }
    scorer->fine_tune(favor_only, {}, reference_config());
    for (const LabeledInstance& item : favor_only) {
      auto scores = scorer->score(item.instance);
      CHECK(scores.at(StanceLabel::FAVOR) > scores.at(StanceLabel::AGAINST));
    }
  }
}

TEST_CASE("scores stay finite at the full sequence budget") {
  PatternVerbalizerPair pvp{PatternId::P2, false, {}};
  ReferenceBackend backend;
  auto scorer = backend.make_scorer(pvp, reference_config());

  std::string text = "w0";
  for (int i = 1; i < 250; ++i) text += " w" + std::to_string(i % 37);
  Post post = make_post("p", "u", text, "T", StanceLabel::FAVOR);
  auto instance = render(post, pvp, std::nullopt, scorer->mask_token());
  REQUIRE(scorer->token_count(instance.rendered_text) <= 256);

  std::vector<LabeledInstance> data{{instance, StanceLabel::FAVOR}};
  scorer->fine_tune(data, {}, reference_config());
  auto scores = scorer->score(instance);
  CHECK(std::isfinite(scores.log_scores[0]));
  CHECK(std::isfinite(scores.log_scores[1]));
}

TEST_CASE("fine_tune contract checks") {
  PatternVerbalizerPair pvp{PatternId::P1, false, {}};
  ReferenceBackend backend;
  auto scorer = backend.make_scorer(pvp, reference_config());

  SUBCASE("empty labeled set") {
    CHECK_THROWS_AS(scorer->fine_tune({}, {}, reference_config()), ConfigError);
  }
  SUBCASE("mixed PVPs") {
    auto p1 = separable_instances(pvp, 2, scorer->mask_token());
    auto p2 = separable_instances({PatternId::P2, false, {}}, 2, scorer->mask_token());
    p1.push_back(p2[0]);
    CHECK_THROWS_AS(scorer->fine_tune(p1, {}, reference_config()), ContractViolation);
  }
  SUBCASE("over-long instance") {
    std::string text = "w0";
    for (int i = 1; i < 400; ++i) text += " w" + std::to_string(i);
    Post post = make_post("p", "u", text, "T", StanceLabel::FAVOR);
    auto instance = render(post, pvp, std::nullopt, scorer->mask_token());
    std::vector<LabeledInstance> data{{instance, StanceLabel::FAVOR}};
    CHECK_THROWS_AS(scorer->fine_tune(data, {}, reference_config()), ContractViolation);
  }
  SUBCASE("mask token absent") {
    auto instances = separable_instances(pvp, 2, scorer->mask_token());
    instances[0].instance.rendered_text = "no mask here";
    CHECK_THROWS_AS(scorer->score(instances[0].instance), ContractViolation);
  }
}

TEST_CASE("training_accuracy counts argmax matches") {
  PatternVerbalizerPair pvp{PatternId::P1, false, {}};
  ReferenceBackend backend;
  auto scorer = backend.make_scorer(pvp, reference_config());
  auto instances = separable_instances(pvp, 20, scorer->mask_token());
  scorer->fine_tune(instances, {}, reference_config());

  SUBCASE("perfect scorer scores 1.0") {
    CHECK(training_accuracy(*scorer, instances) == 1.0);
  }
  SUBCASE("inverted gold labels score 0.0") {
    std::vector<LabeledInstance> inverted = instances;
    for (LabeledInstance& item : inverted) item.label = other_label(item.label);
    CHECK(training_accuracy(*scorer, inverted) == 0.0);
  }
  SUBCASE("random labels match an independent recount") {
    std::mt19937_64 gen(8);
    std::vector<LabeledInstance> random_labels = instances;
    for (LabeledInstance& item : random_labels) {
      item.label = gen() % 2 == 0 ? StanceLabel::FAVOR : StanceLabel::AGAINST;
    }
    std::size_t correct = 0;
    for (const LabeledInstance& item : random_labels) {
      if (argmax_label(scorer->score(item.instance)) == item.label) ++correct;
    }
    CHECK(training_accuracy(*scorer, random_labels) ==
          doctest::Approx(static_cast<double>(correct) / random_labels.size()));
  }
}

TEST_CASE("adding a constant to every weight leaves the argmax unchanged") {
  PatternVerbalizerPair pvp{PatternId::P1, false, {}};
  ReferenceBackend backend;
  ScorerConfig config = reference_config();
  auto scorer_ptr = backend.make_scorer(pvp, config);
  auto* scorer = dynamic_cast<ReferenceScorer*>(scorer_ptr.get());
  REQUIRE(scorer != nullptr);
  auto instances = separable_instances(pvp, 12, scorer->mask_token());
  scorer->fine_tune(instances, {}, config);

  std::vector<StanceLabel> before;
  for (const LabeledInstance& item : instances) {
    before.push_back(argmax_label(scorer->score(item.instance)));
  }
  for (StanceLabel label : {StanceLabel::AGAINST, StanceLabel::FAVOR}) {
    for (double& w : scorer->weights(label)) w += 0.37;
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    CHECK(argmax_label(scorer->score(instances[i].instance)) == before[i]);
  }
}

TEST_CASE("scores never produce NaN or infinity on valid inputs") {
  PatternVerbalizerPair pvp{PatternId::P2, false, {}};
  ReferenceBackend backend;
  std::mt19937_64 gen(14);
  auto scorer = backend.make_scorer(pvp, reference_config());
  auto instances = separable_instances(pvp, 30, scorer->mask_token());
  ScorerConfig config = reference_config();
  config.training_steps = 2000;  // long training must stay bounded
  scorer->fine_tune(instances, {}, config);
  for (int round = 0; round < 100; ++round) {
    std::string text = "z" + std::to_string(gen() % 1000);
    for (int i = 0; i < static_cast<int>(gen() % 40); ++i) {
      text += " z" + std::to_string(gen() % 1000);
    }
    Post post = make_post("p", "u", text, "T", StanceLabel::FAVOR);
    auto scores = scorer->score(render(post, pvp, std::nullopt, scorer->mask_token()));
    CHECK(std::isfinite(scores.log_scores[0]));
    CHECK(std::isfinite(scores.log_scores[1]));
  }
}

TEST_CASE("scorer config defaults match the documented hyperparameters") {
  ScorerConfig config;
  CHECK(config.learning_rate == 1e-5);
  CHECK(config.batch_size == 16);
  CHECK(config.max_sequence_length == 256);
  CHECK(config.auxiliary_lm_weight == 1e-4);
  CHECK(config.training_steps > 0);

  // The reference backend keeps these defaults except where the estimator
  // family differs (step size for count-feature gradient descent).
  ScorerConfig reference = ReferenceBackend{}.default_config();
  CHECK(reference.batch_size == 16);
  CHECK(reference.max_sequence_length == 256);
  CHECK(reference.auxiliary_lm_weight == 1e-4);
}

TEST_CASE("backend registry knows the reference backend") {
  CHECK(lookup_backend("reference").name() == "reference");
  CHECK_THROWS_AS(lookup_backend("no-such-backend"), ConfigError);
  auto names = registered_backends();
  CHECK(std::find(names.begin(), names.end(), "reference") != names.end());
}

TEST_CASE("mlm adapter enforces single-token verbalizers at construction") {
  auto model = std::make_shared<socialpet::test::MockMaskedLM>(
      std::vector<std::string>{"Yes", "No", "sunny", "gloomy", "remark", "Topic", "||"});

  SUBCASE("valid verbalizer constructs") {
    CHECK_NOTHROW(MlmScorer(model, {PatternId::P1, false, {}}, ScorerConfig{}));
  }
  SUBCASE("out-of-vocabulary verbalizer token fails fast") {
    Verbalizer oov{"Absolutely", "No"};
    CHECK_THROWS_AS(MlmScorer(model, {PatternId::P1, false, oov}, ScorerConfig{}),
                    ValidationError);
  }
}

TEST_CASE("mlm adapter trains toward the gold verbalizer token") {
  auto model = std::make_shared<socialpet::test::MockMaskedLM>(std::vector<std::string>{
      "Yes", "No", "sunny", "gloomy", "remark", "number", "Topic", "||"});
  MlmBackend backend(model);
  CHECK(backend.name() == "mock-mlm");
  CHECK(backend.mask_token() == "[MASK]");

  PatternVerbalizerPair pvp{PatternId::P2, false, {}};
  ScorerConfig config;
  config.learning_rate = 0.5;
  config.training_steps = 60;
  config.batch_size = 4;
  auto scorer = backend.make_scorer(pvp, config);
  CHECK(scorer->supports_auxiliary_lm());

  std::vector<LabeledInstance> instances;
  for (int i = 0; i < 12; ++i) {
    const bool favor = i % 2 == 0;
    Post post = make_post("p" + std::to_string(i), "u",
                          std::string(favor ? "sunny" : "gloomy") + " remark number",
                          "Topic", favor ? StanceLabel::FAVOR : StanceLabel::AGAINST);
    instances.push_back(
        LabeledInstance{render(post, pvp, std::nullopt, scorer->mask_token()), post.stance});
  }
  std::vector<std::string> pool_texts{"sunny remark", "gloomy remark"};
  scorer->fine_tune(instances, pool_texts, config);
  CHECK(training_accuracy(*scorer, instances) == 1.0);
  CHECK(model->lm_batches_seen() > 0);  // auxiliary objective was exercised
  CHECK(model->last_lm_weight() == doctest::Approx(config.auxiliary_lm_weight));

  // Adapter scores are normalized log-probabilities over the two labels.
  auto scores = scorer->score(instances[0].instance);
  CHECK(std::exp(scores.log_scores[0]) + std::exp(scores.log_scores[1]) ==
        doctest::Approx(1.0).epsilon(1e-9));
}
