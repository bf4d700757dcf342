#include "socialpet/mlm_backend.hpp"

#include <map>
#include <mutex>

#include <json.hpp>

#include "socialpet/errors.hpp"
#include "socialpet/reference_backend.hpp"

namespace socialpet {

nlohmann::ordered_json ScorerConfig::to_json() const {
  nlohmann::ordered_json j;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["max_sequence_length"] = max_sequence_length;
  j["auxiliary_lm_weight"] = auxiliary_lm_weight;
  j["training_steps"] = training_steps;
  j["seed"] = seed;
  return j;
}

StanceLabel argmax_label(const LabelScores& scores) {
  return scores.at(StanceLabel::FAVOR) > scores.at(StanceLabel::AGAINST) ? StanceLabel::FAVOR
                                                                         : StanceLabel::AGAINST;
}

double training_accuracy(const Scorer& scorer, const std::vector<LabeledInstance>& labeled) {
  if (labeled.empty()) {
    throw ContractViolation("training_accuracy requires a non-empty instance set");
  }
  std::size_t correct = 0;
  for (const LabeledInstance& item : labeled) {
    if (argmax_label(scorer.score(item.instance)) == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labeled.size());
}

StanceLabel TextClassifier::predict(std::string_view text) const {
  std::array<double, 2> s = scores(text);
  return s[label_index(StanceLabel::FAVOR)] > s[label_index(StanceLabel::AGAINST)]
             ? StanceLabel::FAVOR
             : StanceLabel::AGAINST;
}

namespace {

std::mutex& registry_mutex() {
  static std::mutex mutex;
  return mutex;
}

std::map<std::string, std::unique_ptr<Backend>>& registry() {
  static std::map<std::string, std::unique_ptr<Backend>> backends = [] {
    std::map<std::string, std::unique_ptr<Backend>> initial;
    auto reference = std::make_unique<ReferenceBackend>();
    initial.emplace(reference->name(), std::move(reference));
    return initial;
  }();
  return backends;
}

}  // namespace

const Backend& lookup_backend(std::string_view name) {
  std::lock_guard lock(registry_mutex());
  auto& backends = registry();
  auto it = backends.find(std::string(name));
  if (it == backends.end()) {
    throw ConfigError("unknown backend: '" + std::string(name) + "'");
  }
  return *it->second;
}

void register_backend(std::unique_ptr<Backend> backend) {
  std::lock_guard lock(registry_mutex());
  std::string name = backend->name();
  registry()[name] = std::move(backend);
}

std::vector<std::string> registered_backends() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [name, backend] : registry()) names.push_back(name);
  return names;
}

}  // namespace socialpet
