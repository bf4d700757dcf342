#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "socialpet/corpus.hpp"

namespace socialpet {

// counts[gold][predicted], axes ordered (AGAINST, FAVOR).
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, 2>, 2> counts{};

  std::int64_t& at(StanceLabel gold, StanceLabel predicted) {
    return counts[label_index(gold)][label_index(predicted)];
  }
  std::int64_t at(StanceLabel gold, StanceLabel predicted) const {
    return counts[label_index(gold)][label_index(predicted)];
  }
  std::int64_t total() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvaluationReport {
  ConfusionMatrix matrix;
  ClassMetrics against;
  ClassMetrics favor;
  double macro_f1 = 0.0;
};

ConfusionMatrix confusion(std::span<const StanceLabel> gold, std::span<const StanceLabel> predicted);

// Precision/recall/F1 with the 0/0 -> 0 convention.
ClassMetrics f1_per_class(const ConfusionMatrix& matrix, StanceLabel c);

double macro_f1(const ConfusionMatrix& matrix);

EvaluationReport evaluate(std::span<const StanceLabel> gold, std::span<const StanceLabel> predicted);
EvaluationReport report_from_matrix(const ConfusionMatrix& matrix);

// Entry-wise sum.
ConfusionMatrix aggregate_matrices(std::span<const ConfusionMatrix> matrices);

struct SeedReport {
  std::uint64_t seed = 0;
  EvaluationReport report;
};

// One (dataset, destination, n, method) cell of the experiment matrix.
struct RunRecord {
  std::string dataset;
  std::string destination;
  int n = 0;
  std::string method;  // "pet" | "socialpet"
  std::vector<SeedReport> seeds;
  std::vector<std::uint64_t> failed_seeds;
  double macro_f1_mean = 0.0;
  double macro_f1_std = 0.0;  // population std over successful seeds
  ConfusionMatrix confusion_summed;
};

// Fills mean/std/summed-confusion from the per-seed reports.
void summarize_run(RunRecord& record);

struct JaccardRow {
  std::string dataset;
  std::string target;
  double score = 0.0;
};

// Writes metrics.json, confusion.csv, summary.csv, summary.md, jaccard.csv
// and jaccard.svg under out_dir.
void emit_reports(const std::vector<RunRecord>& records, const std::vector<JaccardRow>& jaccard,
                  const std::filesystem::path& out_dir);

}  // namespace socialpet
