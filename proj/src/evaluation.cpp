#include "socialpet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "socialpet/errors.hpp"
#include "socialpet/util.hpp"

namespace socialpet {

std::int64_t ConfusionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ConfusionMatrix confusion(std::span<const StanceLabel> gold, std::span<const StanceLabel> predicted) {
  if (gold.size() != predicted.size()) {
    throw ContractViolation("gold/predicted length mismatch: " + std::to_string(gold.size()) +
                            " vs " + std::to_string(predicted.size()));
  }
  if (gold.empty()) {
    throw ContractViolation("cannot tally an empty prediction set");
  }
  ConfusionMatrix matrix;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++matrix.at(gold[i], predicted[i]);
  }
  return matrix;
}

ClassMetrics f1_per_class(const ConfusionMatrix& matrix, StanceLabel c) {
  const StanceLabel o = other_label(c);
  const double tp = static_cast<double>(matrix.at(c, c));
  const double fp = static_cast<double>(matrix.at(o, c));
  const double fn = static_cast<double>(matrix.at(c, o));

  ClassMetrics metrics;
  metrics.precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
  metrics.recall = (tp + fn) > 0.0 ? tp / (tp + fn) : 0.0;
  const double denom = metrics.precision + metrics.recall;
  metrics.f1 = denom > 0.0 ? 2.0 * metrics.precision * metrics.recall / denom : 0.0;
  return metrics;
}

double macro_f1(const ConfusionMatrix& matrix) {
  return (f1_per_class(matrix, StanceLabel::FAVOR).f1 +
          f1_per_class(matrix, StanceLabel::AGAINST).f1) /
         2.0;
}

EvaluationReport report_from_matrix(const ConfusionMatrix& matrix) {
  EvaluationReport report;
  report.matrix = matrix;
  report.against = f1_per_class(matrix, StanceLabel::AGAINST);
  report.favor = f1_per_class(matrix, StanceLabel::FAVOR);
  report.macro_f1 = (report.against.f1 + report.favor.f1) / 2.0;
  return report;
}

EvaluationReport evaluate(std::span<const StanceLabel> gold, std::span<const StanceLabel> predicted) {
  return report_from_matrix(confusion(gold, predicted));
}

ConfusionMatrix aggregate_matrices(std::span<const ConfusionMatrix> matrices) {
  if (matrices.empty()) {
    throw ContractViolation("cannot aggregate an empty matrix list");
  }
  ConfusionMatrix sum;
  for (const ConfusionMatrix& matrix : matrices) {
    for (int g = 0; g < 2; ++g) {
      for (int p = 0; p < 2; ++p) {
        sum.counts[g][p] += matrix.counts[g][p];
      }
    }
  }
  return sum;
}

void summarize_run(RunRecord& record) {
  record.confusion_summed = ConfusionMatrix{};
  if (record.seeds.empty()) {
    record.macro_f1_mean = 0.0;
    record.macro_f1_std = 0.0;
    return;
  }
  double sum = 0.0;
  std::vector<ConfusionMatrix> matrices;
  for (const SeedReport& seed : record.seeds) {
    sum += seed.report.macro_f1;
    matrices.push_back(seed.report.matrix);
  }
  record.macro_f1_mean = sum / static_cast<double>(record.seeds.size());
  double sq = 0.0;
  for (const SeedReport& seed : record.seeds) {
    const double d = seed.report.macro_f1 - record.macro_f1_mean;
    sq += d * d;
  }
  record.macro_f1_std = std::sqrt(sq / static_cast<double>(record.seeds.size()));
  record.confusion_summed = aggregate_matrices(matrices);
}

namespace {

nlohmann::ordered_json matrix_to_json(const ConfusionMatrix& matrix) {
  return nlohmann::ordered_json::array(
      {{matrix.counts[0][0], matrix.counts[0][1]}, {matrix.counts[1][0], matrix.counts[1][1]}});
}

nlohmann::ordered_json record_to_json(const RunRecord& record) {
  nlohmann::ordered_json j;
  j["dataset"] = record.dataset;
  j["destination"] = record.destination;
  j["n"] = record.n;
  j["method"] = record.method;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const SeedReport& seed : record.seeds) {
    nlohmann::ordered_json s;
    s["seed"] = seed.seed;
    s["macro_f1"] = seed.report.macro_f1;
    s["f1_favor"] = seed.report.favor.f1;
    s["f1_against"] = seed.report.against.f1;
    s["confusion"] = matrix_to_json(seed.report.matrix);
    seeds.push_back(std::move(s));
  }
  j["seeds"] = std::move(seeds);
  j["failed_seeds"] = record.failed_seeds;
  j["macro_f1_mean"] = record.macro_f1_mean;
  j["macro_f1_std"] = record.macro_f1_std;
  j["confusion_summed"] = matrix_to_json(record.confusion_summed);
  return j;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string escaped = "\"";
  for (char c : field) {
    if (c == '"') escaped += '"';
    escaped += c;
  }
  escaped += '"';
  return escaped;
}

std::string summary_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "method,dataset,target,n,macro_f1_mean,macro_f1_std\n";
  for (const RunRecord& record : records) {
    out << csv_escape(record.method) << ',' << csv_escape(record.dataset) << ','
        << csv_escape(record.destination) << ',' << record.n << ','
        << format_fixed(record.macro_f1_mean, 6) << ',' << format_fixed(record.macro_f1_std, 6)
        << '\n';
  }
  return out.str();
}

std::string confusion_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "method,dataset,target,n,seed,gold,predicted,count\n";
  auto row = [&](const RunRecord& record, const std::string& seed, const ConfusionMatrix& m) {
    for (StanceLabel gold : {StanceLabel::AGAINST, StanceLabel::FAVOR}) {
      for (StanceLabel pred : {StanceLabel::AGAINST, StanceLabel::FAVOR}) {
        out << csv_escape(record.method) << ',' << csv_escape(record.dataset) << ','
            << csv_escape(record.destination) << ',' << record.n << ',' << seed << ','
            << to_string(gold) << ',' << to_string(pred) << ',' << m.at(gold, pred) << '\n';
      }
    }
  };
  for (const RunRecord& record : records) {
    for (const SeedReport& seed : record.seeds) {
      row(record, std::to_string(seed.seed), seed.report.matrix);
    }
    row(record, "sum", record.confusion_summed);
  }
  return out.str();
}

// One block per n-shot setting, methods as rows, (dataset, target)
// columns plus a cross-column average.
std::string summary_md(const std::vector<RunRecord>& records) {
  std::set<int> shot_counts;
  std::vector<std::pair<std::string, std::string>> columns;  // (dataset, target), first-seen order
  std::vector<std::string> methods;
  for (const RunRecord& record : records) {
    shot_counts.insert(record.n);
    std::pair<std::string, std::string> column{record.dataset, record.destination};
    if (std::find(columns.begin(), columns.end(), column) == columns.end()) {
      columns.push_back(column);
    }
    if (std::find(methods.begin(), methods.end(), record.method) == methods.end()) {
      methods.push_back(record.method);
    }
  }

  std::ostringstream out;
  out << "# Macro-averaged F1 summary\n";
  for (int n : shot_counts) {
    out << "\n## " << n << " shots\n\n";
    out << "| Method |";
    for (const auto& [dataset, target] : columns) {
      out << ' ' << dataset << ' ' << target << " |";
    }
    out << " Average |\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out << "---|";
    out << "---|\n";
    for (const std::string& method : methods) {
      out << "| " << method << " |";
      double sum = 0.0;
      int present = 0;
      for (const auto& [dataset, target] : columns) {
        auto it = std::find_if(records.begin(), records.end(), [&](const RunRecord& r) {
          return r.n == n && r.method == method && r.dataset == dataset && r.destination == target;
        });
        if (it == records.end()) {
          out << " - |";
        } else {
          out << ' ' << format_fixed(it->macro_f1_mean, 2) << " |";
          sum += it->macro_f1_mean;
          ++present;
        }
      }
      if (present > 0) {
        out << ' ' << format_fixed(sum / present, 2) << " |\n";
      } else {
        out << " - |\n";
      }
    }
  }
  return out.str();
}

std::string jaccard_csv(const std::vector<JaccardRow>& rows) {
  std::ostringstream out;
  out << "dataset,target,jaccard\n";
  for (const JaccardRow& row : rows) {
    out << csv_escape(row.dataset) << ',' << csv_escape(row.target) << ','
        << format_fixed(row.score, 6) << '\n';
  }
  return out.str();
}

std::string jaccard_svg(const std::vector<JaccardRow>& rows) {
  const int bar_width = 48;
  const int gap = 18;
  const int group_gap = 46;
  const int chart_height = 220;
  const int left = 50;
  const int bottom = 260;

  std::map<std::string, std::vector<JaccardRow>> by_dataset;
  for (const JaccardRow& row : rows) by_dataset[row.dataset].push_back(row);

  std::ostringstream bars;
  int x = left;
  for (const auto& [dataset, group] : by_dataset) {
    int group_start = x;
    for (const JaccardRow& row : group) {
      int height = static_cast<int>(row.score * chart_height);
      bars << "  <rect x=\"" << x << "\" y=\"" << (bottom - height) << "\" width=\"" << bar_width
           << "\" height=\"" << height << "\" fill=\"#4878a8\"/>\n";
      bars << "  <text x=\"" << (x + bar_width / 2) << "\" y=\"" << (bottom - height - 6)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << format_fixed(row.score, 2)
           << "</text>\n";
      bars << "  <text x=\"" << (x + bar_width / 2) << "\" y=\"" << (bottom + 14)
           << "\" text-anchor=\"middle\" font-size=\"10\">" << row.target << "</text>\n";
      x += bar_width + gap;
    }
    bars << "  <text x=\"" << (group_start + (x - gap - group_start) / 2) << "\" y=\""
         << (bottom + 32) << "\" text-anchor=\"middle\" font-size=\"12\" font-weight=\"bold\">"
         << dataset << "</text>\n";
    x += group_gap;
  }

  int width = std::max(x, 320);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"300\" font-family=\"sans-serif\">\n";
  out << "  <text x=\"" << (width / 2)
      << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">Supporter/opponent network Jaccard "
         "overlap</text>\n";
  out << "  <line x1=\"" << (left - 10) << "\" y1=\"" << bottom << "\" x2=\"" << (width - 10)
      << "\" y2=\"" << bottom << "\" stroke=\"#333\"/>\n";
  out << bars.str();
  out << "</svg>\n";
  return out.str();
}

}  // namespace

void emit_reports(const std::vector<RunRecord>& records, const std::vector<JaccardRow>& jaccard,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  nlohmann::ordered_json metrics = nlohmann::ordered_json::array();
  for (const RunRecord& record : records) {
    metrics.push_back(record_to_json(record));
  }
  write_file(out_dir / "metrics.json", metrics.dump(2) + "\n");
  write_file(out_dir / "confusion.csv", confusion_csv(records));
  write_file(out_dir / "summary.csv", summary_csv(records));
  write_file(out_dir / "summary.md", summary_md(records));
  write_file(out_dir / "jaccard.csv", jaccard_csv(jaccard));
  write_file(out_dir / "jaccard.svg", jaccard_svg(jaccard));
}

}  // namespace socialpet
