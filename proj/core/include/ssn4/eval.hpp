#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssn4/errors.hpp"

namespace ssn4 {

// K x K counts; rows are the actual label, columns the predicted label.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_labels = 5);

    void add(int gold, int pred, std::int64_t count = 1);
    std::int64_t at(int gold, int pred) const;
    int k() const { return k_; }
    std::int64_t total() const;
    std::int64_t row_sum(int gold) const;
    std::int64_t col_sum(int pred) const;
    std::int64_t trace() const;

    // Counts merge associatively across workers.
    ConfusionMatrix& merge(const ConfusionMatrix& other);

private:
    int k_;
    std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> golds, std::span<const int> preds,
                          int num_labels = 5);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;  // gold count
};

struct EvalReport {
    std::vector<ClassMetrics> per_class;
    double weighted_precision = 0.0;  // gold-support weights
    double weighted_recall = 0.0;     // equals micro accuracy by identity
    double weighted_f1 = 0.0;
    double micro_accuracy = 0.0;
    std::int64_t total = 0;
};

// Per-class P = diag/colsum, R = diag/rowsum, F1 harmonic mean (0 when
// P + R = 0); weighted averages use gold-support weights.
EvalReport report(const ConfusionMatrix& cm);

// Percentage rounded half-up to 2 decimals, as reported in result tables.
double percent(double fraction);

std::string confusion_to_csv(const ConfusionMatrix& cm,
                             std::span<const std::string> names);
std::string format_report_table(const EvalReport& rep,
                                std::span<const std::string> names);
// One "key=value" line per metric, machine-readable.
std::string format_report_kv(const EvalReport& rep,
                             std::span<const std::string> names);

}  // namespace ssn4
