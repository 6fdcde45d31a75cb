#include "ssn4/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ssn4 {

ConfusionMatrix::ConfusionMatrix(int num_labels)
    : k_(num_labels), counts_(static_cast<std::size_t>(num_labels) * num_labels, 0) {
    if (num_labels < 1) throw ShapeError("confusion matrix needs at least one label");
}

void ConfusionMatrix::add(int gold, int pred, std::int64_t count) {
    if (gold < 0 || gold >= k_ || pred < 0 || pred >= k_)
        throw ShapeError("confusion matrix label out of range");
    if (count < 0) throw ShapeError("confusion matrix counts are non-negative");
    counts_[static_cast<std::size_t>(gold) * k_ + pred] += count;
}

std::int64_t ConfusionMatrix::at(int gold, int pred) const {
    if (gold < 0 || gold >= k_ || pred < 0 || pred >= k_)
        throw ShapeError("confusion matrix label out of range");
    return counts_[static_cast<std::size_t>(gold) * k_ + pred];
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (std::int64_t c : counts_) t += c;
    return t;
}

std::int64_t ConfusionMatrix::row_sum(int gold) const {
    std::int64_t t = 0;
    for (int p = 0; p < k_; ++p) t += at(gold, p);
    return t;
}

std::int64_t ConfusionMatrix::col_sum(int pred) const {
    std::int64_t t = 0;
    for (int g = 0; g < k_; ++g) t += at(g, pred);
    return t;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (int i = 0; i < k_; ++i) t += at(i, i);
    return t;
}

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.k_ != k_) throw ShapeError("confusion matrix size mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

ConfusionMatrix confusion(std::span<const int> golds, std::span<const int> preds,
                          int num_labels) {
    if (golds.size() != preds.size())
        throw ShapeError("confusion: gold/prediction length mismatch");
    ConfusionMatrix cm(num_labels);
    for (std::size_t i = 0; i < golds.size(); ++i) cm.add(golds[i], preds[i]);
    return cm;
}

EvalReport report(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total == 0) throw DataError("empty confusion matrix");

    EvalReport rep;
    rep.total = total;
    rep.per_class.resize(static_cast<std::size_t>(cm.k()));
    for (int c = 0; c < cm.k(); ++c) {
        ClassMetrics& m = rep.per_class[static_cast<std::size_t>(c)];
        const std::int64_t tp = cm.at(c, c);
        const std::int64_t col = cm.col_sum(c);
        const std::int64_t row = cm.row_sum(c);
        m.support = row;
        m.precision = col > 0 ? static_cast<double>(tp) / col : 0.0;
        m.recall = row > 0 ? static_cast<double>(tp) / row : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;

        const double w = static_cast<double>(row) / total;
        rep.weighted_precision += w * m.precision;
        rep.weighted_recall += w * m.recall;
        rep.weighted_f1 += w * m.f1;
    }
    rep.micro_accuracy = static_cast<double>(cm.trace()) / total;
    return rep;
}

double percent(double fraction) {
    return std::floor(fraction * 10000.0 + 0.5) / 100.0;
}

std::string confusion_to_csv(const ConfusionMatrix& cm,
                             std::span<const std::string> names) {
    if (static_cast<int>(names.size()) != cm.k())
        throw ShapeError("label name count mismatch");
    std::ostringstream out;
    out << "actual\\predicted";
    for (const std::string& n : names) out << ',' << n;
    out << '\n';
    for (int g = 0; g < cm.k(); ++g) {
        out << names[static_cast<std::size_t>(g)];
        for (int p = 0; p < cm.k(); ++p) out << ',' << cm.at(g, p);
        out << '\n';
    }
    return out.str();
}

std::string format_report_table(const EvalReport& rep,
                                std::span<const std::string> names) {
    if (names.size() != rep.per_class.size())
        throw ShapeError("label name count mismatch");
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s %10s %10s %10s %10s\n", "category",
                  "precision", "recall", "f1", "support");
    out << line;
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        const ClassMetrics& m = rep.per_class[c];
        std::snprintf(line, sizeof(line), "%-14s %10.2f %10.2f %10.2f %10lld\n",
                      names[c].c_str(), percent(m.precision), percent(m.recall),
                      percent(m.f1), static_cast<long long>(m.support));
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-14s %10.2f %10.2f %10.2f %10lld\n", "weighted",
                  percent(rep.weighted_precision), percent(rep.weighted_recall),
                  percent(rep.weighted_f1), static_cast<long long>(rep.total));
    out << line;
    std::snprintf(line, sizeof(line), "%-14s %10.2f\n", "accuracy",
                  percent(rep.micro_accuracy));
    out << line;
    return out.str();
}

std::string format_report_kv(const EvalReport& rep,
                             std::span<const std::string> names) {
    if (names.size() != rep.per_class.size())
        throw ShapeError("label name count mismatch");
    std::ostringstream out;
    char line[160];
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        const ClassMetrics& m = rep.per_class[c];
        std::snprintf(line, sizeof(line),
                      "class=%s precision=%.6f recall=%.6f f1=%.6f support=%lld\n",
                      names[c].c_str(), m.precision, m.recall, m.f1,
                      static_cast<long long>(m.support));
        out << line;
    }
    std::snprintf(line, sizeof(line),
                  "weighted precision=%.6f recall=%.6f f1=%.6f total=%lld\n",
                  rep.weighted_precision, rep.weighted_recall, rep.weighted_f1,
                  static_cast<long long>(rep.total));
    out << line;
    std::snprintf(line, sizeof(line), "micro accuracy=%.6f\n", rep.micro_accuracy);
    out << line;
    return out.str();
}

}  // namespace ssn4
