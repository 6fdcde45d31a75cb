#include "ssn4/docmodel.hpp"

#include <cmath>
#include <limits>

#include "ssn4/numeric.hpp"

namespace ssn4 {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_emissions(const Tensor& emissions, int k) {
    if (emissions.rank() != 2) throw ShapeError("emissions must be (m, K)");
    if (k >= 0 && emissions.dim(1) != k)
        throw ShapeError("emissions have wrong number of label columns");
}

void check_labels(std::span<const int> labels, int m, int k) {
    if (static_cast<int>(labels.size()) != m)
        throw ShapeError("label sequence length does not match emissions");
    for (int y : labels)
        if (y < 0 || y >= k) throw ShapeError("label index out of range");
}

}  // namespace

EmissionNet::EmissionNet(int sentence_dim, int doc_hidden, int emission_hidden,
                         int num_labels, Rng& rng)
    : doc_blstm("doc.blstm", sentence_dim, doc_hidden, rng),
      hidden("emission.hidden", 2 * doc_hidden, emission_hidden, rng),
      out("emission.out", emission_hidden, num_labels, rng) {}

std::vector<Parameter*> EmissionNet::parameters() {
    std::vector<Parameter*> ps = doc_blstm.parameters();
    ps.push_back(&hidden.weight);
    ps.push_back(&hidden.bias);
    ps.push_back(&out.weight);
    ps.push_back(&out.bias);
    return ps;
}

Var EmissionNet::emit_scores(Tape& tape, std::span<const Var> sentence_vectors) {
    if (sentence_vectors.empty()) throw ShapeError("emit_scores: empty document");
    BlstmOut doc = blstm_run(tape, doc_blstm, sentence_vectors);
    std::vector<Var> rows;
    rows.reserve(doc.states.size());
    for (Var h : doc.states)
        rows.push_back(out.apply(tape, tape.tanh_elem(hidden.apply(tape, h))));
    return tape.stack_rows(rows);
}

CrfParams::CrfParams(int num_labels, bool with_start_end)
    : transitions("crf.T", Tensor::zeros({num_labels, num_labels})),
      start("crf.start", Tensor::zeros({num_labels})),
      end("crf.end", Tensor::zeros({num_labels})),
      use_start_end(with_start_end) {}

std::vector<Parameter*> CrfParams::parameters() {
    if (use_start_end) return {&transitions, &start, &end};
    return {&transitions};
}

Var crf_sequence_score(Tape& tape, Var emissions, std::span<const int> labels,
                       CrfParams& crf) {
    const Tensor& r = tape.value(emissions);
    const int k = crf.num_labels();
    check_emissions(r, k);
    const int m = r.dim(0);
    check_labels(labels, m, k);

    Var score = tape.pick(emissions, static_cast<std::size_t>(labels[0]));
    if (crf.use_start_end)
        score = tape.add(score, tape.pick(tape.watch(crf.start),
                                          static_cast<std::size_t>(labels[0])));
    if (m > 1) {
        Var t = tape.watch(crf.transitions);
        for (int i = 1; i < m; ++i) {
            score = tape.add(score, tape.pick(emissions,
                                              static_cast<std::size_t>(i) * k + labels[i]));
            score = tape.add(score,
                             tape.pick(t, static_cast<std::size_t>(labels[i - 1]) * k +
                                              labels[i]));
        }
    }
    if (crf.use_start_end)
        score = tape.add(score, tape.pick(tape.watch(crf.end),
                                          static_cast<std::size_t>(labels[m - 1])));
    return score;
}

double crf_sequence_score(const Tensor& emissions, std::span<const int> labels,
                          const CrfParams& crf) {
    const int k = crf.num_labels();
    check_emissions(emissions, k);
    const int m = emissions.dim(0);
    check_labels(labels, m, k);

    double s = emissions.at(0, labels[0]);
    if (crf.use_start_end) s += crf.start.value[static_cast<std::size_t>(labels[0])];
    for (int i = 1; i < m; ++i)
        s += emissions.at(i, labels[i]) + crf.transitions.value.at(labels[i - 1], labels[i]);
    if (crf.use_start_end) s += crf.end.value[static_cast<std::size_t>(labels[m - 1])];
    return s;
}

Var crf_log_partition(Tape& tape, Var emissions, CrfParams& crf) {
    const Tensor& r = tape.value(emissions);
    const int k = crf.num_labels();
    check_emissions(r, k);
    const int m = r.dim(0);

    Var alpha = tape.slice_row(emissions, 0);
    if (crf.use_start_end) alpha = tape.add(alpha, tape.watch(crf.start));
    if (m > 1) {
        Var t = tape.watch(crf.transitions);
        for (int i = 1; i < m; ++i) {
            // z[j][next] = alpha[j] + T(j, next); reduce over j per column.
            Var z = tape.add(tape.broadcast_col(alpha, k), t);
            Var reduced = tape.logsumexp_rows(tape.transpose(z));
            alpha = tape.add(reduced, tape.slice_row(emissions, i));
        }
    }
    if (crf.use_start_end) alpha = tape.add(alpha, tape.watch(crf.end));
    return tape.logsumexp_row(alpha);
}

double crf_log_partition(const Tensor& emissions, const CrfParams& crf) {
    const int k = crf.num_labels();
    check_emissions(emissions, k);
    const int m = emissions.dim(0);

    std::vector<double> alpha(static_cast<std::size_t>(k));
    for (int y = 0; y < k; ++y)
        alpha[static_cast<std::size_t>(y)] =
            emissions.at(0, y) + (crf.use_start_end ? crf.start.value[static_cast<std::size_t>(y)] : 0.0);

    std::vector<double> scratch(static_cast<std::size_t>(k)), next(static_cast<std::size_t>(k));
    for (int i = 1; i < m; ++i) {
        for (int y = 0; y < k; ++y) {
            for (int j = 0; j < k; ++j)
                scratch[static_cast<std::size_t>(j)] =
                    alpha[static_cast<std::size_t>(j)] + crf.transitions.value.at(j, y);
            next[static_cast<std::size_t>(y)] =
                stable_logsumexp(scratch.data(), scratch.size()) + emissions.at(i, y);
        }
        alpha = next;
    }
    if (crf.use_start_end)
        for (int y = 0; y < k; ++y)
            alpha[static_cast<std::size_t>(y)] += crf.end.value[static_cast<std::size_t>(y)];
    return stable_logsumexp(alpha.data(), alpha.size());
}

Var crf_nll(Tape& tape, Var emissions, std::span<const int> gold, CrfParams& crf) {
    return tape.sub(crf_log_partition(tape, emissions, crf),
                    crf_sequence_score(tape, emissions, gold, crf));
}

std::vector<int> viterbi_decode(const Tensor& emissions, const CrfParams& crf) {
    const int k = crf.num_labels();
    check_emissions(emissions, k);
    const int m = emissions.dim(0);

    std::vector<double> delta(static_cast<std::size_t>(k));
    std::vector<std::vector<int>> back(static_cast<std::size_t>(m),
                                       std::vector<int>(static_cast<std::size_t>(k), 0));
    for (int y = 0; y < k; ++y)
        delta[static_cast<std::size_t>(y)] =
            emissions.at(0, y) + (crf.use_start_end ? crf.start.value[static_cast<std::size_t>(y)] : 0.0);

    std::vector<double> next(static_cast<std::size_t>(k));
    for (int i = 1; i < m; ++i) {
        for (int y = 0; y < k; ++y) {
            double best = kNegInf;
            int arg = 0;
            for (int j = 0; j < k; ++j) {
                double cand = delta[static_cast<std::size_t>(j)] + crf.transitions.value.at(j, y);
                if (cand > best) {  // strict: ties keep the lower j
                    best = cand;
                    arg = j;
                }
            }
            next[static_cast<std::size_t>(y)] = best + emissions.at(i, y);
            back[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] = arg;
        }
        delta = next;
    }
    if (crf.use_start_end)
        for (int y = 0; y < k; ++y)
            delta[static_cast<std::size_t>(y)] += crf.end.value[static_cast<std::size_t>(y)];

    int best_y = 0;
    for (int y = 1; y < k; ++y)
        if (delta[static_cast<std::size_t>(y)] > delta[static_cast<std::size_t>(best_y)]) best_y = y;

    std::vector<int> path(static_cast<std::size_t>(m));
    path[static_cast<std::size_t>(m - 1)] = best_y;
    for (int i = m - 1; i > 0; --i)
        path[static_cast<std::size_t>(i - 1)] =
            back[static_cast<std::size_t>(i)][static_cast<std::size_t>(path[static_cast<std::size_t>(i)])];
    return path;
}

OrderRules::OrderRules(int k)
    : num_labels(k), allowed(static_cast<std::size_t>(k) * k, 0) {
    if (k < 1) throw ShapeError("rules need at least one label");
    for (int i = 0; i < k; ++i) allowed[static_cast<std::size_t>(i) * k + i] = 1;
}

OrderRules OrderRules::monotone(int k, std::span<const int> terminal) {
    OrderRules rules(k);
    for (int prev = 0; prev < k; ++prev)
        for (int nxt = prev; nxt < k; ++nxt)
            rules.allowed[static_cast<std::size_t>(prev) * k + nxt] = 1;
    for (int t : terminal) rules.make_terminal(t);
    return rules;
}

void OrderRules::set_allowed(int prev, int next, bool ok) {
    if (prev < 0 || prev >= num_labels || next < 0 || next >= num_labels)
        throw ShapeError("rule index out of range");
    if (prev == next && !ok)
        throw ShapeError("self-transitions must stay allowed");
    allowed[static_cast<std::size_t>(prev) * num_labels + next] = ok ? 1 : 0;
}

void OrderRules::make_terminal(int label) {
    for (int nxt = 0; nxt < num_labels; ++nxt)
        if (nxt != label) set_allowed(label, nxt, false);
}

std::vector<int> constrained_decode(const Tensor& scores, const OrderRules& rules) {
    const int k = rules.num_labels;
    check_emissions(scores, k);
    const int m = scores.dim(0);

    std::vector<double> delta(static_cast<std::size_t>(k));
    std::vector<std::vector<int>> back(static_cast<std::size_t>(m),
                                       std::vector<int>(static_cast<std::size_t>(k), -1));
    for (int y = 0; y < k; ++y) delta[static_cast<std::size_t>(y)] = scores.at(0, y);

    std::vector<double> next(static_cast<std::size_t>(k));
    for (int i = 1; i < m; ++i) {
        for (int y = 0; y < k; ++y) {
            double best = kNegInf;
            int arg = -1;
            for (int j = 0; j < k; ++j) {
                if (!rules.is_allowed(j, y)) continue;
                double cand = delta[static_cast<std::size_t>(j)];
                if (cand > best) {
                    best = cand;
                    arg = j;
                }
            }
            next[static_cast<std::size_t>(y)] = best == kNegInf ? kNegInf : best + scores.at(i, y);
            back[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] = arg;
        }
        delta = next;
    }

    int best_y = -1;
    double best = kNegInf;
    for (int y = 0; y < k; ++y)
        if (delta[static_cast<std::size_t>(y)] > best) {
            best = delta[static_cast<std::size_t>(y)];
            best_y = y;
        }
    if (best_y < 0) throw DataError("order rules admit no label path");

    std::vector<int> path(static_cast<std::size_t>(m));
    path[static_cast<std::size_t>(m - 1)] = best_y;
    for (int i = m - 1; i > 0; --i)
        path[static_cast<std::size_t>(i - 1)] =
            back[static_cast<std::size_t>(i)][static_cast<std::size_t>(path[static_cast<std::size_t>(i)])];
    return path;
}

Tensor softmax_rows_values(const Tensor& scores) {
    if (scores.rank() != 2) throw ShapeError("softmax_rows_values: rank-2 required");
    Tensor out = scores;
    const int rows = scores.dim(0), cols = scores.dim(1);
    for (int i = 0; i < rows; ++i)
        stable_softmax(scores.data() + static_cast<std::size_t>(i) * cols,
                       out.data() + static_cast<std::size_t>(i) * cols,
                       static_cast<std::size_t>(cols));
    return out;
}

}  // namespace ssn4
