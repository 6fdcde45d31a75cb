#pragma once

#include <span>
#include <vector>

#include "ssn4/layers.hpp"

namespace ssn4 {

// Document-level BLSTM over sentence vectors followed by a one-hidden-layer
// (tanh) network mapping each position to K raw category scores.
struct EmissionNet {
    BlstmParams doc_blstm;
    Dense hidden;  // tanh
    Dense out;     // K raw scores

    EmissionNet(int sentence_dim, int doc_hidden, int emission_hidden, int num_labels,
                Rng& rng);

    int num_labels() const { return out.out_dim(); }
    std::vector<Parameter*> parameters();

    // m sentence vectors -> (m, K) raw scores. The CRF consumes raw scores;
    // softmax is applied only where a variant needs probabilities.
    Var emit_scores(Tape& tape, std::span<const Var> sentence_vectors);
};

// Linear-chain CRF scores: K x K transitions plus optional start/end score
// vectors (start/end participate only when use_start_end is set).
struct CrfParams {
    Parameter transitions;  // (K, K), T(prev, next)
    Parameter start;        // (K)
    Parameter end;          // (K)
    bool use_start_end;

    explicit CrfParams(int num_labels, bool use_start_end = true);

    int num_labels() const { return transitions.value.dim(0); }
    std::vector<Parameter*> parameters();
};

// start[y1] + sum_i r_i[y_i] + sum_{i>=2} T(y_{i-1}, y_i) + end[y_m].
Var crf_sequence_score(Tape& tape, Var emissions, std::span<const int> labels,
                       CrfParams& crf);
double crf_sequence_score(const Tensor& emissions, std::span<const int> labels,
                          const CrfParams& crf);

// log sum over all K^m label sequences of exp(sequence score); forward
// algorithm, O(m K^2) with logsumexp recurrences.
Var crf_log_partition(Tape& tape, Var emissions, CrfParams& crf);
double crf_log_partition(const Tensor& emissions, const CrfParams& crf);

// Negative log probability of the gold sequence; always >= 0.
Var crf_nll(Tape& tape, Var emissions, std::span<const int> gold, CrfParams& crf);

// Max-score label sequence; ties broken toward the lower label index at each
// backtracking step.
std::vector<int> viterbi_decode(const Tensor& emissions, const CrfParams& crf);

// Hard ordering rules replacing learned transitions: an allowed-transition
// matrix (reflexive) plus a terminal category set.
struct OrderRules {
    int num_labels;
    std::vector<char> allowed;  // K x K row-major, allowed[prev*K + next]

    explicit OrderRules(int num_labels);

    // Non-decreasing canonical order; terminal categories keep only their
    // self-transition (already implied by monotonicity for the last label).
    static OrderRules monotone(int num_labels, std::span<const int> terminal = {});

    bool is_allowed(int prev, int next) const {
        return allowed[static_cast<std::size_t>(prev) * num_labels + next] != 0;
    }
    void set_allowed(int prev, int next, bool ok);
    void make_terminal(int label);
};

// Maximizes sum_i scores[i][y_i] over sequences whose every transition is
// allowed; ties toward the lower label index. Scores should already be
// normalized (softmax) by the caller when used as the no-CRF decode path.
std::vector<int> constrained_decode(const Tensor& scores, const OrderRules& rules);

// Row-wise stable softmax of an (m, K) score matrix (value-level helper for
// the decode and correction paths).
Tensor softmax_rows_values(const Tensor& scores);

}  // namespace ssn4
