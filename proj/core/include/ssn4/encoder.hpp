#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ssn4/layers.hpp"

namespace ssn4 {

// Parameters of the structured self-attention head. W_m1 projects BLSTM
// states (dim u) into an a-dimensional space; W_m2 emits r attention rows.
struct AttentionParams {
    Parameter w_m1;  // (a, u)
    Parameter w_m2;  // (r, a)

    AttentionParams(const std::string& name, int a, int u, int r, Rng& rng);

    int a() const { return w_m1.value.dim(0); }
    int u() const { return w_m1.value.dim(1); }
    int r() const { return w_m2.value.dim(0); }
    std::vector<Parameter*> parameters() { return {&w_m1, &w_m2}; }
};

enum class EncoderMode {
    SelfAttention,     // r-row attention over word positions, output length r*u
    LastHiddenConcat,  // final fwd/bwd states concatenated, output length u
};

// A = softmax_rows(W_m2 * tanh(W_m1 * H)); each of the r rows is a
// distribution over the n word positions.
Var attention_matrix(Tape& tape, AttentionParams& params, Var h_matrix);

// S = A * H^T, so row k is the attention-k weighted combination of hidden
// states. Flattening S row-major yields the sentence vector.
Var sentence_matrix(Tape& tape, Var attention, Var h_matrix);

// BLSTM + attention sentence encoder, with the attention-free ablation.
struct SentenceEncoder {
    EncoderMode mode;
    BlstmParams blstm;
    std::optional<AttentionParams> attention;  // present iff SelfAttention

    SentenceEncoder(EncoderMode mode, int input_dim, int hidden_dim, int a, int r,
                    Rng& rng);

    int output_dim() const;
    std::size_t param_count();
    std::vector<Parameter*> parameters();

    Var encode(Tape& tape, EmbeddingTable& table, std::span<const int> indices);
};

}  // namespace ssn4
