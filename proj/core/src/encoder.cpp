#include "ssn4/encoder.hpp"

namespace ssn4 {

AttentionParams::AttentionParams(const std::string& name, int a, int u, int r, Rng& rng)
    : w_m1(name + ".W_m1", glorot_init({a, u}, rng)),
      w_m2(name + ".W_m2", glorot_init({r, a}, rng)) {
    if (a < 1 || r < 1) throw ShapeError("attention: a and r must be >= 1");
}

Var attention_matrix(Tape& tape, AttentionParams& params, Var h_matrix) {
    Var projected = tape.tanh_elem(tape.matmul(tape.watch(params.w_m1), h_matrix));
    return tape.softmax_rows(tape.matmul(tape.watch(params.w_m2), projected));
}

Var sentence_matrix(Tape& tape, Var attention, Var h_matrix) {
    return tape.matmul(attention, tape.transpose(h_matrix));
}

SentenceEncoder::SentenceEncoder(EncoderMode encoder_mode, int input_dim, int hidden_dim,
                                 int a, int r, Rng& rng)
    : mode(encoder_mode), blstm("encoder.blstm", input_dim, hidden_dim, rng) {
    if (mode == EncoderMode::SelfAttention)
        attention.emplace("encoder.attn", a, blstm.output_dim(), r, rng);
}

int SentenceEncoder::output_dim() const {
    const int u = blstm.output_dim();
    return mode == EncoderMode::SelfAttention ? attention->r() * u : u;
}

std::size_t SentenceEncoder::param_count() {
    std::size_t n = 0;
    for (Parameter* p : parameters()) n += p->size();
    return n;
}

std::vector<Parameter*> SentenceEncoder::parameters() {
    std::vector<Parameter*> out = blstm.parameters();
    if (attention)
        for (Parameter* p : attention->parameters()) out.push_back(p);
    return out;
}

Var SentenceEncoder::encode(Tape& tape, EmbeddingTable& table,
                            std::span<const int> indices) {
    if (indices.empty()) throw ShapeError("encode: empty sentence");
    std::vector<Var> xs = table.embed(tape, indices);
    BlstmOut out = blstm_run(tape, blstm, xs);
    if (mode == EncoderMode::SelfAttention) {
        Var h_matrix = tape.stack_cols(out.states);
        Var attn = attention_matrix(tape, *attention, h_matrix);
        return tape.flatten(sentence_matrix(tape, attn, h_matrix));
    }
    const Var ends[2] = {out.fwd_last, out.bwd_last};
    return tape.concat(ends);
}

}  // namespace ssn4
