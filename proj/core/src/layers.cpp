#include "ssn4/layers.hpp"

#include <cmath>

namespace ssn4 {

Tensor glorot_init(std::vector<int> shape, Rng& rng) {
    if (shape.empty() || shape.size() > 2)
        throw ShapeError("glorot_init: rank 1 or 2 required");
    double fan_in, fan_out;
    if (shape.size() == 2) {
        fan_out = shape[0];
        fan_in = shape[1];
    } else {
        fan_in = fan_out = shape[0];
    }
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor t = Tensor::zeros(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

const char* embedding_mode_name(EmbeddingMode m) {
    switch (m) {
        case EmbeddingMode::PretrainedFrozen: return "frozen";
        case EmbeddingMode::PretrainedFinetune: return "finetune";
        case EmbeddingMode::RandomFinetune: return "random";
    }
    return "frozen";
}

EmbeddingMode embedding_mode_from_string(std::string_view s) {
    if (s == "frozen") return EmbeddingMode::PretrainedFrozen;
    if (s == "finetune") return EmbeddingMode::PretrainedFinetune;
    if (s == "random") return EmbeddingMode::RandomFinetune;
    throw DataError("unknown embedding mode: " + std::string(s));
}

EmbeddingTable::EmbeddingTable(int vocab_size, int dim, EmbeddingMode table_mode, Rng& rng)
    : matrix("embedding.matrix", glorot_init({vocab_size, dim}, rng)), mode(table_mode) {}

EmbeddingTable::EmbeddingTable(Tensor pretrained, EmbeddingMode table_mode)
    : matrix("embedding.matrix", std::move(pretrained)), mode(table_mode) {
    if (matrix.value.rank() != 2) throw ShapeError("embedding matrix must be rank 2");
}

std::vector<Var> EmbeddingTable::embed(Tape& tape, std::span<const int> indices) {
    const int v = vocab_size(), d = dim();
    std::vector<Var> out;
    out.reserve(indices.size());
    if (trainable()) {
        Var m = tape.watch(matrix);
        for (int idx : indices) {
            if (idx < 0 || idx >= v) throw ShapeError("embedding index out of range");
            out.push_back(tape.slice_row(m, idx));
        }
    } else {
        for (int idx : indices) {
            if (idx < 0 || idx >= v) throw ShapeError("embedding index out of range");
            Tensor row = Tensor::zeros({d});
            for (int j = 0; j < d; ++j) row[static_cast<std::size_t>(j)] = matrix.value.at(idx, j);
            out.push_back(tape.constant(std::move(row)));
        }
    }
    return out;
}

Dense::Dense(const std::string& name, int in_dim, int out_dim, Rng& rng)
    : weight(name + ".W", glorot_init({out_dim, in_dim}, rng)),
      bias(name + ".b", Tensor::zeros({out_dim})) {}

Var Dense::apply(Tape& tape, Var x) {
    return tape.add(tape.matvec(tape.watch(weight), x), tape.watch(bias));
}

LstmParams::LstmParams(const std::string& name, int input_dim, int hidden_dim, Rng& rng)
    : w_in(name + ".W_i", glorot_init({hidden_dim, input_dim}, rng)),
      u_in(name + ".U_i", glorot_init({hidden_dim, hidden_dim}, rng)),
      b_in(name + ".b_i", Tensor::zeros({hidden_dim})),
      w_forget(name + ".W_f", glorot_init({hidden_dim, input_dim}, rng)),
      u_forget(name + ".U_f", glorot_init({hidden_dim, hidden_dim}, rng)),
      b_forget(name + ".b_f", Tensor::full({hidden_dim}, 1.0)),
      w_out(name + ".W_o", glorot_init({hidden_dim, input_dim}, rng)),
      u_out(name + ".U_o", glorot_init({hidden_dim, hidden_dim}, rng)),
      b_out(name + ".b_o", Tensor::zeros({hidden_dim})),
      w_cand(name + ".W_c", glorot_init({hidden_dim, input_dim}, rng)),
      u_cand(name + ".U_c", glorot_init({hidden_dim, hidden_dim}, rng)),
      b_cand(name + ".b_c", Tensor::zeros({hidden_dim})) {}

std::vector<Parameter*> LstmParams::parameters() {
    return {&w_in, &u_in, &b_in, &w_forget, &u_forget, &b_forget,
            &w_out, &u_out, &b_out, &w_cand, &u_cand, &b_cand};
}

LstmState lstm_step(Tape& tape, LstmParams& p, Var x_t, const LstmState& prev) {
    auto gate = [&](Parameter& w, Parameter& u, Parameter& b) {
        return tape.add(tape.add(tape.matvec(tape.watch(w), x_t),
                                 tape.matvec(tape.watch(u), prev.h)),
                        tape.watch(b));
    };
    Var i = tape.sigmoid_elem(gate(p.w_in, p.u_in, p.b_in));
    Var f = tape.sigmoid_elem(gate(p.w_forget, p.u_forget, p.b_forget));
    Var o = tape.sigmoid_elem(gate(p.w_out, p.u_out, p.b_out));
    Var g = tape.tanh_elem(gate(p.w_cand, p.u_cand, p.b_cand));
    Var c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
    Var h = tape.mul(o, tape.tanh_elem(c));
    return {h, c};
}

BlstmParams::BlstmParams(const std::string& name, int input_dim, int hidden_dim, Rng& rng)
    : fwd(name + ".fwd", input_dim, hidden_dim, rng),
      bwd(name + ".bwd", input_dim, hidden_dim, rng) {}

std::vector<Parameter*> BlstmParams::parameters() {
    std::vector<Parameter*> out = fwd.parameters();
    for (Parameter* p : bwd.parameters()) out.push_back(p);
    return out;
}

BlstmOut blstm_run(Tape& tape, BlstmParams& params, std::span<const Var> xs) {
    if (xs.empty()) throw ShapeError("blstm_run: empty sequence");
    const int n = static_cast<int>(xs.size());
    const int h = params.hidden_dim();

    LstmState state{tape.constant(Tensor::zeros({h})), tape.constant(Tensor::zeros({h}))};
    std::vector<Var> fwd_h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        state = lstm_step(tape, params.fwd, xs[static_cast<std::size_t>(i)], state);
        fwd_h[static_cast<std::size_t>(i)] = state.h;
    }
    Var fwd_last = state.h;

    state = {tape.constant(Tensor::zeros({h})), tape.constant(Tensor::zeros({h}))};
    std::vector<Var> bwd_h(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        state = lstm_step(tape, params.bwd, xs[static_cast<std::size_t>(i)], state);
        bwd_h[static_cast<std::size_t>(i)] = state.h;
    }
    Var bwd_last = state.h;

    BlstmOut out;
    out.states.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Var pair[2] = {fwd_h[static_cast<std::size_t>(i)], bwd_h[static_cast<std::size_t>(i)]};
        out.states.push_back(tape.concat(pair));
    }
    out.fwd_last = fwd_last;
    out.bwd_last = bwd_last;
    return out;
}

Var blstm_forward(Tape& tape, BlstmParams& params, std::span<const Var> xs) {
    BlstmOut out = blstm_run(tape, params, xs);
    return tape.stack_cols(out.states);
}

}  // namespace ssn4
