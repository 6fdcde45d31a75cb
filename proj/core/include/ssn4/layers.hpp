#pragma once

#include <span>
#include <string>
#include <vector>

#include "ssn4/rng.hpp"
#include "ssn4/tape.hpp"

namespace ssn4 {

// Uniform init in [-b, b] with b = sqrt(6 / (fan_in + fan_out)).
// Rank 2 (p,q): fan_in = q, fan_out = p. Rank 1 (n): fan_in = fan_out = n.
Tensor glorot_init(std::vector<int> shape, Rng& rng);

enum class EmbeddingMode {
    PretrainedFrozen,    // rows never receive gradient
    PretrainedFinetune,  // pretrained rows, tuned during training
    RandomFinetune,      // Glorot rows, tuned during training
};

const char* embedding_mode_name(EmbeddingMode m);
EmbeddingMode embedding_mode_from_string(std::string_view s);

// |V| x d lookup table. In the finetune modes the lookup is taped, so
// gradients flow to the selected rows only; frozen lookups are constants.
struct EmbeddingTable {
    Parameter matrix;
    EmbeddingMode mode;

    EmbeddingTable(int vocab_size, int dim, EmbeddingMode mode, Rng& rng);
    EmbeddingTable(Tensor pretrained, EmbeddingMode mode);

    int vocab_size() const { return matrix.value.dim(0); }
    int dim() const { return matrix.value.dim(1); }
    bool trainable() const { return mode != EmbeddingMode::PretrainedFrozen; }

    std::vector<Var> embed(Tape& tape, std::span<const int> indices);
};

// Fully connected y = W x + b.
struct Dense {
    Parameter weight;  // (out, in)
    Parameter bias;    // (out)

    Dense(const std::string& name, int in_dim, int out_dim, Rng& rng);

    Var apply(Tape& tape, Var x);
    int in_dim() const { return weight.value.dim(1); }
    int out_dim() const { return weight.value.dim(0); }
};

// One direction of a standard LSTM: sigmoid input/forget/output gates, tanh
// candidate and output squashing, forget bias 1.0, no peepholes.
struct LstmParams {
    Parameter w_in, u_in, b_in;
    Parameter w_forget, u_forget, b_forget;
    Parameter w_out, u_out, b_out;
    Parameter w_cand, u_cand, b_cand;

    LstmParams(const std::string& name, int input_dim, int hidden_dim, Rng& rng);

    int input_dim() const { return w_in.value.dim(1); }
    int hidden_dim() const { return w_in.value.dim(0); }
    std::vector<Parameter*> parameters();
};

struct LstmState {
    Var h;
    Var c;
};

LstmState lstm_step(Tape& tape, LstmParams& params, Var x_t, const LstmState& prev);

struct BlstmParams {
    LstmParams fwd;
    LstmParams bwd;

    BlstmParams(const std::string& name, int input_dim, int hidden_dim, Rng& rng);

    int input_dim() const { return fwd.input_dim(); }
    int hidden_dim() const { return fwd.hidden_dim(); }
    int output_dim() const { return 2 * fwd.hidden_dim(); }  // u
    std::vector<Parameter*> parameters();
};

struct BlstmOut {
    // states[i] = concat(forward h_i, backward h_i), length u, one per position.
    std::vector<Var> states;
    Var fwd_last;  // forward state after the final position
    Var bwd_last;  // backward state after position 0 (end of the reversed pass)
};

BlstmOut blstm_run(Tape& tape, BlstmParams& params, std::span<const Var> xs);

// u x n matrix whose column i is states[i].
Var blstm_forward(Tape& tape, BlstmParams& params, std::span<const Var> xs);

}  // namespace ssn4
