#include "ssn4/tape.hpp"

#include <algorithm>
#include <cmath>

#include "ssn4/numeric.hpp"

namespace ssn4 {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw ShapeError(msg);
}

}  // namespace

int Tape::check(Var v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
        throw ShapeError("invalid tape handle");
    return v.id;
}

Var Tape::push(Tensor value, std::function<void()> back, Parameter* param) {
    Node n;
    n.grad = Tensor::zeros(value.shape());
    n.value = std::move(value);
    n.back = std::move(back);
    n.param = param;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor t) { return push(std::move(t)); }

Var Tape::watch(Parameter& p) {
    auto it = watched_.find(&p);
    if (it != watched_.end()) return Var{it->second};
    Var v = push(p.value, {}, &p);
    watched_.emplace(&p, v.id);
    return v;
}

Var Tape::add(Var a, Var b) {
    int ia = check(a), ib = check(b);
    require(val(ia).same_shape(val(ib)), "add: shape mismatch");
    Tensor out = val(ia);
    const Tensor& vb = val(ib);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, ib, io] {
        const Tensor& g = nodes_[io].grad;
        Tensor& ga = grad_mut(ia);
        Tensor& gb = grad_mut(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
        }
    });
}

Var Tape::sub(Var a, Var b) {
    int ia = check(a), ib = check(b);
    require(val(ia).same_shape(val(ib)), "sub: shape mismatch");
    Tensor out = val(ia);
    const Tensor& vb = val(ib);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, ib, io] {
        const Tensor& g = nodes_[io].grad;
        Tensor& ga = grad_mut(ia);
        Tensor& gb = grad_mut(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] -= g[i];
        }
    });
}

Var Tape::mul(Var a, Var b) {
    int ia = check(a), ib = check(b);
    require(val(ia).same_shape(val(ib)), "mul: shape mismatch");
    Tensor out = val(ia);
    const Tensor& vb = val(ib);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, ib, io] {
        const Tensor& g = nodes_[io].grad;
        const Tensor& va = val(ia);
        const Tensor& vb2 = val(ib);
        Tensor& ga = grad_mut(ia);
        Tensor& gb = grad_mut(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * vb2[i];
            gb[i] += g[i] * va[i];
        }
    });
}

Var Tape::scale(Var a, double c) {
    int ia = check(a);
    Tensor out = val(ia);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io, c] {
        const Tensor& g = nodes_[io].grad;
        Tensor& ga = grad_mut(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    });
}

Var Tape::matmul(Var a, Var b) {
    int ia = check(a), ib = check(b);
    const Tensor& A = val(ia);
    const Tensor& B = val(ib);
    require(A.rank() == 2 && B.rank() == 2, "matmul: rank-2 operands required");
    require(A.dim(1) == B.dim(0), "matmul: inner dimensions disagree");
    const int p = A.dim(0), q = A.dim(1), s = B.dim(1);
    Tensor out = Tensor::zeros({p, s});
    for (int i = 0; i < p; ++i)
        for (int k = 0; k < q; ++k) {
            double aik = A.at(i, k);
            for (int j = 0; j < s; ++j) out.at(i, j) += aik * B.at(k, j);
        }
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, ib, io, p, q, s] {
        const Tensor& G = nodes_[io].grad;
        const Tensor& A2 = val(ia);
        const Tensor& B2 = val(ib);
        Tensor& GA = grad_mut(ia);
        Tensor& GB = grad_mut(ib);
        // dA = G * B^T
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < s; ++j) {
                double gij = G.at(i, j);
                for (int k = 0; k < q; ++k) GA.at(i, k) += gij * B2.at(k, j);
            }
        // dB = A^T * G
        for (int i = 0; i < p; ++i)
            for (int k = 0; k < q; ++k) {
                double aik = A2.at(i, k);
                for (int j = 0; j < s; ++j) GB.at(k, j) += aik * G.at(i, j);
            }
    });
}

Var Tape::matvec(Var w, Var x) {
    int iw = check(w), ix = check(x);
    const Tensor& W = val(iw);
    const Tensor& X = val(ix);
    require(W.rank() == 2 && X.rank() == 1, "matvec: (matrix, vector) required");
    require(W.dim(1) == X.dim(0), "matvec: inner dimensions disagree");
    const int p = W.dim(0), q = W.dim(1);
    Tensor out = Tensor::zeros({p});
    for (int i = 0; i < p; ++i) {
        double acc = 0.0;
        for (int j = 0; j < q; ++j) acc += W.at(i, j) * X[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, iw, ix, io, p, q] {
        const Tensor& g = nodes_[io].grad;
        const Tensor& W2 = val(iw);
        const Tensor& X2 = val(ix);
        Tensor& GW = grad_mut(iw);
        Tensor& gx = grad_mut(ix);
        for (int i = 0; i < p; ++i) {
            double gi = g[static_cast<std::size_t>(i)];
            for (int j = 0; j < q; ++j) {
                GW.at(i, j) += gi * X2[static_cast<std::size_t>(j)];
                gx[static_cast<std::size_t>(j)] += W2.at(i, j) * gi;
            }
        }
    });
}

Var Tape::transpose(Var a) {
    int ia = check(a);
    const Tensor& A = val(ia);
    require(A.rank() == 2, "transpose: rank-2 required");
    const int p = A.dim(0), q = A.dim(1);
    Tensor out = Tensor::zeros({q, p});
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) out.at(j, i) = A.at(i, j);
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io, p, q] {
        const Tensor& G = nodes_[io].grad;
        Tensor& GA = grad_mut(ia);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < q; ++j) GA.at(i, j) += G.at(j, i);
    });
}

Var Tape::tanh_elem(Var a) {
    int ia = check(a);
    Tensor out = val(ia);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io] {
        const Tensor& g = nodes_[io].grad;
        const Tensor& y = nodes_[io].value;
        Tensor& ga = grad_mut(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += (1.0 - y[i] * y[i]) * g[i];
    });
}

Var Tape::sigmoid_elem(Var a) {
    int ia = check(a);
    Tensor out = val(ia);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io] {
        const Tensor& g = nodes_[io].grad;
        const Tensor& y = nodes_[io].value;
        Tensor& ga = grad_mut(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += y[i] * (1.0 - y[i]) * g[i];
    });
}

Var Tape::softmax_rows(Var a) {
    int ia = check(a);
    const Tensor& A = val(ia);
    require(A.rank() == 1 || A.rank() == 2, "softmax_rows: rank 1 or 2 required");
    const int rows = A.rank() == 2 ? A.dim(0) : 1;
    const int cols = A.rank() == 2 ? A.dim(1) : A.dim(0);
    Tensor out = Tensor::zeros(A.shape());
    for (int i = 0; i < rows; ++i)
        stable_softmax(A.data() + static_cast<std::size_t>(i) * cols,
                       out.data() + static_cast<std::size_t>(i) * cols,
                       static_cast<std::size_t>(cols));
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io, rows, cols] {
        const Tensor& g = nodes_[io].grad;
        const Tensor& y = nodes_[io].value;
        Tensor& ga = grad_mut(ia);
        for (int i = 0; i < rows; ++i) {
            const std::size_t off = static_cast<std::size_t>(i) * cols;
            double dot = 0.0;
            for (int j = 0; j < cols; ++j) dot += g[off + j] * y[off + j];
            for (int j = 0; j < cols; ++j) ga[off + j] += y[off + j] * (g[off + j] - dot);
        }
    });
}

Var Tape::logsumexp_row(Var a) {
    int ia = check(a);
    const Tensor& A = val(ia);
    require(A.rank() == 1, "logsumexp_row: rank-1 required");
    Tensor out = Tensor::scalar(stable_logsumexp(A.data(), A.size()));
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io] {
        const double g = nodes_[io].grad[0];
        const double lse = nodes_[io].value[0];
        const Tensor& x = val(ia);
        Tensor& ga = grad_mut(ia);
        for (std::size_t i = 0; i < x.size(); ++i) ga[i] += std::exp(x[i] - lse) * g;
    });
}

Var Tape::logsumexp_rows(Var a) {
    int ia = check(a);
    const Tensor& A = val(ia);
    require(A.rank() == 2, "logsumexp_rows: rank-2 required");
    const int p = A.dim(0), q = A.dim(1);
    Tensor out = Tensor::zeros({p});
    for (int i = 0; i < p; ++i)
        out[static_cast<std::size_t>(i)] =
            stable_logsumexp(A.data() + static_cast<std::size_t>(i) * q, static_cast<std::size_t>(q));
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io, p, q] {
        const Tensor& g = nodes_[io].grad;
        const Tensor& lse = nodes_[io].value;
        const Tensor& X = val(ia);
        Tensor& ga = grad_mut(ia);
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < q; ++j)
                ga.at(i, j) += std::exp(X.at(i, j) - lse[static_cast<std::size_t>(i)]) *
                               g[static_cast<std::size_t>(i)];
    });
}

Var Tape::concat(std::span<const Var> xs) {
    require(!xs.empty(), "concat: empty input");
    std::vector<int> ids;
    ids.reserve(xs.size());
    std::size_t total = 0;
    for (Var v : xs) {
        int id = check(v);
        require(val(id).rank() == 1, "concat: rank-1 inputs required");
        total += val(id).size();
        ids.push_back(id);
    }
    Tensor out = Tensor::zeros({static_cast<int>(total)});
    std::size_t off = 0;
    for (int id : ids) {
        const Tensor& x = val(id);
        for (std::size_t i = 0; i < x.size(); ++i) out[off + i] = x[i];
        off += x.size();
    }
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ids, io] {
        const Tensor& g = nodes_[io].grad;
        std::size_t off2 = 0;
        for (int id : ids) {
            Tensor& gx = grad_mut(id);
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[off2 + i];
            off2 += gx.size();
        }
    });
}

Var Tape::stack_cols(std::span<const Var> xs) {
    require(!xs.empty(), "stack_cols: empty input");
    std::vector<int> ids;
    ids.reserve(xs.size());
    const int p = val(check(xs[0])).dim(0);
    for (Var v : xs) {
        int id = check(v);
        require(val(id).rank() == 1 && val(id).dim(0) == p, "stack_cols: equal-length vectors required");
        ids.push_back(id);
    }
    const int n = static_cast<int>(ids.size());
    Tensor out = Tensor::zeros({p, n});
    for (int c = 0; c < n; ++c) {
        const Tensor& x = val(ids[static_cast<std::size_t>(c)]);
        for (int i = 0; i < p; ++i) out.at(i, c) = x[static_cast<std::size_t>(i)];
    }
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ids, io, p, n] {
        const Tensor& G = nodes_[io].grad;
        for (int c = 0; c < n; ++c) {
            Tensor& gx = grad_mut(ids[static_cast<std::size_t>(c)]);
            for (int i = 0; i < p; ++i) gx[static_cast<std::size_t>(i)] += G.at(i, c);
        }
    });
}

Var Tape::stack_rows(std::span<const Var> xs) {
    require(!xs.empty(), "stack_rows: empty input");
    std::vector<int> ids;
    ids.reserve(xs.size());
    const int q = val(check(xs[0])).dim(0);
    for (Var v : xs) {
        int id = check(v);
        require(val(id).rank() == 1 && val(id).dim(0) == q, "stack_rows: equal-length vectors required");
        ids.push_back(id);
    }
    const int n = static_cast<int>(ids.size());
    Tensor out = Tensor::zeros({n, q});
    for (int r = 0; r < n; ++r) {
        const Tensor& x = val(ids[static_cast<std::size_t>(r)]);
        for (int j = 0; j < q; ++j) out.at(r, j) = x[static_cast<std::size_t>(j)];
    }
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ids, io, q, n] {
        const Tensor& G = nodes_[io].grad;
        for (int r = 0; r < n; ++r) {
            Tensor& gx = grad_mut(ids[static_cast<std::size_t>(r)]);
            for (int j = 0; j < q; ++j) gx[static_cast<std::size_t>(j)] += G.at(r, j);
        }
    });
}

Var Tape::flatten(Var a) {
    int ia = check(a);
    const Tensor& A = val(ia);
    Tensor out = Tensor::zeros({static_cast<int>(A.size())});
    for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i];
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io] {
        const Tensor& g = nodes_[io].grad;
        Tensor& ga = grad_mut(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

Var Tape::slice_row(Var a, int row) {
    int ia = check(a);
    const Tensor& A = val(ia);
    require(A.rank() == 2, "slice_row: rank-2 required");
    require(row >= 0 && row < A.dim(0), "slice_row: row out of range");
    const int q = A.dim(1);
    Tensor out = Tensor::zeros({q});
    for (int j = 0; j < q; ++j) out[static_cast<std::size_t>(j)] = A.at(row, j);
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io, row, q] {
        const Tensor& g = nodes_[io].grad;
        Tensor& GA = grad_mut(ia);
        for (int j = 0; j < q; ++j) GA.at(row, j) += g[static_cast<std::size_t>(j)];
    });
}

Var Tape::pick(Var a, std::size_t flat_index) {
    int ia = check(a);
    require(flat_index < val(ia).size(), "pick: index out of range");
    Tensor out = Tensor::scalar(val(ia)[flat_index]);
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io, flat_index] {
        grad_mut(ia)[flat_index] += nodes_[io].grad[0];
    });
}

Var Tape::broadcast_col(Var v, int cols) {
    int iv = check(v);
    const Tensor& x = val(iv);
    require(x.rank() == 1, "broadcast_col: rank-1 required");
    require(cols >= 1, "broadcast_col: cols must be positive");
    const int p = x.dim(0);
    Tensor out = Tensor::zeros({p, cols});
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < cols; ++j) out.at(i, j) = x[static_cast<std::size_t>(i)];
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, iv, io, p, cols] {
        const Tensor& G = nodes_[io].grad;
        Tensor& gx = grad_mut(iv);
        for (int i = 0; i < p; ++i) {
            double acc = 0.0;
            for (int j = 0; j < cols; ++j) acc += G.at(i, j);
            gx[static_cast<std::size_t>(i)] += acc;
        }
    });
}

Var Tape::sum(Var a) {
    int ia = check(a);
    const Tensor& A = val(ia);
    double acc = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) acc += A[i];
    Tensor out = Tensor::scalar(acc);
    int io = static_cast<int>(nodes_.size());
    return push(std::move(out), [this, ia, io] {
        const double g = nodes_[io].grad[0];
        Tensor& ga = grad_mut(ia);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
}

void Tape::backward(Var loss) {
    int il = check(loss);
    if (nodes_[static_cast<std::size_t>(il)].value.size() != 1)
        throw ShapeError("backward: loss must be scalar");
    for (Node& n : nodes_) n.grad.fill(0.0);
    nodes_[static_cast<std::size_t>(il)].grad[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;)
        if (nodes_[i].back) nodes_[i].back();
    for (Node& n : nodes_)
        if (n.param)
            for (std::size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
}

double grad_check(const std::function<double()>& run,
                  std::span<Parameter* const> params, double eps) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw ShapeError("grad_check: eps outside [1e-7, 1e-3]");

    for (Parameter* p : params) p->zero_grad();
    double base = run();
    if (!std::isfinite(base)) throw NumericError("grad_check: non-finite loss");

    std::vector<Tensor> analytic;
    analytic.reserve(params.size());
    for (Parameter* p : params) analytic.push_back(p->grad);

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& p = *params[pi];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + eps;
            double f_plus = run();
            p.value[i] = saved - eps;
            double f_minus = run();
            p.value[i] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
                throw NumericError("grad_check: non-finite loss during perturbation");
            const double g_fd = (f_plus - f_minus) / (2.0 * eps);
            const double g_ad = analytic[pi][i];
            const double denom = std::max({1.0, std::abs(g_ad), std::abs(g_fd)});
            max_rel = std::max(max_rel, std::abs(g_ad - g_fd) / denom);
        }
    }
    for (Parameter* p : params) p->zero_grad();
    return max_rel;
}

}  // namespace ssn4
