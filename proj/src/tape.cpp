#include "fanfold/tape.hpp"

#include <algorithm>
#include <cmath>

#include "fanfold/errors.hpp"

namespace fanfold {

std::string_view op_name(Op op) {
    switch (op) {
        case Op::constant: return "constant";
        case Op::parameter: return "parameter";
        case Op::matmul: return "matmul";
        case Op::add: return "add";
        case Op::sub: return "sub";
        case Op::mul: return "mul";
        case Op::add_row: return "add_row";
        case Op::scale: return "scale";
        case Op::add_scalar: return "add_scalar";
        case Op::exp: return "exp";
        case Op::log: return "log";
        case Op::tanh: return "tanh";
        case Op::sigmoid: return "sigmoid";
        case Op::relu: return "relu";
        case Op::clamp: return "clamp";
        case Op::sum: return "sum";
        case Op::sum_rows: return "sum_rows";
        case Op::sum_cols: return "sum_cols";
        case Op::max_rows: return "max_rows";
        case Op::concat_cols: return "concat_cols";
        case Op::slice_cols: return "slice_cols";
        case Op::transpose: return "transpose";
        case Op::cosine_distance_rows: return "cosine_distance_rows";
    }
    return "unknown";
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view what) {
    if (!a.same_shape(b)) {
        throw ContractError(std::string(what) + " shape mismatch: " + a.shape_string() + " vs " + b.shape_string());
    }
}

template <typename F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

void add_into(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

struct RowCosine {
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
};

RowCosine row_cosine(std::span<const double> a, std::span<const double> b) {
    RowCosine r;
    for (std::size_t j = 0; j < a.size(); ++j) {
        r.dot += a[j] * b[j];
        r.norm_a += a[j] * a[j];
        r.norm_b += b[j] * b[j];
    }
    r.norm_a = std::sqrt(r.norm_a);
    r.norm_b = std::sqrt(r.norm_b);
    return r;
}

}  // namespace

const Tensor& Tape::val(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
}

const Tensor& Tape::value(Var v) const {
    check(v);
    return val(v.id);
}

double Tape::scalar(Var v) const {
    const Tensor& t = value(v);
    if (t.size() != 1) throw ContractError("scalar() on non-scalar tensor of shape " + t.shape_string());
    return t[0];
}

void Tape::check(Var v) const {
    if (!v.valid() || v.id >= nodes_.size()) throw ContractError("Var does not belong to this tape");
}

Var Tape::push(Node node) {
    if (consumed_) throw ContractError("tape already consumed by backward(); record a new tape");
    nodes_.push_back(std::move(node));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::unary(Op op, Var a, Tensor value, double s0, double s1) {
    Node n;
    n.op = op;
    n.a = a.id;
    n.value = std::move(value);
    n.needs_grad = nodes_[a.id].needs_grad;
    n.s0 = s0;
    n.s1 = s1;
    return push(std::move(n));
}

Var Tape::constant(Tensor value) {
    Node n;
    n.op = Op::constant;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::constant_ref(const Tensor& value) {
    Node n;
    n.op = Op::constant;
    n.ref = &value;
    return push(std::move(n));
}

Var Tape::param(Parameter& p) {
    if (!p.grad.same_shape(p.value)) p.zero_grad();
    Node n;
    n.op = Op::parameter;
    n.ref = &p.value;
    n.param = &p;
    n.needs_grad = true;
    return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
    check(a);
    check(b);
    Node n;
    n.op = Op::matmul;
    n.a = a.id;
    n.b = b.id;
    n.value = fanfold::matmul(val(a.id), val(b.id));
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
    check(a);
    check(b);
    const Tensor& x = val(a.id);
    const Tensor& y = val(b.id);
    require_same_shape(x, y, "add");
    Tensor out = x;
    add_into(out, y);
    Node n;
    n.op = Op::add;
    n.a = a.id;
    n.b = b.id;
    n.value = std::move(out);
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    check(a);
    check(b);
    const Tensor& x = val(a.id);
    const Tensor& y = val(b.id);
    require_same_shape(x, y, "sub");
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
    Node n;
    n.op = Op::sub;
    n.a = a.id;
    n.b = b.id;
    n.value = std::move(out);
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    check(a);
    check(b);
    const Tensor& x = val(a.id);
    const Tensor& y = val(b.id);
    require_same_shape(x, y, "mul");
    Tensor out(x.rows(), x.cols());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    Node n;
    n.op = Op::mul;
    n.a = a.id;
    n.b = b.id;
    n.value = std::move(out);
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    return push(std::move(n));
}

Var Tape::add_row(Var a, Var row) {
    check(a);
    check(row);
    const Tensor& x = val(a.id);
    const Tensor& r = val(row.id);
    if (r.rows() != 1 || r.cols() != x.cols()) {
        throw ContractError("add_row expects 1x" + std::to_string(x.cols()) + " row, got " + r.shape_string());
    }
    Tensor out = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += r[j];
    Node n;
    n.op = Op::add_row;
    n.a = a.id;
    n.b = row.id;
    n.value = std::move(out);
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[row.id].needs_grad;
    return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
    check(a);
    return unary(Op::scale, a, map(val(a.id), [factor](double v) { return v * factor; }), factor);
}

Var Tape::add_scalar(Var a, double offset) {
    check(a);
    return unary(Op::add_scalar, a, map(val(a.id), [offset](double v) { return v + offset; }), offset);
}

Var Tape::exp(Var a) {
    check(a);
    return unary(Op::exp, a, map(val(a.id), [](double v) { return std::exp(v); }));
}

Var Tape::log(Var a) {
    check(a);
    return unary(Op::log, a, map(val(a.id), [](double v) { return std::log(v); }));
}

Var Tape::tanh(Var a) {
    check(a);
    return unary(Op::tanh, a, map(val(a.id), [](double v) { return std::tanh(v); }));
}

Var Tape::sigmoid(Var a) {
    check(a);
    return unary(Op::sigmoid, a, map(val(a.id), [](double v) {
                     if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
                     const double e = std::exp(v);
                     return e / (1.0 + e);
                 }));
}

Var Tape::relu(Var a) {
    check(a);
    return unary(Op::relu, a, map(val(a.id), [](double v) { return v > 0.0 ? v : 0.0; }));
}

Var Tape::clamp(Var a, double lo, double hi) {
    check(a);
    if (!(lo <= hi)) throw ContractError("clamp requires lo <= hi");
    return unary(Op::clamp, a, map(val(a.id), [lo, hi](double v) { return std::clamp(v, lo, hi); }), lo, hi);
}

Var Tape::sum(Var a) {
    check(a);
    double s = 0.0;
    for (double v : val(a.id).data()) s += v;
    return unary(Op::sum, a, Tensor(1, 1, s));
}

Var Tape::sum_rows(Var a) {
    check(a);
    const Tensor& x = val(a.id);
    Tensor out(1, x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out[j] += x(i, j);
    return unary(Op::sum_rows, a, std::move(out));
}

Var Tape::sum_cols(Var a) {
    check(a);
    const Tensor& x = val(a.id);
    Tensor out(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) out[i] += x(i, j);
    return unary(Op::sum_cols, a, std::move(out));
}

Var Tape::max_rows(Var a) {
    check(a);
    const Tensor& x = val(a.id);
    if (x.rows() == 0) throw ContractError("max_rows over zero rows");
    Tensor out(1, x.cols());
    std::vector<std::size_t> arg(x.cols(), 0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double best = x(0, j);
        for (std::size_t i = 1; i < x.rows(); ++i) {
            if (x(i, j) > best) {
                best = x(i, j);
                arg[j] = i;
            }
        }
        out[j] = best;
    }
    Var v = unary(Op::max_rows, a, std::move(out));
    nodes_[v.id].argmax = std::move(arg);
    return v;
}

Var Tape::concat_cols(Var a, Var b) {
    check(a);
    check(b);
    Node n;
    n.op = Op::concat_cols;
    n.a = a.id;
    n.b = b.id;
    n.value = hconcat(val(a.id), val(b.id));
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    return push(std::move(n));
}

Var Tape::slice_cols(Var a, std::size_t begin, std::size_t end) {
    check(a);
    Var v = unary(Op::slice_cols, a, fanfold::slice_cols(val(a.id), begin, end));
    nodes_[v.id].i0 = begin;
    return v;
}

Var Tape::transpose(Var a) {
    check(a);
    return unary(Op::transpose, a, fanfold::transpose(val(a.id)));
}

Var Tape::cosine_distance_rows(Var a, Var b) {
    check(a);
    check(b);
    const Tensor& x = val(a.id);
    const Tensor& y = val(b.id);
    require_same_shape(x, y, "cosine_distance_rows");
    Tensor out(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const RowCosine rc = row_cosine(x.row(i), y.row(i));
        if (rc.norm_a == 0.0 && rc.norm_b == 0.0) {
            out[i] = 0.0;
        } else if (rc.norm_a == 0.0 || rc.norm_b == 0.0) {
            out[i] = 0.5;
        } else {
            const double c = std::clamp(rc.dot / (rc.norm_a * rc.norm_b), -1.0, 1.0);
            out[i] = 0.5 * (1.0 - c);
        }
    }
    Node n;
    n.op = Op::cosine_distance_rows;
    n.a = a.id;
    n.b = b.id;
    n.value = std::move(out);
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    return push(std::move(n));
}

void Tape::backward(Var loss) {
    check(loss);
    if (consumed_) throw ContractError("backward() called twice on the same tape");
    if (val(loss.id).size() != 1) {
        throw ContractError("backward() requires a scalar loss, got shape " + val(loss.id).shape_string());
    }
    for (std::uint32_t i = 0; i <= loss.id; ++i) {
        if (!val(i).all_finite()) {
            throw NumericFault("non-finite value at tape node #" + std::to_string(i) + " (" +
                               std::string(op_name(nodes_[i].op)) + ")");
        }
    }
    consumed_ = true;

    std::vector<Tensor> grads(loss.id + 1);
    grads[loss.id] = Tensor(1, 1, 1.0);

    auto accumulate = [&](std::uint32_t id, Tensor&& g) {
        if (!nodes_[id].needs_grad) return;
        if (grads[id].size() == 0) {
            grads[id] = std::move(g);
        } else {
            add_into(grads[id], g);
        }
    };

    for (std::uint32_t idx = loss.id + 1; idx-- > 0;) {
        Node& n = nodes_[idx];
        if (!n.needs_grad || grads[idx].size() == 0) continue;
        Tensor g = std::move(grads[idx]);
        const Tensor& out = val(idx);

        switch (n.op) {
            case Op::constant:
                break;
            case Op::parameter:
                if (!g.all_finite()) {
                    throw NumericFault("non-finite gradient reaching parameter '" + n.param->name + "' at node #" +
                                       std::to_string(idx));
                }
                add_into(n.param->grad, g);
                break;
            case Op::matmul:
                if (nodes_[n.a].needs_grad) accumulate(n.a, matmul_nt(g, val(n.b)));
                if (nodes_[n.b].needs_grad) accumulate(n.b, matmul_tn(val(n.a), g));
                break;
            case Op::add:
                if (nodes_[n.a].needs_grad) accumulate(n.a, Tensor(g));
                accumulate(n.b, std::move(g));
                break;
            case Op::sub:
                if (nodes_[n.b].needs_grad) accumulate(n.b, map(g, [](double v) { return -v; }));
                accumulate(n.a, std::move(g));
                break;
            case Op::mul: {
                const Tensor& x = val(n.a);
                const Tensor& y = val(n.b);
                if (nodes_[n.a].needs_grad) {
                    Tensor ga(g.rows(), g.cols());
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * y[i];
                    accumulate(n.a, std::move(ga));
                }
                if (nodes_[n.b].needs_grad) {
                    Tensor gb(g.rows(), g.cols());
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] = g[i] * x[i];
                    accumulate(n.b, std::move(gb));
                }
                break;
            }
            case Op::add_row: {
                if (nodes_[n.b].needs_grad) {
                    Tensor gr(1, g.cols());
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) gr[j] += g(i, j);
                    accumulate(n.b, std::move(gr));
                }
                accumulate(n.a, std::move(g));
                break;
            }
            case Op::scale:
                accumulate(n.a, map(g, [s = n.s0](double v) { return v * s; }));
                break;
            case Op::add_scalar:
                accumulate(n.a, std::move(g));
                break;
            case Op::exp:
                for (std::size_t i = 0; i < g.size(); ++i) g[i] *= out[i];
                accumulate(n.a, std::move(g));
                break;
            case Op::log: {
                const Tensor& x = val(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) g[i] /= x[i];
                accumulate(n.a, std::move(g));
                break;
            }
            case Op::tanh:
                for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - out[i] * out[i];
                accumulate(n.a, std::move(g));
                break;
            case Op::sigmoid:
                for (std::size_t i = 0; i < g.size(); ++i) g[i] *= out[i] * (1.0 - out[i]);
                accumulate(n.a, std::move(g));
                break;
            case Op::relu:
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (!(out[i] > 0.0)) g[i] = 0.0;
                accumulate(n.a, std::move(g));
                break;
            case Op::clamp: {
                const Tensor& x = val(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (x[i] < n.s0 || x[i] > n.s1) g[i] = 0.0;
                accumulate(n.a, std::move(g));
                break;
            }
            case Op::sum: {
                const Tensor& x = val(n.a);
                accumulate(n.a, Tensor(x.rows(), x.cols(), g[0]));
                break;
            }
            case Op::sum_rows: {
                const Tensor& x = val(n.a);
                Tensor gx(x.rows(), x.cols());
                for (std::size_t i = 0; i < x.rows(); ++i)
                    for (std::size_t j = 0; j < x.cols(); ++j) gx(i, j) = g[j];
                accumulate(n.a, std::move(gx));
                break;
            }
            case Op::sum_cols: {
                const Tensor& x = val(n.a);
                Tensor gx(x.rows(), x.cols());
                for (std::size_t i = 0; i < x.rows(); ++i)
                    for (std::size_t j = 0; j < x.cols(); ++j) gx(i, j) = g[i];
                accumulate(n.a, std::move(gx));
                break;
            }
            case Op::max_rows: {
                const Tensor& x = val(n.a);
                Tensor gx(x.rows(), x.cols());
                for (std::size_t j = 0; j < x.cols(); ++j) gx(n.argmax[j], j) = g[j];
                accumulate(n.a, std::move(gx));
                break;
            }
            case Op::concat_cols: {
                const std::size_t left = val(n.a).cols();
                if (nodes_[n.a].needs_grad) accumulate(n.a, fanfold::slice_cols(g, 0, left));
                if (nodes_[n.b].needs_grad) accumulate(n.b, fanfold::slice_cols(g, left, g.cols()));
                break;
            }
            case Op::slice_cols: {
                const Tensor& x = val(n.a);
                Tensor gx(x.rows(), x.cols());
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) gx(i, n.i0 + j) = g(i, j);
                accumulate(n.a, std::move(gx));
                break;
            }
            case Op::transpose:
                accumulate(n.a, fanfold::transpose(g));
                break;
            case Op::cosine_distance_rows: {
                const Tensor& x = val(n.a);
                const Tensor& y = val(n.b);
                Tensor gx(x.rows(), x.cols());
                Tensor gy(y.rows(), y.cols());
                for (std::size_t i = 0; i < x.rows(); ++i) {
                    const RowCosine rc = row_cosine(x.row(i), y.row(i));
                    if (rc.norm_a == 0.0 || rc.norm_b == 0.0) continue;
                    const double inv = 1.0 / (rc.norm_a * rc.norm_b);
                    const double c = rc.dot * inv;
                    // d/dx of (1 - c)/2 = -(y/(|x||y|) - c x/|x|^2) / 2
                    for (std::size_t j = 0; j < x.cols(); ++j) {
                        gx(i, j) = -0.5 * g[i] * (y(i, j) * inv - c * x(i, j) / (rc.norm_a * rc.norm_a));
                        gy(i, j) = -0.5 * g[i] * (x(i, j) * inv - c * y(i, j) / (rc.norm_b * rc.norm_b));
                    }
                }
                if (nodes_[n.a].needs_grad) accumulate(n.a, std::move(gx));
                if (nodes_[n.b].needs_grad) accumulate(n.b, std::move(gy));
                break;
            }
        }
    }
}

}  // namespace fanfold
