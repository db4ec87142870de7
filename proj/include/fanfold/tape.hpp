#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fanfold/tensor.hpp"

namespace fanfold {

// Handle to a node recorded on a Tape.
struct Var {
    std::uint32_t id = UINT32_MAX;
    bool valid() const { return id != UINT32_MAX; }
};

enum class Op : std::uint8_t {
    constant,
    parameter,
    matmul,
    add,
    sub,
    mul,
    add_row,
    scale,
    add_scalar,
    exp,
    log,
    tanh,
    sigmoid,
    relu,
    clamp,
    sum,
    sum_rows,
    sum_cols,
    max_rows,
    concat_cols,
    slice_cols,
    transpose,
    cosine_distance_rows,
};

std::string_view op_name(Op op);

// Records one forward pass in topological order (a node's inputs always have
// smaller ids) and replays it backwards once. Gradients of Parameter leaves
// accumulate into Parameter::grad; callers zero them between steps.
//
// A Tape is single-use: backward() may be called at most once. Build a fresh
// tape for every optimizer step.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    // Borrowed constant; `value` must outlive the tape.
    Var constant_ref(const Tensor& value);
    Var param(Parameter& p);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    // a (r×c) + row (1×c) broadcast over rows
    Var add_row(Var a, Var row);
    Var scale(Var a, double factor);
    Var add_scalar(Var a, double offset);
    Var exp(Var a);
    Var log(Var a);
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var relu(Var a);
    // Zero gradient outside [lo, hi].
    Var clamp(Var a, double lo, double hi);
    // 1×1 total
    Var sum(Var a);
    // 1×c column totals
    Var sum_rows(Var a);
    // r×1 row totals
    Var sum_cols(Var a);
    // 1×c columnwise max; ties go to the lowest row index
    Var max_rows(Var a);
    Var concat_cols(Var a, Var b);
    Var slice_cols(Var a, std::size_t begin, std::size_t end);
    Var transpose(Var a);
    // r×1 of (1 - cos(a_i, b_i)) / 2; 0 if both rows are zero, 0.5 if exactly one is
    Var cosine_distance_rows(Var a, Var b);

    const Tensor& value(Var v) const;
    double scalar(Var v) const;
    Op op(Var v) const { return nodes_.at(v.id).op; }
    std::size_t size() const { return nodes_.size(); }

    void backward(Var loss);

private:
    struct Node {
        Op op = Op::constant;
        std::uint32_t a = UINT32_MAX;
        std::uint32_t b = UINT32_MAX;
        Tensor value;
        const Tensor* ref = nullptr;
        Parameter* param = nullptr;
        bool needs_grad = false;
        double s0 = 0.0;
        double s1 = 0.0;
        std::size_t i0 = 0;
        std::vector<std::size_t> argmax;
    };

    const Tensor& val(std::uint32_t id) const;
    void check(Var v) const;
    Var push(Node node);
    Var unary(Op op, Var a, Tensor value, double s0 = 0.0, double s1 = 0.0);

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace fanfold
