#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rg/numerics/tape.hpp"

// Differentiable primitives over tape-recorded values. Tensors are treated as
// 2-D [rows, cols] (a 1-D tensor is one row). Binary elementwise ops require
// identical shapes; broadcasting is explicit via broadcast_rows().
namespace rg::num {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, Scalar c);
Var add_scalar(Var a, Scalar c);

// [m,k] x [k,n] -> [m,n]
Var matmul(Var a, Var b);
// x W + b with x [m,k], W [k,n], b [1,n] broadcast over rows.
Var affine(Var x, Var w, Var b);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
// Gradient is zero where the input lies outside [lo, hi].
Var clamp(Var a, Scalar lo, Scalar hi);

// Reductions to a [1] scalar.
Var sum(Var a);
Var mean(Var a);
// Per-row sums: [m,n] -> [m,1].
Var sum_cols(Var a);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
// [1,n] -> [m,n]
Var broadcast_rows(Var a, std::size_t m);

// Per-row frame recursion. `content` is [B,P]; `motion` is [B,(T-1)P] holding
// frame differences v_k = f_{k+1} - f_k. Returns [B,T*P] with frame `ref`
// (0-based) equal to content, later frames by cumulative addition and earlier
// frames by cumulative subtraction.
Var integrate_motion(Var content, Var motion, std::size_t ref, std::size_t frames);

// Per-row block selection: row b of the result is block idx[b] (width
// `block`) of row b of `a`.
Var select_blocks(Var a, std::size_t block, std::span<const std::size_t> idx);

}  // namespace rg::num
