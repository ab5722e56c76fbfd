#include "rg/numerics/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "rg/error.hpp"

namespace rg::num {
namespace {

using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

MapC view(const Tensor& t) { return MapC(t.data().data(), t.rows(), t.cols()); }
Map view(Tensor& t) { return Map(t.data().data(), t.rows(), t.cols()); }

Tape& tape_of(Var a) {
  require(a.valid(), ErrorKind::kInvalidArgument, "primitive applied to an unbound Var");
  return *a.tape();
}

void same_shape(const char* op, Var a, Var b) {
  require(a.shape() == b.shape(), ErrorKind::kDimensionMismatch,
          std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
              shape_str(b.shape()));
}

template <typename F, typename D>
Var unary(const char* op, Var a, F f, D dfdx) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = f(x[i]);
  return tape_of(a).record(op, std::move(y), {a}, [dfdx](const BackwardArgs& args) {
    const Tensor& x = *args.in[0];
    Tensor& gx = *args.grad_in[0];
    for (std::size_t i = 0; i < x.numel(); ++i) gx[i] += args.grad_out[i] * dfdx(x[i], args.out[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  same_shape("add", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] += b.value()[i];
  return tape_of(a).record("add", std::move(y), {a, b}, [](const BackwardArgs& args) {
    for (Tensor* g : args.grad_in) {
      if (g == nullptr) continue;
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += args.grad_out[i];
    }
  });
}

Var sub(Var a, Var b) {
  same_shape("sub", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] -= b.value()[i];
  return tape_of(a).record("sub", std::move(y), {a, b}, [](const BackwardArgs& args) {
    if (Tensor* g = args.grad_in[0]) {
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += args.grad_out[i];
    }
    if (Tensor* g = args.grad_in[1]) {
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] -= args.grad_out[i];
    }
  });
}

Var mul(Var a, Var b) {
  same_shape("mul", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] *= b.value()[i];
  return tape_of(a).record("mul", std::move(y), {a, b}, [](const BackwardArgs& args) {
    const Tensor& x0 = *args.in[0];
    const Tensor& x1 = *args.in[1];
    if (Tensor* g = args.grad_in[0]) {
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += args.grad_out[i] * x1[i];
    }
    if (Tensor* g = args.grad_in[1]) {
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += args.grad_out[i] * x0[i];
    }
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, Scalar c) {
  return unary(
      "scale", a, [c](Scalar x) { return c * x; }, [c](Scalar, Scalar) { return c; });
}

Var add_scalar(Var a, Scalar c) {
  return unary(
      "add_scalar", a, [c](Scalar x) { return x + c; }, [](Scalar, Scalar) { return 1.0; });
}

Var matmul(Var a, Var b) {
  require(a.cols() == b.rows(), ErrorKind::kDimensionMismatch,
          "matmul: inner dimensions differ " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  Tensor y({a.rows(), b.cols()});
  view(y).noalias() = view(a.value()) * view(b.value());
  return tape_of(a).record("matmul", std::move(y), {a, b}, [](const BackwardArgs& args) {
    MapC g = view(args.grad_out);
    if (Tensor* ga = args.grad_in[0]) view(*ga).noalias() += g * view(*args.in[1]).transpose();
    if (Tensor* gb = args.grad_in[1]) view(*gb).noalias() += view(*args.in[0]).transpose() * g;
  });
}

Var affine(Var x, Var w, Var b) {
  require(x.cols() == w.rows(), ErrorKind::kDimensionMismatch,
          "affine: input " + shape_str(x.shape()) + " vs weight " + shape_str(w.shape()));
  require(b.rows() == 1 && b.cols() == w.cols(), ErrorKind::kDimensionMismatch,
          "affine: bias " + shape_str(b.shape()) + " vs weight " + shape_str(w.shape()));
  Tensor y({x.rows(), w.cols()});
  Map ym = view(y);
  ym.noalias() = view(x.value()) * view(w.value());
  ym.rowwise() += view(b.value()).row(0);
  return tape_of(x).record("affine", std::move(y), {x, w, b}, [](const BackwardArgs& args) {
    MapC g = view(args.grad_out);
    if (Tensor* gx = args.grad_in[0]) view(*gx).noalias() += g * view(*args.in[1]).transpose();
    if (Tensor* gw = args.grad_in[1]) view(*gw).noalias() += view(*args.in[0]).transpose() * g;
    if (Tensor* gb = args.grad_in[2]) view(*gb).row(0) += g.colwise().sum();
  });
}

Var tanh(Var a) {
  return unary(
      "tanh", a, [](Scalar x) { return std::tanh(x); },
      [](Scalar, Scalar y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      "sigmoid", a, [](Scalar x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](Scalar, Scalar y) { return y * (1.0 - y); });
}

Var relu(Var a) {
  return unary(
      "relu", a, [](Scalar x) { return x > 0.0 ? x : 0.0; },
      [](Scalar x, Scalar) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary(
      "exp", a, [](Scalar x) { return std::exp(x); }, [](Scalar, Scalar y) { return y; });
}

Var log(Var a) {
  return unary(
      "log", a, [](Scalar x) { return std::log(x); }, [](Scalar x, Scalar) { return 1.0 / x; });
}

Var square(Var a) {
  return unary(
      "square", a, [](Scalar x) { return x * x; }, [](Scalar x, Scalar) { return 2.0 * x; });
}

Var clamp(Var a, Scalar lo, Scalar hi) {
  return unary(
      "clamp", a, [lo, hi](Scalar x) { return x < lo ? lo : (x > hi ? hi : x); },
      [lo, hi](Scalar x, Scalar) { return (x < lo || x > hi) ? 0.0 : 1.0; });
}

Var sum(Var a) {
  Scalar s = 0.0;
  for (Scalar v : a.value().data()) s += v;
  return tape_of(a).record("sum", Tensor::scalar(s), {a}, [](const BackwardArgs& args) {
    Tensor& g = *args.grad_in[0];
    const Scalar go = args.grad_out[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += go;
  });
}

Var mean(Var a) {
  const auto n = static_cast<Scalar>(a.value().numel());
  return scale(sum(a), 1.0 / n);
}

Var sum_cols(Var a) {
  const Tensor& x = a.value();
  Tensor y({x.rows(), 1});
  view(y).col(0) = view(x).rowwise().sum();
  return tape_of(a).record("sum_cols", std::move(y), {a}, [](const BackwardArgs& args) {
    Map g = view(*args.grad_in[0]);
    g.colwise() += view(args.grad_out).col(0);
  });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), ErrorKind::kInvalidArgument, "concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    require(p.rows() == rows, ErrorKind::kDimensionMismatch, "concat_cols: row counts differ");
    cols += p.cols();
  }
  Tensor y({rows, cols});
  std::size_t off = 0;
  for (const Var& p : parts) {
    view(y).middleCols(off, p.cols()) = view(p.value());
    off += p.cols();
  }
  return tape_of(parts[0]).record(
      "concat_cols", std::move(y), std::vector<Var>(parts.begin(), parts.end()),
      [](const BackwardArgs& args) {
        std::size_t off = 0;
        MapC g = view(args.grad_out);
        for (std::size_t k = 0; k < args.in.size(); ++k) {
          const std::size_t c = args.in[k]->cols();
          if (Tensor* gk = args.grad_in[k]) view(*gk) += g.middleCols(off, c);
          off += c;
        }
      });
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), ErrorKind::kInvalidArgument, "concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    require(p.cols() == cols, ErrorKind::kDimensionMismatch, "concat_rows: column counts differ");
    rows += p.rows();
  }
  Tensor y({rows, cols});
  std::size_t off = 0;
  for (const Var& p : parts) {
    view(y).middleRows(off, p.rows()) = view(p.value());
    off += p.rows();
  }
  return tape_of(parts[0]).record(
      "concat_rows", std::move(y), std::vector<Var>(parts.begin(), parts.end()),
      [](const BackwardArgs& args) {
        std::size_t off = 0;
        MapC g = view(args.grad_out);
        for (std::size_t k = 0; k < args.in.size(); ++k) {
          const std::size_t r = args.in[k]->rows();
          if (Tensor* gk = args.grad_in[k]) view(*gk) += g.middleRows(off, r);
          off += r;
        }
      });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  require(count > 0 && begin + count <= a.cols(), ErrorKind::kDimensionMismatch,
          "slice_cols: range out of bounds for " + shape_str(a.shape()));
  Tensor y({a.rows(), count});
  view(y) = view(a.value()).middleCols(begin, count);
  return tape_of(a).record("slice_cols", std::move(y), {a}, [begin, count](const BackwardArgs& args) {
    view(*args.grad_in[0]).middleCols(begin, count) += view(args.grad_out);
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  require(count > 0 && begin + count <= a.rows(), ErrorKind::kDimensionMismatch,
          "slice_rows: range out of bounds for " + shape_str(a.shape()));
  Tensor y({count, a.cols()});
  view(y) = view(a.value()).middleRows(begin, count);
  return tape_of(a).record("slice_rows", std::move(y), {a}, [begin, count](const BackwardArgs& args) {
    view(*args.grad_in[0]).middleRows(begin, count) += view(args.grad_out);
  });
}

Var broadcast_rows(Var a, std::size_t m) {
  require(a.rows() == 1, ErrorKind::kDimensionMismatch, "broadcast_rows: input must have one row");
  Tensor y({m, a.cols()});
  view(y).rowwise() = view(a.value()).row(0);
  return tape_of(a).record("broadcast_rows", std::move(y), {a}, [](const BackwardArgs& args) {
    view(*args.grad_in[0]).row(0) += view(args.grad_out).colwise().sum();
  });
}

Var integrate_motion(Var content, Var motion, std::size_t ref, std::size_t frames) {
  const std::size_t batch = content.rows();
  const std::size_t px = content.cols();
  require(frames >= 2 && ref < frames, ErrorKind::kInvalidArgument,
          "integrate_motion: reference index out of range");
  require(motion.rows() == batch && motion.cols() == (frames - 1) * px,
          ErrorKind::kDimensionMismatch,
          "integrate_motion: motion " + shape_str(motion.shape()) + " does not match content " +
              shape_str(content.shape()));
  Tensor y({batch, frames * px});
  const Tensor& c = content.value();
  const Tensor& v = motion.value();
  for (std::size_t b = 0; b < batch; ++b) {
    Scalar* out = &y.at(b, 0);
    const Scalar* cb = &c.at(b, 0);
    const Scalar* vb = &v.at(b, 0);
    for (std::size_t p = 0; p < px; ++p) out[ref * px + p] = cb[p];
    for (std::size_t i = ref + 1; i < frames; ++i) {
      for (std::size_t p = 0; p < px; ++p) {
        out[i * px + p] = out[(i - 1) * px + p] + vb[(i - 1) * px + p];
      }
    }
    for (std::size_t i = ref; i-- > 0;) {
      for (std::size_t p = 0; p < px; ++p) {
        out[i * px + p] = out[(i + 1) * px + p] - vb[i * px + p];
      }
    }
  }
  return tape_of(content).record(
      "integrate_motion", std::move(y), {content, motion},
      [batch, px, ref, frames](const BackwardArgs& args) {
        const Tensor& g = args.grad_out;
        Tensor* gc = args.grad_in[0];
        Tensor* gv = args.grad_in[1];
        std::vector<Scalar> acc(px);
        for (std::size_t b = 0; b < batch; ++b) {
          const Scalar* gb = &g.at(b, 0);
          if (gc != nullptr) {
            Scalar* out = &gc->at(b, 0);
            for (std::size_t i = 0; i < frames; ++i) {
              for (std::size_t p = 0; p < px; ++p) out[p] += gb[i * px + p];
            }
          }
          if (gv == nullptr) continue;
          Scalar* out = &gv->at(b, 0);
          // v_k for k >= ref feeds frames k+1..T-1 with +1.
          std::fill(acc.begin(), acc.end(), 0.0);
          for (std::size_t k = frames - 1; k-- > ref;) {
            for (std::size_t p = 0; p < px; ++p) {
              acc[p] += gb[(k + 1) * px + p];
              out[k * px + p] += acc[p];
            }
          }
          // v_k for k < ref feeds frames 0..k with -1.
          std::fill(acc.begin(), acc.end(), 0.0);
          for (std::size_t k = 0; k < ref; ++k) {
            for (std::size_t p = 0; p < px; ++p) {
              acc[p] += gb[k * px + p];
              out[k * px + p] -= acc[p];
            }
          }
        }
      });
}

Var select_blocks(Var a, std::size_t block, std::span<const std::size_t> idx) {
  require(idx.size() == a.rows(), ErrorKind::kDimensionMismatch,
          "select_blocks: one index per row required");
  require(block > 0 && a.cols() % block == 0, ErrorKind::kDimensionMismatch,
          "select_blocks: block width does not divide row width");
  const std::size_t nblocks = a.cols() / block;
  for (std::size_t i : idx) {
    require(i < nblocks, ErrorKind::kInvalidArgument, "select_blocks: block index out of range");
  }
  Tensor y({a.rows(), block});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    view(y).row(r) = view(a.value()).row(r).segment(idx[r] * block, block);
  }
  std::vector<std::size_t> picks(idx.begin(), idx.end());
  return tape_of(a).record("select_blocks", std::move(y), {a},
                           [block, picks](const BackwardArgs& args) {
                             Map g = view(*args.grad_in[0]);
                             MapC go = view(args.grad_out);
                             for (std::size_t r = 0; r < picks.size(); ++r) {
                               g.row(r).segment(picks[r] * block, block) += go.row(r);
                             }
                           });
}

}  // namespace rg::num
