#include "pbci/nn/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace pbci::nn {
namespace {

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <class T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

struct ConvGeometry {
  std::size_t n, cin, h, w;
  std::size_t cout, kh, kw;
  std::size_t sh, sw;
  std::size_t ho, wo;

  [[nodiscard]] std::size_t patch() const { return cin * kh * kw; }
  [[nodiscard]] std::size_t positions() const { return ho * wo; }
  // The input slice of one sample is already the column matrix when every
  // window spans the full height and a single column.
  [[nodiscard]] bool input_is_columns() const { return kh == h && kw == 1 && sw == 1; }
};

template <class T>
void im2col(const ConvGeometry& g, const T* in, T* col) {
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        T* row = col + ((ci * g.kh + ky) * g.kw + kx) * g.positions();
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const T* src = in + (ci * g.h + oy * g.sh + ky) * g.w + kx;
          T* dst = row + oy * g.wo;
          if (g.sw == 1) {
            std::copy(src, src + g.wo, dst);
          } else {
            for (std::size_t ox = 0; ox < g.wo; ++ox) dst[ox] = src[ox * g.sw];
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const ConvGeometry& g, const T* col, T* in) {
  for (std::size_t ci = 0; ci < g.cin; ++ci) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const T* row = col + ((ci * g.kh + ky) * g.kw + kx) * g.positions();
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          T* dst = in + (ci * g.h + oy * g.sh + ky) * g.w + kx;
          const T* src = row + oy * g.wo;
          for (std::size_t ox = 0; ox < g.wo; ++ox) dst[ox * g.sw] += src[ox];
        }
      }
    }
  }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

template <class T>
Var conv2d(Tape<T>& tape, Var input, Var weight, std::optional<Var> bias, Stride2 stride) {
  const auto& x = tape.value(input);
  const auto& w = tape.value(weight);
  require(x.rank() == 4, "conv2d: input must be [N,Cin,H,W], got " + shape_string(x.shape()));
  require(w.rank() == 4, "conv2d: weight must be [Cout,Cin,kH,kW], got " + shape_string(w.shape()));
  require(x.dim(1) == w.dim(1), "conv2d: channel mismatch between input " + shape_string(x.shape()) +
                                    " and weight " + shape_string(w.shape()));
  require(w.dim(2) <= x.dim(2) && w.dim(3) <= x.dim(3), "conv2d: kernel larger than input");
  require(stride.h > 0 && stride.w > 0, "conv2d: stride must be positive");
  if (bias) {
    require(tape.value(*bias).size() == w.dim(0), "conv2d: bias length must equal Cout");
  }

  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), w.dim(3), stride.h, stride.w, 0, 0};
  g.ho = valid_extent(g.h, g.kh, g.sh);
  g.wo = valid_extent(g.w, g.kw, g.sw);

  const std::size_t K = g.patch();
  const std::size_t P = g.positions();
  const std::size_t in_stride = g.cin * g.h * g.w;
  const std::size_t out_stride = g.cout * P;

  Tensor<T> out(Shape{g.n, g.cout, g.ho, g.wo});
  AlignedVector<T> col(g.input_is_columns() ? 0 : K * P);
  ConstMatrixMap<T> W(w.data(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(K));
  for (std::size_t n = 0; n < g.n; ++n) {
    const T* cols = x.data() + n * in_stride;
    if (!g.input_is_columns()) {
      im2col(g, cols, col.data());
      cols = col.data();
    }
    ConstMatrixMap<T> C(cols, static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
    MatrixMap<T> Y(out.data() + n * out_stride, static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(P));
    Y.noalias() = W * C;
    if (bias) {
      const auto& b = tape.value(*bias);
      for (std::size_t c = 0; c < g.cout; ++c) Y.row(static_cast<Eigen::Index>(c)).array() += b[c];
    }
  }

  auto backward = [input, weight, bias, g](Tape<T>& t, std::size_t self) {
    const std::size_t K = g.patch();
    const std::size_t P = g.positions();
    const std::size_t in_stride = g.cin * g.h * g.w;
    const std::size_t out_stride = g.cout * P;
    const auto& gout = t.grad_of(self);
    const auto& x = t.value(input);
    const auto& w = t.value(weight);
    const bool need_w = t.requires_grad(weight);
    const bool need_x = t.requires_grad(input);
    const bool need_b = bias && t.requires_grad(*bias);

    ConstMatrixMap<T> W(w.data(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(K));
    AlignedVector<T> col((need_w && !g.input_is_columns()) ? K * P : 0);
    AlignedVector<T> gcol(need_x ? K * P : 0);
    for (std::size_t n = 0; n < g.n; ++n) {
      ConstMatrixMap<T> GY(gout.data() + n * out_stride, static_cast<Eigen::Index>(g.cout),
                           static_cast<Eigen::Index>(P));
      if (need_w) {
        const T* cols = x.data() + n * in_stride;
        if (!g.input_is_columns()) {
          im2col(g, cols, col.data());
          cols = col.data();
        }
        ConstMatrixMap<T> C(cols, static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
        MatrixMap<T> GW(t.grad(weight).data(), static_cast<Eigen::Index>(g.cout), static_cast<Eigen::Index>(K));
        GW.noalias() += GY * C.transpose();
      }
      if (need_b) {
        auto& gb = t.grad(*bias);
        for (std::size_t c = 0; c < g.cout; ++c) gb[c] += GY.row(static_cast<Eigen::Index>(c)).sum();
      }
      if (need_x) {
        T* gx = t.grad(input).data() + n * in_stride;
        if (g.input_is_columns()) {
          MatrixMap<T> GX(gx, static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
          GX.noalias() += W.transpose() * GY;
        } else {
          MatrixMap<T> GC(gcol.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
          GC.noalias() = W.transpose() * GY;
          col2im_add(g, gcol.data(), gx);
        }
      }
    }
  };
  if (bias) return tape.record("conv2d", std::move(out), {input, weight, *bias}, backward);
  return tape.record("conv2d", std::move(out), {input, weight}, backward);
}

template <class T>
Var factorized_conv(Tape<T>& tape, Var input, Var temporal, Var temporal_bias, Var spatial) {
  const auto& x = tape.value(input);
  const auto& wt = tape.value(temporal);
  const auto& bt = tape.value(temporal_bias);
  const auto& ws = tape.value(spatial);
  require(x.rank() == 4 && x.dim(1) == 1, "factorized_conv: input must be [N,1,C,T], got " + shape_string(x.shape()));
  require(wt.rank() == 4 && wt.dim(1) == 1 && wt.dim(2) == 1,
          "factorized_conv: temporal weight must be [F1,1,1,K], got " + shape_string(wt.shape()));
  require(ws.rank() == 4 && ws.dim(3) == 1,
          "factorized_conv: spatial weight must be [F2,F1,C,1], got " + shape_string(ws.shape()));
  require(ws.dim(1) == wt.dim(0), "factorized_conv: spatial input filters must equal temporal filters");
  require(ws.dim(2) == x.dim(2), "factorized_conv: spatial kernel height must equal input channels");
  require(bt.size() == wt.dim(0), "factorized_conv: temporal bias length must equal F1");
  require(wt.dim(3) <= x.dim(3), "factorized_conv: kernel larger than input");

  const std::size_t N = x.dim(0), C = x.dim(2), Tn = x.dim(3);
  const std::size_t F1 = wt.dim(0), K = wt.dim(3), F2 = ws.dim(0);
  const std::size_t To = Tn - K + 1;

  // Combined kernel [F2, C*K] and bias [F2], accumulated in double.
  auto combined = std::make_shared<AlignedVector<T>>(F2 * C * K);
  std::vector<double> acc(C * K);
  std::vector<T> cbias(F2);
  for (std::size_t f2 = 0; f2 < F2; ++f2) {
    std::fill(acc.begin(), acc.end(), 0.0);
    double b = 0.0;
    for (std::size_t f1 = 0; f1 < F1; ++f1) {
      for (std::size_t c = 0; c < C; ++c) {
        const double s = ws[(f2 * F1 + f1) * C + c];
        b += s * bt[f1];
        for (std::size_t k = 0; k < K; ++k) acc[c * K + k] += s * wt[f1 * K + k];
      }
    }
    for (std::size_t i = 0; i < C * K; ++i) (*combined)[f2 * C * K + i] = static_cast<T>(acc[i]);
    cbias[f2] = static_cast<T>(b);
  }

  ConvGeometry g{N, 1, C, Tn, F2, C, K, 1, 1, 1, To};
  const std::size_t P = To;
  Tensor<T> out(Shape{N, F2, 1, To});
  AlignedVector<T> col(C * K * P);
  ConstMatrixMap<T> W(combined->data(), static_cast<Eigen::Index>(F2), static_cast<Eigen::Index>(C * K));
  for (std::size_t n = 0; n < N; ++n) {
    im2col(g, x.data() + n * C * Tn, col.data());
    ConstMatrixMap<T> Col(col.data(), static_cast<Eigen::Index>(C * K), static_cast<Eigen::Index>(P));
    MatrixMap<T> Y(out.data() + n * F2 * P, static_cast<Eigen::Index>(F2), static_cast<Eigen::Index>(P));
    Y.noalias() = W * Col;
    for (std::size_t f = 0; f < F2; ++f) Y.row(static_cast<Eigen::Index>(f)).array() += cbias[f];
  }

  auto backward = [input, temporal, temporal_bias, spatial, combined, g](Tape<T>& t, std::size_t self) {
    const std::size_t N = g.n, C = g.h, Tn = g.w, K = g.kw, P = g.wo, F2 = g.cout;
    const auto& gy = t.grad_of(self);
    const auto& x = t.value(input);
    const auto& wt = t.value(temporal);
    const auto& bt = t.value(temporal_bias);
    const auto& ws = t.value(spatial);
    const std::size_t F1 = wt.dim(0);

    RowMatrix<T> gw = RowMatrix<T>::Zero(static_cast<Eigen::Index>(F2), static_cast<Eigen::Index>(C * K));
    std::vector<double> gb(F2, 0.0);
    AlignedVector<T> col(C * K * P);
    const bool need_x = t.requires_grad(input);
    ConstMatrixMap<T> W(combined->data(), static_cast<Eigen::Index>(F2), static_cast<Eigen::Index>(C * K));
    for (std::size_t n = 0; n < N; ++n) {
      ConstMatrixMap<T> GY(gy.data() + n * F2 * P, static_cast<Eigen::Index>(F2), static_cast<Eigen::Index>(P));
      im2col(g, x.data() + n * C * Tn, col.data());
      ConstMatrixMap<T> Col(col.data(), static_cast<Eigen::Index>(C * K), static_cast<Eigen::Index>(P));
      gw.noalias() += GY * Col.transpose();
      for (std::size_t f = 0; f < F2; ++f) gb[f] += GY.row(static_cast<Eigen::Index>(f)).sum();
      if (need_x) {
        RowMatrix<T> gcol = W.transpose() * GY;
        col2im_add(g, gcol.data(), t.grad(input).data() + n * C * Tn);
      }
    }

    // Chain the combined-kernel gradient back to both factors.
    if (t.requires_grad(spatial)) {
      auto& gs = t.grad(spatial);
      for (std::size_t f2 = 0; f2 < F2; ++f2) {
        for (std::size_t f1 = 0; f1 < F1; ++f1) {
          for (std::size_t c = 0; c < C; ++c) {
            double a = gb[f2] * bt[f1];
            for (std::size_t k = 0; k < K; ++k) a += gw(static_cast<Eigen::Index>(f2), static_cast<Eigen::Index>(c * K + k)) * wt[f1 * K + k];
            gs[(f2 * F1 + f1) * C + c] += static_cast<T>(a);
          }
        }
      }
    }
    const bool need_wt = t.requires_grad(temporal);
    const bool need_bt = t.requires_grad(temporal_bias);
    if (need_wt || need_bt) {
      std::vector<double> gwt(F1 * K, 0.0), gbt(F1, 0.0);
      for (std::size_t f2 = 0; f2 < F2; ++f2) {
        for (std::size_t f1 = 0; f1 < F1; ++f1) {
          for (std::size_t c = 0; c < C; ++c) {
            const double s = ws[(f2 * F1 + f1) * C + c];
            gbt[f1] += gb[f2] * s;
            for (std::size_t k = 0; k < K; ++k) gwt[f1 * K + k] += s * gw(static_cast<Eigen::Index>(f2), static_cast<Eigen::Index>(c * K + k));
          }
        }
      }
      if (need_wt) {
        auto& g_wt = t.grad(temporal);
        for (std::size_t i = 0; i < F1 * K; ++i) g_wt[i] += static_cast<T>(gwt[i]);
      }
      if (need_bt) {
        auto& g_bt = t.grad(temporal_bias);
        for (std::size_t i = 0; i < F1; ++i) g_bt[i] += static_cast<T>(gbt[i]);
      }
    }
  };
  return tape.record("factorized_conv", std::move(out), {input, temporal, temporal_bias, spatial}, backward);
}

template <class T>
Var batchnorm(Tape<T>& tape, Var input, Var gamma, Var beta, BatchNormState<T>& state, Mode mode,
              double momentum, double eps) {
  const auto& x = tape.value(input);
  require(x.rank() == 4, "batchnorm: input must be [N,C,H,W], got " + shape_string(x.shape()));
  const std::size_t N = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  require(tape.value(gamma).size() == C && tape.value(beta).size() == C,
          "batchnorm: gamma/beta length must equal C");
  require(state.running_mean.size() == C && state.running_var.size() == C,
          "batchnorm: running statistics length must equal C");
  const std::size_t m = N * HW;
  if (mode == Mode::train) require(m > 1, "batchnorm: zero batch (need N*H*W > 1 in train mode)");
  require(m > 0, "batchnorm: zero batch");

  const auto& gm = tape.value(gamma);
  const auto& bt = tape.value(beta);
  auto xhat = std::make_shared<Tensor<T>>(x.shape());
  auto inv_std = std::make_shared<std::vector<double>>(C);
  Tensor<T> out(x.shape());

  for (std::size_t c = 0; c < C; ++c) {
    double mean = 0.0, var = 0.0;
    if (mode == Mode::train) {
      for (std::size_t n = 0; n < N; ++n) {
        const T* p = x.data() + (n * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) mean += p[i];
      }
      mean /= static_cast<double>(m);
      for (std::size_t n = 0; n < N; ++n) {
        const T* p = x.data() + (n * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) {
          const double d = p[i] - mean;
          var += d * d;
        }
      }
      var /= static_cast<double>(m);
      const double unbiased = var * static_cast<double>(m) / static_cast<double>(m - 1);
      state.running_mean[c] = static_cast<T>((1.0 - momentum) * state.running_mean[c] + momentum * mean);
      state.running_var[c] = static_cast<T>((1.0 - momentum) * state.running_var[c] + momentum * unbiased);
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[c] = is;
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t off = (n * C + c) * HW;
      for (std::size_t i = 0; i < HW; ++i) {
        const double h = (x[off + i] - mean) * is;
        (*xhat)[off + i] = static_cast<T>(h);
        out[off + i] = static_cast<T>(gm[c] * h + bt[c]);
      }
    }
  }

  auto backward = [input, gamma, beta, xhat, inv_std, mode, N, C, HW](Tape<T>& t, std::size_t self) {
    const auto& gy = t.grad_of(self);
    const auto& gm = t.value(gamma);
    const double m = static_cast<double>(N * HW);
    for (std::size_t c = 0; c < C; ++c) {
      double sum_g = 0.0, sum_gx = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const std::size_t off = (n * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) {
          sum_g += gy[off + i];
          sum_gx += static_cast<double>(gy[off + i]) * (*xhat)[off + i];
        }
      }
      if (t.requires_grad(gamma)) t.grad(gamma)[c] += static_cast<T>(sum_gx);
      if (t.requires_grad(beta)) t.grad(beta)[c] += static_cast<T>(sum_g);
      if (!t.requires_grad(input)) continue;
      auto& gx = t.grad(input);
      const double scale = gm[c] * (*inv_std)[c];
      for (std::size_t n = 0; n < N; ++n) {
        const std::size_t off = (n * C + c) * HW;
        for (std::size_t i = 0; i < HW; ++i) {
          if (mode == Mode::train) {
            gx[off + i] += static_cast<T>(scale * (gy[off + i] - sum_g / m - (*xhat)[off + i] * sum_gx / m));
          } else {
            gx[off + i] += static_cast<T>(scale * gy[off + i]);
          }
        }
      }
    }
  };
  return tape.record("batchnorm", std::move(out), {input, gamma, beta}, backward);
}

template <class T>
Var square(Tape<T>& tape, Var input) {
  const auto& x = tape.value(input);
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * x[i];
  return tape.record("square", std::move(out), {input}, [input](Tape<T>& t, std::size_t self) {
    const auto& gy = t.grad_of(self);
    const auto& x = t.value(input);
    auto& gx = t.grad(input);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += T{2} * x[i] * gy[i];
  });
}

template <class T>
Var log_clamped(Tape<T>& tape, Var input, double clamp) {
  const auto& x = tape.value(input);
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<T>(std::log(std::max(static_cast<double>(x[i]), clamp)));
  }
  return tape.record("log_clamped", std::move(out), {input}, [input, clamp](Tape<T>& t, std::size_t self) {
    const auto& gy = t.grad_of(self);
    const auto& x = t.value(input);
    auto& gx = t.grad(input);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (static_cast<double>(x[i]) > clamp) gx[i] += gy[i] / x[i];
    }
  });
}

template <class T>
Var avg_pool(Tape<T>& tape, Var input, std::size_t kernel_w, std::size_t stride_w) {
  const auto& x = tape.value(input);
  require(x.rank() == 4, "avg_pool: input must be [N,C,H,W], got " + shape_string(x.shape()));
  require(kernel_w >= 1 && stride_w >= 1, "avg_pool: kernel and stride must be positive");
  require(kernel_w <= x.dim(3), "avg_pool: kernel larger than input");
  const std::size_t rows = x.dim(0) * x.dim(1) * x.dim(2);
  const std::size_t W = x.dim(3);
  const std::size_t Wo = valid_extent(W, kernel_w, stride_w);
  Tensor<T> out(Shape{x.dim(0), x.dim(1), x.dim(2), Wo});
  const double inv = 1.0 / static_cast<double>(kernel_w);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* src = x.data() + r * W;
    for (std::size_t o = 0; o < Wo; ++o) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kernel_w; ++k) acc += src[o * stride_w + k];
      out[r * Wo + o] = static_cast<T>(acc * inv);
    }
  }
  return tape.record("avg_pool", std::move(out), {input},
                     [input, rows, W, Wo, kernel_w, stride_w, inv](Tape<T>& t, std::size_t self) {
                       const auto& gy = t.grad_of(self);
                       auto& gx = t.grad(input);
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t o = 0; o < Wo; ++o) {
                           const T g = static_cast<T>(gy[r * Wo + o] * inv);
                           T* dst = gx.data() + r * W + o * stride_w;
                           for (std::size_t k = 0; k < kernel_w; ++k) dst[k] += g;
                         }
                       }
                     });
}

template <class T>
Var dropout(Tape<T>& tape, Var input, double p, Mode mode, CounterRng stream) {
  require(p >= 0.0 && p < 1.0, "dropout: p must be in [0, 1)");
  if (mode == Mode::eval || p == 0.0) return input;
  const auto& x = tape.value(input);
  auto mask = std::make_shared<std::vector<T>>(x.size());
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    (*mask)[i] = stream.uniform() < p ? T{0} : keep_scale;
    out[i] = x[i] * (*mask)[i];
  }
  return tape.record("dropout", std::move(out), {input}, [input, mask](Tape<T>& t, std::size_t self) {
    const auto& gy = t.grad_of(self);
    auto& gx = t.grad(input);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * (*mask)[i];
  });
}

template <class T>
Var dense(Tape<T>& tape, Var input, Var weight, Var bias) {
  const auto& x = tape.value(input);
  const auto& w = tape.value(weight);
  const auto& b = tape.value(bias);
  require(x.rank() == 2 && w.rank() == 2, "dense: input [N,D] and weight [K,D] required");
  require(x.dim(1) == w.dim(1), "dense: shape mismatch between input " + shape_string(x.shape()) +
                                    " and weight " + shape_string(w.shape()));
  require(b.size() == w.dim(0), "dense: bias length must equal K");
  const auto N = static_cast<Eigen::Index>(x.dim(0));
  const auto D = static_cast<Eigen::Index>(x.dim(1));
  const auto K = static_cast<Eigen::Index>(w.dim(0));

  Tensor<T> out(Shape{x.dim(0), w.dim(0)});
  MatrixMap<T> Y(out.data(), N, K);
  Y.noalias() = ConstMatrixMap<T>(x.data(), N, D) * ConstMatrixMap<T>(w.data(), K, D).transpose();
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index k = 0; k < K; ++k) Y(n, k) += b[static_cast<std::size_t>(k)];
  }

  return tape.record("dense", std::move(out), {input, weight, bias},
                     [input, weight, bias, N, D, K](Tape<T>& t, std::size_t self) {
                       ConstMatrixMap<T> GY(t.grad_of(self).data(), N, K);
                       if (t.requires_grad(input)) {
                         MatrixMap<T> GX(t.grad(input).data(), N, D);
                         GX.noalias() += GY * ConstMatrixMap<T>(t.value(weight).data(), K, D);
                       }
                       if (t.requires_grad(weight)) {
                         MatrixMap<T> GW(t.grad(weight).data(), K, D);
                         GW.noalias() += GY.transpose() * ConstMatrixMap<T>(t.value(input).data(), N, D);
                       }
                       if (t.requires_grad(bias)) {
                         auto& gb = t.grad(bias);
                         for (Eigen::Index k = 0; k < K; ++k) gb[static_cast<std::size_t>(k)] += GY.col(k).sum();
                       }
                     });
}

template <class T>
Var reshape(Tape<T>& tape, Var input, Shape shape) {
  const auto& x = tape.value(input);
  require(shape_size(shape) == x.size(),
          "reshape: cannot view " + shape_string(x.shape()) + " as " + shape_string(shape));
  return tape.record("reshape", x.reshaped(std::move(shape)), {input}, [input](Tape<T>& t, std::size_t self) {
    const auto& gy = t.grad_of(self);
    auto& gx = t.grad(input);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
  });
}

template <class T>
Var sum(Tape<T>& tape, Var input) {
  const auto& x = tape.value(input);
  double acc = 0.0;
  for (T v : x.values()) acc += v;
  return tape.record("sum", Tensor<T>(Shape{}, static_cast<T>(acc)), {input},
                     [input](Tape<T>& t, std::size_t self) {
                       const T g = t.grad_of(self)[0];
                       for (T& v : t.grad(input).values()) v += g;
                     });
}

template <class T>
Var weighted_sum(Tape<T>& tape, Var input, const Tensor<T>& weights) {
  const auto& x = tape.value(input);
  require(weights.size() == x.size(), "weighted_sum: weights must match input size");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<double>(x[i]) * weights[i];
  auto w = std::make_shared<Tensor<T>>(weights);
  return tape.record("weighted_sum", Tensor<T>(Shape{}, static_cast<T>(acc)), {input},
                     [input, w](Tape<T>& t, std::size_t self) {
                       const T g = t.grad_of(self)[0];
                       auto& gx = t.grad(input);
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g * (*w)[i];
                     });
}

template <class T>
Var scale(Tape<T>& tape, Var input, T factor) {
  const auto& x = tape.value(input);
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * factor;
  return tape.record("scale", std::move(out), {input}, [input, factor](Tape<T>& t, std::size_t self) {
    const auto& gy = t.grad_of(self);
    auto& gx = t.grad(input);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * factor;
  });
}

template <class T>
CrossEntropyResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> targets) {
  require(logits.rank() == 2, "softmax_cross_entropy: logits must be [N,K]");
  const std::size_t N = logits.dim(0), K = logits.dim(1);
  require(targets.size() == N, "softmax_cross_entropy: one target per row required");
  require(N > 0 && K > 0, "softmax_cross_entropy: empty logits");
  CrossEntropyResult<T> r;
  r.grad_logits = Tensor<T>(logits.shape());
  std::vector<double> row(K);
  for (std::size_t n = 0; n < N; ++n) {
    if (targets[n] >= K) {
      throw std::invalid_argument("softmax_cross_entropy: target " + std::to_string(targets[n]) +
                                  " out of range for " + std::to_string(K) + " classes");
    }
    for (std::size_t k = 0; k < K; ++k) row[k] = logits[n * K + k];
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) z += std::exp(row[k] - mx);
    const double log_z = mx + std::log(z);
    r.loss += log_z - row[targets[n]];
    for (std::size_t k = 0; k < K; ++k) {
      const double p = std::exp(row[k] - log_z);
      r.grad_logits[n * K + k] = static_cast<T>((p - (k == targets[n] ? 1.0 : 0.0)) / static_cast<double>(N));
    }
  }
  r.loss /= static_cast<double>(N);
  return r;
}

template <class T>
Var softmax_cross_entropy(Tape<T>& tape, Var logits, std::span<const std::size_t> targets) {
  auto r = softmax_cross_entropy(tape.value(logits), targets);
  auto grad = std::make_shared<Tensor<T>>(std::move(r.grad_logits));
  return tape.record("softmax_cross_entropy", Tensor<T>(Shape{}, static_cast<T>(r.loss)), {logits},
                     [logits, grad](Tape<T>& t, std::size_t self) {
                       const T g = t.grad_of(self)[0];
                       auto& gx = t.grad(logits);
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g * (*grad)[i];
                     });
}

#define PBCI_INSTANTIATE_OPS(T)                                                                     \
  template Var conv2d<T>(Tape<T>&, Var, Var, std::optional<Var>, Stride2);                          \
  template Var factorized_conv<T>(Tape<T>&, Var, Var, Var, Var);                                 \
  template Var batchnorm<T>(Tape<T>&, Var, Var, Var, BatchNormState<T>&, Mode, double, double);     \
  template Var square<T>(Tape<T>&, Var);                                                            \
  template Var log_clamped<T>(Tape<T>&, Var, double);                                               \
  template Var avg_pool<T>(Tape<T>&, Var, std::size_t, std::size_t);                                \
  template Var dropout<T>(Tape<T>&, Var, double, Mode, CounterRng);                                 \
  template Var dense<T>(Tape<T>&, Var, Var, Var);                                                   \
  template Var reshape<T>(Tape<T>&, Var, Shape);                                                    \
  template Var sum<T>(Tape<T>&, Var);                                                               \
  template Var weighted_sum<T>(Tape<T>&, Var, const Tensor<T>&);                                    \
  template Var scale<T>(Tape<T>&, Var, T);                                                          \
  template Var softmax_cross_entropy<T>(Tape<T>&, Var, std::span<const std::size_t>);              \
  template CrossEntropyResult<T> softmax_cross_entropy<T>(const Tensor<T>&, std::span<const std::size_t>);

PBCI_INSTANTIATE_OPS(float)
PBCI_INSTANTIATE_OPS(double)

#undef PBCI_INSTANTIATE_OPS

}  // namespace pbci::nn
