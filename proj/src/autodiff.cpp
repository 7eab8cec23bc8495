#include "cfea/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

#include "cfea/error.hpp"

namespace cfea {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->id = g_next_id.fetch_add(1);
  n->requires_grad = false;
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  if (n->requires_grad) n->backprop = std::move(backprop);
  return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a->value.same_shape(b->value)) throw InputError(std::string(op) + ": shape mismatch");
}

}  // namespace

void Node::accumulate(const Tensor& g) {
  if (!grad_ready) {
    grad = Tensor::zeros(value.shape());
    grad_ready = true;
  }
  grad.add_scaled(g, 1.0);
}

Tensor& Node::ensure_grad() {
  if (!grad_ready) {
    grad = Tensor::zeros(value.shape());
    grad_ready = true;
  }
  return grad;
}

Var make_leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->id = g_next_id.fetch_add(1);
  return n;
}

Var make_constant(Tensor value) { return make_leaf(std::move(value), false); }

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor out = a->value;
  out.add_scaled(b->value, 1.0);
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) a->accumulate(self.grad);
    if (b->requires_grad) b->accumulate(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor out = a->value;
  out.add_scaled(b->value, -1.0);
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) a->accumulate(self.grad);
    if (b->requires_grad) {
      Tensor& g = b->ensure_grad();
      g.add_scaled(self.grad, -1.0);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      Tensor& g = a->ensure_grad();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * b->value[i];
    }
    if (b->requires_grad) {
      Tensor& g = b->ensure_grad();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * a->value[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  out.scale(s);
  return make_node(std::move(out), {a}, [a, s](Node& self) {
    Tensor& g = a->ensure_grad();
    g.add_scaled(self.grad, s);
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] += s;
  return make_node(std::move(out), {a}, [a](Node& self) { a->accumulate(self.grad); });
}

Var square(const Var& a) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= out[i];
  return make_node(std::move(out), {a}, [a](Node& self) {
    Tensor& g = a->ensure_grad();
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * 2.0 * a->value[i];
  });
}

Var vlog(const Var& a) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
  return make_node(std::move(out), {a}, [a](Node& self) {
    Tensor& g = a->ensure_grad();
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / a->value[i];
  });
}

Var relu(const Var& a) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  return make_node(std::move(out), {a}, [a](Node& self) {
    Tensor& g = a->ensure_grad();
    for (std::int64_t i = 0; i < g.size(); ++i)
      if (a->value[i] > 0.0) g[i] += self.grad[i];
  });
}

Var leaky_relu(const Var& a, double negative_slope) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i)
    out[i] = out[i] > 0.0 ? out[i] : negative_slope * out[i];
  return make_node(std::move(out), {a}, [a, negative_slope](Node& self) {
    Tensor& g = a->ensure_grad();
    for (std::int64_t i = 0; i < g.size(); ++i)
      g[i] += self.grad[i] * (a->value[i] > 0.0 ? 1.0 : negative_slope);
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  auto saved = std::make_shared<Tensor>(out);
  return make_node(std::move(out), {a}, [a, saved](Node& self) {
    Tensor& g = a->ensure_grad();
    const Tensor& y = *saved;
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * y[i] * (1.0 - y[i]);
  });
}

Var clamp(const Var& a, double lo, double hi) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = std::min(std::max(out[i], lo), hi);
  return make_node(std::move(out), {a}, [a, lo, hi](Node& self) {
    Tensor& g = a->ensure_grad();
    for (std::int64_t i = 0; i < g.size(); ++i)
      if (a->value[i] > lo && a->value[i] < hi) g[i] += self.grad[i];
  });
}

Var sum_all(const Var& a) {
  Tensor out = Tensor::scalar(a->value.sum());
  return make_node(std::move(out), {a}, [a](Node& self) {
    Tensor& g = a->ensure_grad();
    const double s = self.grad[0];
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += s;
  });
}

Var mean_all(const Var& a) {
  const double inv = 1.0 / static_cast<double>(a->value.size());
  Tensor out = Tensor::scalar(a->value.sum() * inv);
  return make_node(std::move(out), {a}, [a, inv](Node& self) {
    Tensor& g = a->ensure_grad();
    const double s = self.grad[0] * inv;
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += s;
  });
}

namespace {

// im2col for 3x3-style convolutions: input (C, H, W) -> (C*kh*kw, Ho*Wo).
void im2col(const double* x, int c, int h, int w, int kh, int kw, int stride, int pad, int ho,
            int wo, double* col) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  std::int64_t row = 0;
  for (int ci = 0; ci < c; ++ci) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj, ++row) {
        double* dst = col + row * ho * wo;
        const double* src = x + ci * plane;
        for (int oi = 0; oi < ho; ++oi) {
          const int ii = oi * stride + ki - pad;
          if (ii < 0 || ii >= h) {
            for (int oj = 0; oj < wo; ++oj) dst[oi * wo + oj] = 0.0;
            continue;
          }
          for (int oj = 0; oj < wo; ++oj) {
            const int jj = oj * stride + kj - pad;
            dst[oi * wo + oj] = (jj < 0 || jj >= w) ? 0.0 : src[ii * static_cast<std::int64_t>(w) + jj];
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter (C*kh*kw, Ho*Wo) gradients back to (C, H, W).
void col2im(const double* col, int c, int h, int w, int kh, int kw, int stride, int pad, int ho,
            int wo, double* x) {
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  std::int64_t row = 0;
  for (int ci = 0; ci < c; ++ci) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj, ++row) {
        const double* src = col + row * ho * wo;
        double* dst = x + ci * plane;
        for (int oi = 0; oi < ho; ++oi) {
          const int ii = oi * stride + ki - pad;
          if (ii < 0 || ii >= h) continue;
          for (int oj = 0; oj < wo; ++oj) {
            const int jj = oj * stride + kj - pad;
            if (jj >= 0 && jj < w) dst[ii * static_cast<std::int64_t>(w) + jj] += src[oi * wo + oj];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  if (xv.ndim() != 4 || wv.ndim() != 4) throw InputError("conv2d: expects 4-d input and weight");
  const int n = xv.dim(0), cin = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const int cout = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
  if (wv.dim(1) != cin) throw InputError("conv2d: input channel mismatch");
  if (!b->value.empty() && b->value.size() != cout) throw InputError("conv2d: bias size mismatch");
  const int ho = (h + 2 * pad - kh) / stride + 1;
  const int wo = (wd + 2 * pad - kw) / stride + 1;
  if (ho <= 0 || wo <= 0) throw InputError("conv2d: output would be empty");

  const int ckk = cin * kh * kw;
  const std::int64_t ospatial = static_cast<std::int64_t>(ho) * wo;
  Tensor out({n, cout, ho, wo});
  std::vector<double> col(static_cast<std::size_t>(ckk) * ospatial);
  CMapRM wm(wv.data(), cout, ckk);
  for (int ni = 0; ni < n; ++ni) {
    im2col(xv.data() + static_cast<std::int64_t>(ni) * cin * h * wd, cin, h, wd, kh, kw, stride,
           pad, ho, wo, col.data());
    CMapRM cm(col.data(), ckk, ospatial);
    MapRM om(out.data() + static_cast<std::int64_t>(ni) * cout * ospatial, cout, ospatial);
    om.noalias() = wm * cm;
    if (!b->value.empty())
      for (int co = 0; co < cout; ++co) om.row(co).array() += b->value[co];
  }

  auto bp = [x, w, b, stride, pad, n, cin, h, wd, cout, kh, kw, ho, wo, ckk,
             ospatial](Node& self) {
    CMapRM wm(w->value.data(), cout, ckk);
    std::vector<double> col(static_cast<std::size_t>(ckk) * ospatial);
    std::vector<double> gcol(static_cast<std::size_t>(ckk) * ospatial);
    Tensor* gx = x->requires_grad ? &x->ensure_grad() : nullptr;
    Tensor* gw = w->requires_grad ? &w->ensure_grad() : nullptr;
    Tensor* gb = (b->requires_grad && !b->value.empty()) ? &b->ensure_grad() : nullptr;
    for (int ni = 0; ni < n; ++ni) {
      CMapRM gom(self.grad.data() + static_cast<std::int64_t>(ni) * cout * ospatial, cout,
                 ospatial);
      if (gw || gb) {
        im2col(x->value.data() + static_cast<std::int64_t>(ni) * cin * h * wd, cin, h, wd, kh, kw,
               stride, pad, ho, wo, col.data());
        if (gw) {
          CMapRM cm(col.data(), ckk, ospatial);
          MapRM gwm(gw->data(), cout, ckk);
          gwm.noalias() += gom * cm.transpose();
        }
        if (gb)
          for (int co = 0; co < cout; ++co) (*gb)[co] += gom.row(co).sum();
      }
      if (gx) {
        MapRM gcm(gcol.data(), ckk, ospatial);
        gcm.noalias() = wm.transpose() * gom;
        col2im(gcol.data(), cin, h, wd, kh, kw, stride, pad, ho, wo,
               gx->data() + static_cast<std::int64_t>(ni) * cin * h * wd);
      }
    }
  };
  return make_node(std::move(out), {x, w, b}, std::move(bp));
}

Var maxpool2x2(const Var& x) {
  const Tensor& xv = x->value;
  if (xv.ndim() != 4) throw InputError("maxpool2x2: expects 4-d input");
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  if (h % 2 != 0 || w % 2 != 0) throw InputError("maxpool2x2: spatial dims must be even");
  const int ho = h / 2, wo = w / 2;
  Tensor out({n, c, ho, wo});
  auto argmax = std::make_shared<std::vector<std::int64_t>>(out.size());
  std::int64_t o = 0;
  for (int ni = 0; ni < n; ++ni)
    for (int ci = 0; ci < c; ++ci) {
      const std::int64_t base = (static_cast<std::int64_t>(ni) * c + ci) * h * w;
      for (int oi = 0; oi < ho; ++oi)
        for (int oj = 0; oj < wo; ++oj, ++o) {
          std::int64_t best = base + (2 * oi) * w + 2 * oj;
          double bv = xv[best];
          const std::int64_t cands[3] = {base + (2 * oi) * w + 2 * oj + 1,
                                         base + (2 * oi + 1) * w + 2 * oj,
                                         base + (2 * oi + 1) * w + 2 * oj + 1};
          for (std::int64_t cand : cands)
            if (xv[cand] > bv) {
              bv = xv[cand];
              best = cand;
            }
          out[o] = bv;
          (*argmax)[static_cast<std::size_t>(o)] = best;
        }
    }
  return make_node(std::move(out), {x}, [x, argmax](Node& self) {
    Tensor& g = x->ensure_grad();
    for (std::int64_t i = 0; i < self.grad.size(); ++i)
      g[(*argmax)[static_cast<std::size_t>(i)]] += self.grad[i];
  });
}

Var upsample2x(const Var& x) {
  const Tensor& xv = x->value;
  if (xv.ndim() != 4) throw InputError("upsample2x: expects 4-d input");
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  Tensor out({n, c, 2 * h, 2 * w});
  for (int ni = 0; ni < n; ++ni)
    for (int ci = 0; ci < c; ++ci)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
          const double v = xv.at4(ni, ci, i, j);
          out.at4(ni, ci, 2 * i, 2 * j) = v;
          out.at4(ni, ci, 2 * i, 2 * j + 1) = v;
          out.at4(ni, ci, 2 * i + 1, 2 * j) = v;
          out.at4(ni, ci, 2 * i + 1, 2 * j + 1) = v;
        }
  return make_node(std::move(out), {x}, [x, n, c, h, w](Node& self) {
    Tensor& g = x->ensure_grad();
    for (int ni = 0; ni < n; ++ni)
      for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h; ++i)
          for (int j = 0; j < w; ++j)
            g.at4(ni, ci, i, j) += self.grad.at4(ni, ci, 2 * i, 2 * j) +
                                   self.grad.at4(ni, ci, 2 * i, 2 * j + 1) +
                                   self.grad.at4(ni, ci, 2 * i + 1, 2 * j) +
                                   self.grad.at4(ni, ci, 2 * i + 1, 2 * j + 1);
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  if (av.ndim() != 4 || bv.ndim() != 4) throw InputError("concat_channels: expects 4-d inputs");
  if (av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2) || av.dim(3) != bv.dim(3))
    throw InputError("concat_channels: spatial/batch mismatch");
  const int n = av.dim(0), ca = av.dim(1), cb = bv.dim(1), h = av.dim(2), w = av.dim(3);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  Tensor out({n, ca + cb, h, w});
  for (int ni = 0; ni < n; ++ni) {
    std::copy_n(av.data() + static_cast<std::int64_t>(ni) * ca * plane, ca * plane,
                out.data() + static_cast<std::int64_t>(ni) * (ca + cb) * plane);
    std::copy_n(bv.data() + static_cast<std::int64_t>(ni) * cb * plane, cb * plane,
                out.data() + static_cast<std::int64_t>(ni) * (ca + cb) * plane + ca * plane);
  }
  return make_node(std::move(out), {a, b}, [a, b, n, ca, cb, plane](Node& self) {
    if (a->requires_grad) {
      Tensor& g = a->ensure_grad();
      for (int ni = 0; ni < n; ++ni) {
        const double* src = self.grad.data() + static_cast<std::int64_t>(ni) * (ca + cb) * plane;
        double* dst = g.data() + static_cast<std::int64_t>(ni) * ca * plane;
        for (std::int64_t i = 0; i < ca * plane; ++i) dst[i] += src[i];
      }
    }
    if (b->requires_grad) {
      Tensor& g = b->ensure_grad();
      for (int ni = 0; ni < n; ++ni) {
        const double* src =
            self.grad.data() + static_cast<std::int64_t>(ni) * (ca + cb) * plane + ca * plane;
        double* dst = g.data() + static_cast<std::int64_t>(ni) * cb * plane;
        for (std::int64_t i = 0; i < cb * plane; ++i) dst[i] += src[i];
      }
    }
  });
}

Var softmax_channels(const Var& x) {
  const Tensor& xv = x->value;
  if (xv.ndim() != 4) throw InputError("softmax_channels: expects 4-d input");
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  Tensor out(xv.shape());
  for (int ni = 0; ni < n; ++ni)
    for (std::int64_t p = 0; p < plane; ++p) {
      const std::int64_t base = static_cast<std::int64_t>(ni) * c * plane + p;
      double m = xv[base];
      for (int ci = 1; ci < c; ++ci) m = std::max(m, xv[base + ci * plane]);
      double z = 0.0;
      for (int ci = 0; ci < c; ++ci) {
        const double e = std::exp(xv[base + ci * plane] - m);
        out[base + ci * plane] = e;
        z += e;
      }
      for (int ci = 0; ci < c; ++ci) out[base + ci * plane] /= z;
    }
  auto saved = std::make_shared<Tensor>(out);
  return make_node(std::move(out), {x}, [x, saved, n, c, plane](Node& self) {
    Tensor& g = x->ensure_grad();
    const Tensor& y = *saved;
    for (int ni = 0; ni < n; ++ni)
      for (std::int64_t p = 0; p < plane; ++p) {
        const std::int64_t base = static_cast<std::int64_t>(ni) * c * plane + p;
        double dot = 0.0;
        for (int ci = 0; ci < c; ++ci) dot += self.grad[base + ci * plane] * y[base + ci * plane];
        for (int ci = 0; ci < c; ++ci)
          g[base + ci * plane] += y[base + ci * plane] * (self.grad[base + ci * plane] - dot);
      }
  });
}

Var spatial_mean(const Var& x) {
  const Tensor& xv = x->value;
  if (xv.ndim() != 4) throw InputError("spatial_mean: expects 4-d input");
  const int n = xv.dim(0), c = xv.dim(1), h = xv.dim(2), w = xv.dim(3);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  const double inv = 1.0 / static_cast<double>(plane);
  Tensor out({n, c, 1, 1});
  for (int ni = 0; ni < n; ++ni)
    for (int ci = 0; ci < c; ++ci) {
      const double* src = xv.data() + (static_cast<std::int64_t>(ni) * c + ci) * plane;
      double s = 0.0, comp = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) {
        double yk = src[i] - comp;
        double t = s + yk;
        comp = (t - s) - yk;
        s = t;
      }
      out.at4(ni, ci, 0, 0) = s * inv;
    }
  return make_node(std::move(out), {x}, [x, n, c, plane, inv](Node& self) {
    Tensor& g = x->ensure_grad();
    for (int ni = 0; ni < n; ++ni)
      for (int ci = 0; ci < c; ++ci) {
        const double s = self.grad.at4(ni, ci, 0, 0) * inv;
        double* dst = g.data() + (static_cast<std::int64_t>(ni) * c + ci) * plane;
        for (std::int64_t i = 0; i < plane; ++i) dst[i] += s;
      }
  });
}

Var mse_loss(const Var& a, const Var& b) {
  check_same_shape(a, b, "mse_loss");
  const std::int64_t m = a->value.size();
  const double inv = 1.0 / static_cast<double>(m);
  double s = 0.0, comp = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    const double d = a->value[i] - b->value[i];
    double yk = d * d - comp;
    double t = s + yk;
    comp = (t - s) - yk;
    s = t;
  }
  Tensor out = Tensor::scalar(s * inv);
  return make_node(std::move(out), {a, b}, [a, b, inv](Node& self) {
    const double s2 = 2.0 * inv * self.grad[0];
    if (a->requires_grad) {
      Tensor& g = a->ensure_grad();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] += s2 * (a->value[i] - b->value[i]);
    }
    if (b->requires_grad) {
      Tensor& g = b->ensure_grad();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] -= s2 * (a->value[i] - b->value[i]);
    }
  });
}

Var dice_loss_graph(const Var& pred, const Tensor& one_hot, double smooth) {
  const Tensor& pv = pred->value;
  if (pv.ndim() != 4) throw InputError("dice_loss: expects 4-d prediction");
  if (!pv.same_shape(one_hot)) throw InputError("dice_loss: shape mismatch with target");
  const int n = pv.dim(0), c = pv.dim(1);
  const std::int64_t plane = static_cast<std::int64_t>(pv.dim(2)) * pv.dim(3);
  // Per (sample, class): inter = sum p*g, denom = sum p + sum g.
  auto inter = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n) * c);
  auto denom = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n) * c);
  double loss = 0.0;
  for (int ni = 0; ni < n; ++ni)
    for (int ci = 0; ci < c; ++ci) {
      const std::int64_t base = (static_cast<std::int64_t>(ni) * c + ci) * plane;
      double si = 0.0, sp = 0.0, sg = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) {
        si += pv[base + i] * one_hot[base + i];
        sp += pv[base + i];
        sg += one_hot[base + i];
      }
      (*inter)[static_cast<std::size_t>(ni) * c + ci] = si;
      (*denom)[static_cast<std::size_t>(ni) * c + ci] = sp + sg;
      loss += 1.0 - (2.0 * si + smooth) / (sp + sg + smooth);
    }
  const double inv = 1.0 / static_cast<double>(n * c);
  Tensor out = Tensor::scalar(loss * inv);
  auto target = std::make_shared<Tensor>(one_hot);
  return make_node(std::move(out), {pred},
                   [pred, target, inter, denom, smooth, n, c, plane, inv](Node& self) {
                     Tensor& g = pred->ensure_grad();
                     const double up = self.grad[0] * inv;
                     for (int ni = 0; ni < n; ++ni)
                       for (int ci = 0; ci < c; ++ci) {
                         const std::int64_t base = (static_cast<std::int64_t>(ni) * c + ci) * plane;
                         const double si = (*inter)[static_cast<std::size_t>(ni) * c + ci];
                         const double de = (*denom)[static_cast<std::size_t>(ni) * c + ci] + smooth;
                         // d/dp of -(2*si + s)/de = -(2*g*de - (2*si + s)) / de^2
                         for (std::int64_t i = 0; i < plane; ++i) {
                           const double gi = (*target)[base + i];
                           g[base + i] += up * (-(2.0 * gi * de - (2.0 * si + smooth)) / (de * de));
                         }
                       }
                   });
}

void backward(const Var& root) {
  if (root->value.size() != 1) throw InputError("backward: root must be scalar");
  if (!root->requires_grad) return;
  // Collect reachable nodes; decreasing creation id is a valid topo order
  // because every op creates its node after its parents.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* cur = stack.back();
    stack.pop_back();
    order.push_back(cur);
    for (const auto& p : cur->parents)
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->id > b->id; });
  root->ensure_grad();
  root->grad[0] = 1.0;
  for (Node* nd : order)
    if (nd->backprop && nd->grad_ready) nd->backprop(*nd);
}

}  // namespace cfea
