#include "mmnet/autodiff.hpp"

#include <cassert>

namespace mmnet {

Var Tape::push(Tensor value, bool requires_grad, std::function<void(Tape&)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

const Tensor& Tape::value(Var v) const {
  assert(v.tape == this);
  return nodes_[static_cast<size_t>(v.id)].value;
}

bool Tape::requires_grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].requires_grad; }

const Tensor* Tape::grad_ptr(int id) const {
  const Tensor& g = nodes_[static_cast<size_t>(id)].grad;
  return g.empty() ? nullptr : &g;
}

Tensor Tape::grad(Var v) const {
  assert(v.tape == this);
  const Node& n = nodes_[static_cast<size_t>(v.id)];
  if (!n.grad.empty()) return n.grad;
  return Tensor(n.value.dims());
}

void Tape::accum_grad(Var v, const Tensor& g) {
  Node& n = nodes_[static_cast<size_t>(v.id)];
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    n.grad = g;
    return;
  }
  assert(n.grad.same_shape(g));
  for (int64_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

void Tape::backward(Var loss) {
  assert(loss.tape == this);
  Node& top = nodes_[static_cast<size_t>(loss.id)];
  if (top.value.size() != 1) throw UsageError("backward: loss must be scalar");
  Tensor one = top.value;
  one.fill(1.0);
  top.grad = one;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.back && n.requires_grad && !n.grad.empty()) n.back(*this);
  }
}

Var Tape::conv2d(Var input, Var kernel, Var bias, int stride, int padding) {
  ConvParams p{value(kernel), value(bias), stride, padding};
  Tensor out = mmnet::conv2d(value(input), p);
  bool rg = requires_grad(input) || requires_grad(kernel) || requires_grad(bias);
  int xid = input.id, kid = kernel.id, bid = bias.id;
  Var out_var = push(std::move(out), rg, nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [xid, kid, bid, oid, stride, padding](Tape& t) {
    const Tensor& up = t.nodes_[static_cast<size_t>(oid)].grad;
    const Tensor& x = t.nodes_[static_cast<size_t>(xid)].value;
    ConvParams p{t.nodes_[static_cast<size_t>(kid)].value, t.nodes_[static_cast<size_t>(bid)].value,
                 stride, padding};
    bool need_x = t.nodes_[static_cast<size_t>(xid)].requires_grad;
    bool need_k = t.nodes_[static_cast<size_t>(kid)].requires_grad;
    bool need_b = t.nodes_[static_cast<size_t>(bid)].requires_grad;
    FeatureMap dx = need_x ? Tensor(x.dims()) : Tensor();
    Tensor dk = need_k ? Tensor(p.kernel.dims()) : Tensor();
    Tensor db = need_b ? Tensor(p.bias.dims()) : Tensor();
    conv2d_backward(x, p, up, need_x ? &dx : nullptr, need_k ? &dk : nullptr,
                    need_b ? &db : nullptr);
    if (need_x) t.accum_grad(Var{&t, xid}, dx);
    if (need_k) t.accum_grad(Var{&t, kid}, dk);
    if (need_b) t.accum_grad(Var{&t, bid}, db);
  };
  return out_var;
}

Var Tape::dense(Var input, Var weights, Var bias) {
  Tensor out = dense_map(value(input), value(weights), value(bias));
  bool rg = requires_grad(input) || requires_grad(weights) || requires_grad(bias);
  int xid = input.id, wid = weights.id, bid = bias.id;
  Var out_var = push(std::move(out), rg, nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [xid, wid, bid, oid](Tape& t) {
    const Tensor& up = t.nodes_[static_cast<size_t>(oid)].grad;
    const Tensor& x = t.nodes_[static_cast<size_t>(xid)].value;
    const Tensor& w = t.nodes_[static_cast<size_t>(wid)].value;
    bool need_x = t.nodes_[static_cast<size_t>(xid)].requires_grad;
    bool need_w = t.nodes_[static_cast<size_t>(wid)].requires_grad;
    bool need_b = t.nodes_[static_cast<size_t>(bid)].requires_grad;
    FeatureMap dx = need_x ? Tensor(x.dims()) : Tensor();
    Tensor dw = need_w ? Tensor(w.dims()) : Tensor();
    Tensor db = need_b ? Tensor(t.nodes_[static_cast<size_t>(bid)].value.dims()) : Tensor();
    dense_map_backward(x, w, up, need_x ? &dx : nullptr, need_w ? &dw : nullptr,
                       need_b ? &db : nullptr);
    if (need_x) t.accum_grad(Var{&t, xid}, dx);
    if (need_w) t.accum_grad(Var{&t, wid}, dw);
    if (need_b) t.accum_grad(Var{&t, bid}, db);
  };
  return out_var;
}

Var Tape::relu(Var x) {
  Tensor out = mmnet::relu(value(x));
  int xid = x.id;
  Var out_var = push(std::move(out), requires_grad(x), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [xid, oid](Tape& t) {
    t.accum_grad(Var{&t, xid}, relu_backward(t.nodes_[static_cast<size_t>(xid)].value,
                                             t.nodes_[static_cast<size_t>(oid)].grad));
  };
  return out_var;
}

Var Tape::sigmoid(Var x) {
  Tensor out = mmnet::sigmoid(value(x));
  int xid = x.id;
  Var out_var = push(std::move(out), requires_grad(x), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [xid, oid](Tape& t) {
    t.accum_grad(Var{&t, xid}, sigmoid_backward(t.nodes_[static_cast<size_t>(oid)].value,
                                                t.nodes_[static_cast<size_t>(oid)].grad));
  };
  return out_var;
}

Var Tape::softmax_channels(Var x) {
  Tensor out = mmnet::softmax_channels(value(x));
  int xid = x.id;
  Var out_var = push(std::move(out), requires_grad(x), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [xid, oid](Tape& t) {
    t.accum_grad(Var{&t, xid}, softmax_channels_backward(t.nodes_[static_cast<size_t>(oid)].value,
                                                         t.nodes_[static_cast<size_t>(oid)].grad));
  };
  return out_var;
}

Var Tape::add(Var a, Var b) {
  Tensor out = mmnet::add(value(a), value(b));
  int aid = a.id, bid = b.id;
  Var out_var = push(std::move(out), requires_grad(a) || requires_grad(b), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [aid, bid, oid](Tape& t) {
    const Tensor& up = t.nodes_[static_cast<size_t>(oid)].grad;
    t.accum_grad(Var{&t, aid}, up);
    t.accum_grad(Var{&t, bid}, up);
  };
  return out_var;
}

Var Tape::mul(Var a, Var b) {
  Tensor out = mmnet::mul(value(a), value(b));
  int aid = a.id, bid = b.id;
  Var out_var = push(std::move(out), requires_grad(a) || requires_grad(b), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [aid, bid, oid](Tape& t) {
    const Tensor& up = t.nodes_[static_cast<size_t>(oid)].grad;
    if (t.nodes_[static_cast<size_t>(aid)].requires_grad)
      t.accum_grad(Var{&t, aid}, mmnet::mul(up, t.nodes_[static_cast<size_t>(bid)].value));
    if (t.nodes_[static_cast<size_t>(bid)].requires_grad)
      t.accum_grad(Var{&t, bid}, mmnet::mul(up, t.nodes_[static_cast<size_t>(aid)].value));
  };
  return out_var;
}

Var Tape::scale(Var a, double s) {
  Tensor out = mmnet::scale(value(a), s);
  int aid = a.id;
  Var out_var = push(std::move(out), requires_grad(a), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [aid, oid, s](Tape& t) {
    t.accum_grad(Var{&t, aid}, mmnet::scale(t.nodes_[static_cast<size_t>(oid)].grad, s));
  };
  return out_var;
}

Var Tape::offset(Var a, double b) {
  Tensor out = value(a);
  for (int64_t i = 0; i < out.size(); ++i) out[i] += b;
  int aid = a.id;
  Var out_var = push(std::move(out), requires_grad(a), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [aid, oid](Tape& t) {
    t.accum_grad(Var{&t, aid}, t.nodes_[static_cast<size_t>(oid)].grad);
  };
  return out_var;
}

Var Tape::concat_channels(Var a, Var b) {
  Tensor out = mmnet::concat_channels(value(a), value(b));
  int aid = a.id, bid = b.id;
  Var out_var = push(std::move(out), requires_grad(a) || requires_grad(b), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [aid, bid, oid](Tape& t) {
    const Tensor& up = t.nodes_[static_cast<size_t>(oid)].grad;
    const Tensor& av = t.nodes_[static_cast<size_t>(aid)].value;
    const Tensor& bv = t.nodes_[static_cast<size_t>(bid)].value;
    const int ca = av.c(), cb = bv.c();
    const int positions = av.h() * av.w();
    if (t.nodes_[static_cast<size_t>(aid)].requires_grad) {
      Tensor da(av.dims());
      for (int p = 0; p < positions; ++p)
        for (int i = 0; i < ca; ++i) da[static_cast<int64_t>(p) * ca + i] = up[static_cast<int64_t>(p) * (ca + cb) + i];
      t.accum_grad(Var{&t, aid}, da);
    }
    if (t.nodes_[static_cast<size_t>(bid)].requires_grad) {
      Tensor db(bv.dims());
      for (int p = 0; p < positions; ++p)
        for (int i = 0; i < cb; ++i) db[static_cast<int64_t>(p) * cb + i] = up[static_cast<int64_t>(p) * (ca + cb) + ca + i];
      t.accum_grad(Var{&t, bid}, db);
    }
  };
  return out_var;
}

Var Tape::channel_sum(Var x) {
  Tensor out = mmnet::channel_sum(value(x));
  int xid = x.id;
  Var out_var = push(std::move(out), requires_grad(x), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [xid, oid](Tape& t) {
    const Tensor& up = t.nodes_[static_cast<size_t>(oid)].grad;
    const Tensor& x2 = t.nodes_[static_cast<size_t>(xid)].value;
    Tensor dx(x2.dims());
    const int ch = x2.c();
    const int positions = x2.h() * x2.w();
    for (int p = 0; p < positions; ++p)
      for (int i = 0; i < ch; ++i) dx[static_cast<int64_t>(p) * ch + i] = up[p];
    t.accum_grad(Var{&t, xid}, dx);
  };
  return out_var;
}

Var Tape::avg_pool(Var x, int k) {
  Tensor out = mmnet::avg_pool(value(x), k);
  int xid = x.id;
  Var out_var = push(std::move(out), requires_grad(x), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [xid, oid, k](Tape& t) {
    t.accum_grad(Var{&t, xid}, avg_pool_backward(t.nodes_[static_cast<size_t>(xid)].value, k,
                                                 t.nodes_[static_cast<size_t>(oid)].grad));
  };
  return out_var;
}

Var Tape::warp(Var feat, MotionField motion) {
  Tensor out = bilinear_warp(value(feat), motion);
  int fid = feat.id;
  Var out_var = push(std::move(out), requires_grad(feat), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [fid, oid, motion = std::move(motion)](Tape& t) {
    t.accum_grad(Var{&t, fid},
                 bilinear_warp_backward(t.nodes_[static_cast<size_t>(oid)].grad, motion));
  };
  return out_var;
}

Var Tape::weighted_sum_levels(const std::vector<Var>& levels, Var alpha) {
  const Tensor& a = value(alpha);
  if (a.c() != static_cast<int>(levels.size()))
    throw ConfigError("weighted_sum_levels: alpha channels != level count");
  const Tensor& first = value(levels[0]);
  Tensor out(first.dims());
  const int positions = first.h() * first.w();
  const int ch = first.c();
  const int nl = static_cast<int>(levels.size());
  for (int l = 0; l < nl; ++l) {
    const Tensor& lv = value(levels[l]);
    if (!lv.same_shape(first)) throw ConfigError("weighted_sum_levels: level shape mismatch");
    for (int p = 0; p < positions; ++p) {
      const double w = a[static_cast<int64_t>(p) * nl + l];
      const double* src = lv.data() + static_cast<size_t>(p) * ch;
      double* dst = out.data() + static_cast<size_t>(p) * ch;
      for (int i = 0; i < ch; ++i) dst[i] += w * src[i];
    }
  }
  bool rg = requires_grad(alpha);
  std::vector<int> lids(levels.size());
  for (size_t i = 0; i < levels.size(); ++i) {
    lids[i] = levels[i].id;
    rg = rg || requires_grad(levels[i]);
  }
  int aid = alpha.id;
  Var out_var = push(std::move(out), rg, nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [lids, aid, oid](Tape& t) {
    const Tensor& up = t.nodes_[static_cast<size_t>(oid)].grad;
    const Tensor& av = t.nodes_[static_cast<size_t>(aid)].value;
    const int nl2 = static_cast<int>(lids.size());
    const int ch2 = up.c();
    const int positions2 = up.h() * up.w();
    Tensor da;
    bool need_a = t.nodes_[static_cast<size_t>(aid)].requires_grad;
    if (need_a) da = Tensor(av.dims());
    for (int l = 0; l < nl2; ++l) {
      const Tensor& lv = t.nodes_[static_cast<size_t>(lids[l])].value;
      bool need_l = t.nodes_[static_cast<size_t>(lids[l])].requires_grad;
      Tensor dl;
      if (need_l) dl = Tensor(lv.dims());
      for (int p = 0; p < positions2; ++p) {
        const double w = av[static_cast<int64_t>(p) * nl2 + l];
        const double* upp = up.data() + static_cast<size_t>(p) * ch2;
        const double* src = lv.data() + static_cast<size_t>(p) * ch2;
        if (need_l) {
          double* dst = dl.data() + static_cast<size_t>(p) * ch2;
          for (int i = 0; i < ch2; ++i) dst[i] += w * upp[i];
        }
        if (need_a) {
          double dot = 0.0;
          for (int i = 0; i < ch2; ++i) dot += upp[i] * src[i];
          da[static_cast<int64_t>(p) * nl2 + l] += dot;
        }
      }
      if (need_l) t.accum_grad(Var{&t, lids[l]}, dl);
    }
    if (need_a) t.accum_grad(Var{&t, aid}, da);
  };
  return out_var;
}

Var Tape::sum(Var x) {
  const Tensor& v = value(x);
  double acc = 0.0;
  for (int64_t i = 0; i < v.size(); ++i) acc += v[i];
  int xid = x.id;
  Var out_var = push(Tensor::scalar(acc), requires_grad(x), nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [xid, oid](Tape& t) {
    const double g = t.nodes_[static_cast<size_t>(oid)].grad[0];
    Tensor dx(t.nodes_[static_cast<size_t>(xid)].value.dims());
    dx.fill(g);
    t.accum_grad(Var{&t, xid}, dx);
  };
  return out_var;
}

Var Tape::custom(Tensor value, std::vector<Var> inputs,
                 std::function<void(const Tensor& out_grad, Tape&)> back) {
  bool rg = false;
  for (Var v : inputs) rg = rg || requires_grad(v);
  Var out_var = push(std::move(value), rg, nullptr);
  int oid = out_var.id;
  nodes_[static_cast<size_t>(oid)].back = [oid, back = std::move(back)](Tape& t) {
    back(t.nodes_[static_cast<size_t>(oid)].grad, t);
  };
  return out_var;
}

}  // namespace mmnet
