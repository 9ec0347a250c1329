#include "egs/graph.hpp"

#include <cmath>

#include "egs/error.hpp"
#include "egs/optimizer.hpp"

namespace egs {

void Graph::require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeError(msg);
}

void Graph::enable_dropout(std::uint64_t seed, std::uint64_t step) {
  std::uint64_t s = seed;
  s ^= 0x6a09e667f3bcc909ULL + step + (s << 7) + (s >> 3);
  dropout_rng_.emplace(s);
}

Graph::Var Graph::emplace(Tensor value, bool needs_grad, const char* op,
                          std::function<void(Graph&, Node&)> back) {
  check_finite(value, op);
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

Tensor& Graph::grad_buf(Var v) {
  Node& n = nodes_[v];
  if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
  return n.grad;
}

double Graph::scalar(Var v) const {
  const Tensor& t = nodes_[v].value;
  if (t.numel() != 1) throw ShapeError("scalar: tensor has shape " + t.shape_str());
  return t.data[0];
}

Graph::Var Graph::input(Tensor value) {
  return emplace(std::move(value), false, "input", nullptr);
}

Graph::Var Graph::param(ParameterStore& store, const std::string& name) {
  Var v = emplace(store.value(name), true, "param", nullptr);
  params_.push_back({v, &store, name});
  return v;
}

Graph::Var Graph::matmul(Var a, Var b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  require(ta.cols() == tb.rows(),
          "matmul: inner dimensions differ: " + ta.shape_str() + " vs " + tb.shape_str());
  Tensor out = Tensor::matrix(ta.rows(), tb.cols());
  matmul_nn(ta, tb, out);
  const bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return emplace(std::move(out), ng, "matmul", [a, b](Graph& g, Node& n) {
    if (g.nodes_[a].needs_grad) matmul_nt_acc(n.grad, g.nodes_[b].value, g.grad_buf(a));
    if (g.nodes_[b].needs_grad) matmul_tn_acc(g.nodes_[a].value, n.grad, g.grad_buf(b));
  });
}

Graph::Var Graph::matmul_nt(Var a, Var b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  require(ta.cols() == tb.cols(),
          "matmul_nt: column counts differ: " + ta.shape_str() + " vs " + tb.shape_str());
  Tensor out = Tensor::matrix(ta.rows(), tb.rows());
  matmul_nt_acc(ta, tb, out);
  const bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  // c = a b^T  =>  da = dc b ; db = dc^T a
  return emplace(std::move(out), ng, "matmul_nt", [a, b](Graph& g, Node& n) {
    if (g.nodes_[a].needs_grad) {
      Tensor& da = g.grad_buf(a);
      const Tensor& tb = g.nodes_[b].value;
      const std::size_t m = n.grad.rows(), r = tb.rows(), k = tb.cols();
      for (std::size_t i = 0; i < m; ++i) {
        const double* gi = n.grad.data.data() + i * r;
        double* di = da.data.data() + i * k;
        for (std::size_t j = 0; j < r; ++j) {
          const double gv = gi[j];
          const double* bj = tb.data.data() + j * k;
          for (std::size_t l = 0; l < k; ++l) di[l] += gv * bj[l];
        }
      }
    }
    if (g.nodes_[b].needs_grad) {
      matmul_tn_acc(n.grad, g.nodes_[a].value, g.grad_buf(b));
    }
  });
}

Graph::Var Graph::add(Var a, Var b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  require(ta.same_shape(tb),
          "add: shapes differ: " + ta.shape_str() + " vs " + tb.shape_str());
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
  const bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return emplace(std::move(out), ng, "add", [a, b](Graph& g, Node& n) {
    if (g.nodes_[a].needs_grad) {
      Tensor& da = g.grad_buf(a);
      for (std::size_t i = 0; i < n.grad.data.size(); ++i) da.data[i] += n.grad.data[i];
    }
    if (g.nodes_[b].needs_grad) {
      Tensor& db = g.grad_buf(b);
      for (std::size_t i = 0; i < n.grad.data.size(); ++i) db.data[i] += n.grad.data[i];
    }
  });
}

Graph::Var Graph::sub(Var a, Var b) { return add(a, neg(b)); }

Graph::Var Graph::mul(Var a, Var b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  require(ta.same_shape(tb),
          "mul: shapes differ: " + ta.shape_str() + " vs " + tb.shape_str());
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
  const bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
  return emplace(std::move(out), ng, "mul", [a, b](Graph& g, Node& n) {
    if (g.nodes_[a].needs_grad) {
      Tensor& da = g.grad_buf(a);
      const Tensor& tb = g.nodes_[b].value;
      for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
        da.data[i] += n.grad.data[i] * tb.data[i];
      }
    }
    if (g.nodes_[b].needs_grad) {
      Tensor& db = g.grad_buf(b);
      const Tensor& ta2 = g.nodes_[a].value;
      for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
        db.data[i] += n.grad.data[i] * ta2.data[i];
      }
    }
  });
}

Graph::Var Graph::add_rowvec(Var a, Var bias) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[bias].value;
  require(tb.rows() == 1 && tb.cols() == ta.cols(),
          "add_rowvec: bias " + tb.shape_str() + " does not broadcast over " +
              ta.shape_str());
  Tensor out = ta;
  const std::size_t m = ta.rows(), n = ta.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] += tb.data[j];
  }
  const bool ng = nodes_[a].needs_grad || nodes_[bias].needs_grad;
  return emplace(std::move(out), ng, "add_rowvec", [a, bias](Graph& g, Node& nd) {
    const std::size_t m = nd.grad.rows(), n = nd.grad.cols();
    if (g.nodes_[a].needs_grad) {
      Tensor& da = g.grad_buf(a);
      for (std::size_t i = 0; i < nd.grad.data.size(); ++i) da.data[i] += nd.grad.data[i];
    }
    if (g.nodes_[bias].needs_grad) {
      Tensor& db = g.grad_buf(bias);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) db.data[j] += nd.grad.data[i * n + j];
      }
    }
  });
}

Graph::Var Graph::relu(Var a) {
  Tensor out = nodes_[a].value;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return emplace(std::move(out), nodes_[a].needs_grad, "relu", [a](Graph& g, Node& n) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    const Tensor& ta = g.nodes_[a].value;
    for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
      if (ta.data[i] > 0.0) da.data[i] += n.grad.data[i];
    }
  });
}

Graph::Var Graph::sigmoid(Var a) {
  Tensor out = nodes_[a].value;
  for (double& v : out.data) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return emplace(std::move(out), nodes_[a].needs_grad, "sigmoid", [a](Graph& g, Node& n) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
      const double s = n.value.data[i];
      da.data[i] += n.grad.data[i] * s * (1.0 - s);
    }
  });
}

Graph::Var Graph::log_sigmoid(Var a) {
  Tensor out = nodes_[a].value;
  for (double& v : out.data) {
    // log sigma(x) = -log(1 + e^-x), computed on the stable side
    v = v >= 0.0 ? -std::log1p(std::exp(-v)) : v - std::log1p(std::exp(v));
  }
  return emplace(std::move(out), nodes_[a].needs_grad, "log_sigmoid",
                 [a](Graph& g, Node& n) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    const Tensor& ta = g.nodes_[a].value;
    for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
      const double x = ta.data[i];
      const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      da.data[i] += n.grad.data[i] * (1.0 - s);
    }
  });
}

Graph::Var Graph::softmax_rows(Var a) {
  const Tensor& ta = nodes_[a].value;
  Tensor out = ta;
  const std::size_t m = ta.rows(), n = ta.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data.data() + i * n;
    double mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
  }
  return emplace(std::move(out), nodes_[a].needs_grad, "softmax", [a](Graph& g, Node& n) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    const std::size_t m = n.value.rows(), c = n.value.cols();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = n.value.data.data() + i * c;
      const double* dy = n.grad.data.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += y[j] * dy[j];
      double* dx = da.data.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) dx[j] += y[j] * (dy[j] - dot);
    }
  });
}

Graph::Var Graph::log_softmax_rows(Var a) {
  const Tensor& ta = nodes_[a].value;
  Tensor out = ta;
  const std::size_t m = ta.rows(), n = ta.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data.data() + i * n;
    double mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(row[j] - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < n; ++j) row[j] -= lse;
  }
  return emplace(std::move(out), nodes_[a].needs_grad, "log_softmax",
                 [a](Graph& g, Node& n) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    const std::size_t m = n.value.rows(), c = n.value.cols();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = n.value.data.data() + i * c;  // log-probs
      const double* dy = n.grad.data.data() + i * c;
      double gsum = 0.0;
      for (std::size_t j = 0; j < c; ++j) gsum += dy[j];
      double* dx = da.data.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) dx[j] += dy[j] - std::exp(y[j]) * gsum;
    }
  });
}

Graph::Var Graph::layer_norm_rows(Var x, Var gain, Var bias) {
  constexpr double kEps = 1e-5;
  const Tensor& tx = nodes_[x].value;
  const Tensor& tg = nodes_[gain].value;
  const Tensor& tb = nodes_[bias].value;
  require(tg.rows() == 1 && tg.cols() == tx.cols() && tb.rows() == 1 &&
              tb.cols() == tx.cols(),
          "layer_norm: gain/bias " + tg.shape_str() + "/" + tb.shape_str() +
              " do not match " + tx.shape_str());
  const std::size_t m = tx.rows(), n = tx.cols();
  Tensor out = Tensor::matrix(m, n);
  Tensor aux = Tensor::matrix(m, n + 2);  // per-row: xhat..., mean, inv_std
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = tx.data.data() + i * n;
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += xi[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= static_cast<double>(n);
    const double inv_std = 1.0 / std::sqrt(var + kEps);
    double* xh = aux.data.data() + i * (n + 2);
    for (std::size_t j = 0; j < n; ++j) {
      xh[j] = (xi[j] - mean) * inv_std;
      out.data[i * n + j] = xh[j] * tg.data[j] + tb.data[j];
    }
    xh[n] = mean;
    xh[n + 1] = inv_std;
  }
  const bool ng =
      nodes_[x].needs_grad || nodes_[gain].needs_grad || nodes_[bias].needs_grad;
  Var v = emplace(std::move(out), ng, "layer_norm", [x, gain, bias](Graph& g, Node& nd) {
    const std::size_t m = nd.value.rows(), n = nd.value.cols();
    const Tensor& tg = g.nodes_[gain].value;
    for (std::size_t i = 0; i < m; ++i) {
      const double* dy = nd.grad.data.data() + i * n;
      const double* xh = nd.aux.data.data() + i * (n + 2);
      const double inv_std = xh[n + 1];
      if (g.nodes_[gain].needs_grad) {
        Tensor& dg = g.grad_buf(gain);
        for (std::size_t j = 0; j < n; ++j) dg.data[j] += dy[j] * xh[j];
      }
      if (g.nodes_[bias].needs_grad) {
        Tensor& db = g.grad_buf(bias);
        for (std::size_t j = 0; j < n; ++j) db.data[j] += dy[j];
      }
      if (g.nodes_[x].needs_grad) {
        Tensor& dx = g.grad_buf(x);
        double sum_dxh = 0.0, sum_dxh_xh = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double dxh = dy[j] * tg.data[j];
          sum_dxh += dxh;
          sum_dxh_xh += dxh * xh[j];
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
          const double dxh = dy[j] * tg.data[j];
          dx.data[i * n + j] +=
              inv_std * (dxh - inv_n * sum_dxh - xh[j] * inv_n * sum_dxh_xh);
        }
      }
    }
  });
  nodes_[v].aux = std::move(aux);
  return v;
}

Graph::Var Graph::dropout(Var a, double p) {
  if (!dropout_rng_ || p <= 0.0) return a;  // evaluation mode: identity
  if (p >= 1.0) throw ArgumentError("dropout: rate must be < 1");
  const Tensor& ta = nodes_[a].value;
  Tensor mask = Tensor::zeros(ta.shape);
  const double keep = 1.0 - p;
  for (double& mv : mask.data) {
    mv = dropout_rng_->next_double() < p ? 0.0 : 1.0 / keep;
  }
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask.data[i];
  Var v = emplace(std::move(out), nodes_[a].needs_grad, "dropout", [a](Graph& g, Node& n) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    for (std::size_t i = 0; i < n.grad.data.size(); ++i) {
      da.data[i] += n.grad.data[i] * n.aux.data[i];
    }
  });
  nodes_[v].aux = std::move(mask);
  return v;
}

Graph::Var Graph::scale(Var a, double c) {
  Tensor out = nodes_[a].value;
  for (double& v : out.data) v *= c;
  return emplace(std::move(out), nodes_[a].needs_grad, "scale", [a, c](Graph& g, Node& n) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    for (std::size_t i = 0; i < n.grad.data.size(); ++i) da.data[i] += n.grad.data[i] * c;
  });
}

Graph::Var Graph::add_scalar(Var a, double c) {
  Tensor out = nodes_[a].value;
  for (double& v : out.data) v += c;
  return emplace(std::move(out), nodes_[a].needs_grad, "add_scalar",
                 [a](Graph& g, Node& n) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    for (std::size_t i = 0; i < n.grad.data.size(); ++i) da.data[i] += n.grad.data[i];
  });
}

Graph::Var Graph::neg(Var a) { return scale(a, -1.0); }

Graph::Var Graph::slice_cols(Var a, std::size_t c0, std::size_t c1) {
  const Tensor& ta = nodes_[a].value;
  require(c0 < c1 && c1 <= ta.cols(), "slice_cols: range [" + std::to_string(c0) + ", " +
                                          std::to_string(c1) + ") out of " +
                                          ta.shape_str());
  const std::size_t m = ta.rows(), n = ta.cols(), w = c1 - c0;
  Tensor out = Tensor::matrix(m, w);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < w; ++j) out.data[i * w + j] = ta.data[i * n + c0 + j];
  }
  return emplace(std::move(out), nodes_[a].needs_grad, "slice_cols",
                 [a, c0, w](Graph& g, Node& nd) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    const std::size_t m = nd.grad.rows(), n = da.cols();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        da.data[i * n + c0 + j] += nd.grad.data[i * w + j];
      }
    }
  });
}

Graph::Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: no inputs");
  const std::size_t m = nodes_[parts[0]].value.rows();
  std::size_t total = 0;
  bool ng = false;
  for (Var p : parts) {
    require(nodes_[p].value.rows() == m, "concat_cols: row counts differ: " +
                                             nodes_[parts[0]].value.shape_str() + " vs " +
                                             nodes_[p].value.shape_str());
    total += nodes_[p].value.cols();
    ng = ng || nodes_[p].needs_grad;
  }
  Tensor out = Tensor::matrix(m, total);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& tp = nodes_[p].value;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < tp.cols(); ++j) {
        out.data[i * total + off + j] = tp.data[i * tp.cols() + j];
      }
    }
    off += tp.cols();
  }
  std::vector<Var> ps = parts;
  return emplace(std::move(out), ng, "concat_cols", [ps](Graph& g, Node& nd) {
    const std::size_t m = nd.grad.rows(), total = nd.grad.cols();
    std::size_t off = 0;
    for (Var p : ps) {
      const std::size_t w = g.nodes_[p].value.cols();
      if (g.nodes_[p].needs_grad) {
        Tensor& dp = g.grad_buf(p);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < w; ++j) {
            dp.data[i * w + j] += nd.grad.data[i * total + off + j];
          }
        }
      }
      off += w;
    }
  });
}

Graph::Var Graph::mean_rows(Var a) {
  const Tensor& ta = nodes_[a].value;
  const std::size_t m = ta.rows(), n = ta.cols();
  Tensor out = Tensor::matrix(1, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.data[j] += ta.data[i * n + j];
  }
  for (double& v : out.data) v /= static_cast<double>(m);
  return emplace(std::move(out), nodes_[a].needs_grad, "mean_rows",
                 [a, m](Graph& g, Node& nd) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    const std::size_t n = nd.grad.cols();
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) da.data[i * n + j] += nd.grad.data[j] * inv_m;
    }
  });
}

Graph::Var Graph::mean_all(Var a) {
  const Tensor& ta = nodes_[a].value;
  double sum = 0.0;
  for (double v : ta.data) sum += v;
  const std::size_t count = ta.numel();
  Tensor out = Tensor::scalar(sum / static_cast<double>(count));
  return emplace(std::move(out), nodes_[a].needs_grad, "mean_all",
                 [a, count](Graph& g, Node& nd) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    const double gv = nd.grad.data[0] / static_cast<double>(count);
    for (double& v : da.data) v += gv;
  });
}

Graph::Var Graph::sum_all(Var a) {
  const Tensor& ta = nodes_[a].value;
  double sum = 0.0;
  for (double v : ta.data) sum += v;
  Tensor out = Tensor::scalar(sum);
  return emplace(std::move(out), nodes_[a].needs_grad, "sum_all", [a](Graph& g, Node& nd) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    const double gv = nd.grad.data[0];
    for (double& v : da.data) v += gv;
  });
}

Graph::Var Graph::pick(Var a, std::size_t r, std::size_t c) {
  const Tensor& ta = nodes_[a].value;
  require(r < ta.rows() && c < ta.cols(), "pick: (" + std::to_string(r) + ", " +
                                              std::to_string(c) + ") out of " +
                                              ta.shape_str());
  Tensor out = Tensor::scalar(ta.at(r, c));
  return emplace(std::move(out), nodes_[a].needs_grad, "pick",
                 [a, r, c](Graph& g, Node& nd) {
    if (!g.nodes_[a].needs_grad) return;
    g.grad_buf(a).at(r, c) += nd.grad.data[0];
  });
}

Graph::Var Graph::sum_rows_at(Var a, std::vector<std::uint32_t> rows) {
  const Tensor& ta = nodes_[a].value;
  require(ta.cols() == 1, "sum_rows_at: expected a column vector, got " + ta.shape_str());
  double sum = 0.0;
  for (std::uint32_t r : rows) {
    require(r < ta.rows(), "sum_rows_at: row " + std::to_string(r) + " out of " +
                               ta.shape_str());
    sum += ta.data[r];
  }
  Tensor out = Tensor::scalar(sum);
  return emplace(std::move(out), nodes_[a].needs_grad, "sum_rows_at",
                 [a, rows = std::move(rows)](Graph& g, Node& nd) {
    if (!g.nodes_[a].needs_grad) return;
    Tensor& da = g.grad_buf(a);
    for (std::uint32_t r : rows) da.data[r] += nd.grad.data[0];
  });
}

void Graph::backward(Var loss) {
  Node& ln = nodes_[loss];
  if (ln.value.numel() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + ln.value.shape_str());
  }
  for (Node& n : nodes_) n.grad = Tensor();
  grad_buf(loss).data[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.back && !n.grad.data.empty() && n.needs_grad) n.back(*this, n);
  }
}

void Graph::accumulate_param_grads() {
  for (const ParamBinding& pb : params_) {
    const Tensor& g = nodes_[pb.var].grad;
    if (g.data.empty()) continue;
    Tensor& dst = pb.store->grad(pb.name);
    for (std::size_t i = 0; i < g.data.size(); ++i) dst.data[i] += g.data[i];
  }
}

}  // namespace egs
