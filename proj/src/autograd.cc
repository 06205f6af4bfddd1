#include "eventbert/autograd.h"

#include <cmath>
#include <stdexcept>

#include "eventbert/errors.h"

namespace eventbert {

std::string_view group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::kEncoder: return "ptm";
    case ParamGroup::kCorrelation: return "cs";
    case ParamGroup::kContradiction: return "cet";
    case ParamGroup::kMlm: return "mlm";
    case ParamGroup::kTask: return "task";
  }
  return "?";
}

size_t ParameterStore::add(std::string name, Mat value, ParamGroup group, bool decay) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  params_.push_back({std::move(name), std::move(value), group, decay});
  return params_.size() - 1;
}

size_t ParameterStore::index(std::string_view name) const {
  for (size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  throw std::out_of_range("unknown parameter " + std::string(name));
}

bool ParameterStore::contains(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return true;
  return false;
}

size_t ParameterStore::scalar_count() const {
  size_t n = 0;
  for (const auto& p : params_) n += static_cast<size_t>(p.value.size());
  return n;
}

Gradients::Gradients(const ParameterStore& store) {
  g_.reserve(store.size());
  for (const auto& p : store.all()) g_.push_back(Mat::Zero(p.value.rows(), p.value.cols()));
}

void Gradients::zero() {
  for (auto& g : g_) g.setZero();
}

double Gradients::global_norm() const {
  double sq = 0;
  for (const auto& g : g_) sq += g.squaredNorm();
  return std::sqrt(sq);
}

void Gradients::scale(double factor) {
  for (auto& g : g_) g *= factor;
}

void Gradients::check_finite(const ParameterStore& store) const {
  for (size_t i = 0; i < g_.size(); ++i)
    if (!g_[i].allFinite())
      throw NumericalError("non-finite gradient for parameter " + store[i].name);
}

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

Tape::Var Tape::push(Mat value, Backward back) {
  Node n;
  n.value = std::move(value);
  if (record_) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Mat& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    const Mat& v = n.ref ? *n.ref : n.value;
    n.grad = Mat::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

const Mat& Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.ref ? *n.ref : n.value;
}

Tape::Var Tape::constant(Mat value) { return push(std::move(value)); }

Tape::Var Tape::param(const ParameterStore& store, size_t index) {
  Node n;
  n.ref = &store[index].value;
  n.param = static_cast<int>(index);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Tape::Var Tape::matmul(Var a, Var b) {
  Mat out;
  out.noalias() = value(a) * value(b);
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [a, b, out_id](Tape& t, Gradients&) {
    const Mat& g = t.nodes_[out_id].grad;
    t.grad(a.id).noalias() += g * t.value(b).transpose();
    t.grad(b.id).noalias() += t.value(a).transpose() * g;
  });
}

Tape::Var Tape::matmul_nt(Var a, Var b) {
  Mat out;
  out.noalias() = value(a) * value(b).transpose();
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [a, b, out_id](Tape& t, Gradients&) {
    const Mat& g = t.nodes_[out_id].grad;
    t.grad(a.id).noalias() += g * t.value(b);
    t.grad(b.id).noalias() += g.transpose() * t.value(a);
  });
}

Tape::Var Tape::add(Var a, Var b) {
  Mat out = value(a) + value(b);
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [a, b, out_id](Tape& t, Gradients&) {
    const Mat& g = t.nodes_[out_id].grad;
    t.grad(a.id) += g;
    t.grad(b.id) += g;
  });
}

Tape::Var Tape::add_row(Var a, Var row) {
  Mat out = value(a);
  out.rowwise() += value(row).row(0);
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [a, row, out_id](Tape& t, Gradients&) {
    const Mat& g = t.nodes_[out_id].grad;
    t.grad(a.id) += g;
    t.grad(row.id) += g.colwise().sum();
  });
}

Tape::Var Tape::scale(Var a, double factor) {
  Mat out = value(a) * factor;
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [a, factor, out_id](Tape& t, Gradients&) {
    t.grad(a.id) += t.nodes_[out_id].grad * factor;
  });
}

Tape::Var Tape::gelu(Var a) {
  const Mat& x = value(a);
  Mat out = x.unaryExpr([](double v) { return gelu_value(v); });
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [a, out_id](Tape& t, Gradients&) {
    const Mat& g = t.nodes_[out_id].grad;
    t.grad(a.id).array() +=
        g.array() * t.value(a).unaryExpr([](double v) { return gelu_derivative(v); }).array();
  });
}

Tape::Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Mat& in = value(x);
  const Eigen::Index rows = in.rows(), cols = in.cols();
  Mat xhat(rows, cols);
  Vec inv_std(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = in.row(r).mean();
    const double var = (in.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (in.row(r).array() - mean) * inv_std(r);
  }
  Mat out = xhat;
  out.array().rowwise() *= value(gamma).row(0).array();
  out.rowwise() += value(beta).row(0);
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [x, gamma, beta, out_id, xhat = std::move(xhat),
                               inv_std = std::move(inv_std)](Tape& t, Gradients&) {
    const Mat& g = t.nodes_[out_id].grad;
    t.grad(gamma.id) += (g.array() * xhat.array()).colwise().sum().matrix();
    t.grad(beta.id) += g.colwise().sum();
    Mat dxhat = g;
    dxhat.array().rowwise() *= t.value(gamma).row(0).array();
    const double inv_cols = 1.0 / static_cast<double>(dxhat.cols());
    Mat& gx = t.grad(x.id);
    for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
      const double m1 = dxhat.row(r).sum() * inv_cols;
      const double m2 = dxhat.row(r).dot(xhat.row(r)) * inv_cols;
      gx.row(r).array() +=
          inv_std(r) * (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2);
    }
  });
}

Tape::Var Tape::dropout(Var x, double p, Rng& rng) {
  if (p <= 0.0) return x;
  const Mat& in = value(x);
  Mat mask(in.rows(), in.cols());
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = rng.uniform() < p ? 0.0 : keep_scale;
  Mat out = in.cwiseProduct(mask);
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [x, out_id, mask = std::move(mask)](Tape& t, Gradients&) {
    t.grad(x.id) += t.nodes_[out_id].grad.cwiseProduct(mask);
  });
}

Tape::Var Tape::embedding(const ParameterStore& store, size_t index, std::span<const int> ids) {
  const Mat& table = store[index].value;
  Mat out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = table.row(ids[i]);
  const int out_id = static_cast<int>(nodes_.size());
  std::vector<int> rows(ids.begin(), ids.end());
  return push(std::move(out),
              [index, out_id, rows = std::move(rows)](Tape& t, Gradients& grads) {
                const Mat& g = t.nodes_[out_id].grad;
                Mat& target = grads[index];
                for (size_t i = 0; i < rows.size(); ++i)
                  target.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
              });
}

Tape::Var Tape::gather_rows(Var x, std::vector<size_t> rows) {
  const Mat& in = value(x);
  Mat out(static_cast<Eigen::Index>(rows.size()), in.cols());
  for (size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = in.row(static_cast<Eigen::Index>(rows[i]));
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [x, out_id, rows = std::move(rows)](Tape& t, Gradients&) {
    const Mat& g = t.nodes_[out_id].grad;
    Mat& gx = t.grad(x.id);
    for (size_t i = 0; i < rows.size(); ++i)
      gx.row(static_cast<Eigen::Index>(rows[i])) += g.row(static_cast<Eigen::Index>(i));
  });
}

Tape::Var Tape::attention(Var q, Var k, Var v, std::vector<Segment> segments, size_t heads) {
  const Mat& Q = value(q);
  const Mat& K = value(k);
  const Mat& V = value(v);
  const Eigen::Index d = Q.cols();
  const Eigen::Index dh = d / static_cast<Eigen::Index>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat out = Mat::Zero(Q.rows(), d);
  std::vector<Mat> probs;
  probs.reserve(segments.size() * heads);
  for (const auto& seg : segments) {
    const Eigen::Index o = static_cast<Eigen::Index>(seg.offset);
    const Eigen::Index L = static_cast<Eigen::Index>(seg.length);
    for (size_t h = 0; h < heads; ++h) {
      const Eigen::Index c = static_cast<Eigen::Index>(h) * dh;
      Mat s;
      s.noalias() = Q.block(o, c, L, dh) * K.block(o, c, L, dh).transpose();
      s *= scale;
      for (Eigen::Index r = 0; r < L; ++r) {
        const double mx = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - mx).exp();
        s.row(r) /= s.row(r).sum();
      }
      out.block(o, c, L, dh).noalias() = s * V.block(o, c, L, dh);
      probs.push_back(std::move(s));
    }
  }
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [q, k, v, out_id, heads, dh, scale,
                               segments = std::move(segments),
                               probs = std::move(probs)](Tape& t, Gradients&) {
    const Mat& g = t.nodes_[out_id].grad;
    Mat& gq = t.grad(q.id);
    Mat& gk = t.grad(k.id);
    Mat& gv = t.grad(v.id);
    const Mat& Q = t.value(q);
    const Mat& K = t.value(k);
    const Mat& V = t.value(v);
    size_t idx = 0;
    for (const auto& seg : segments) {
      const Eigen::Index o = static_cast<Eigen::Index>(seg.offset);
      const Eigen::Index L = static_cast<Eigen::Index>(seg.length);
      for (size_t h = 0; h < heads; ++h, ++idx) {
        const Eigen::Index c = static_cast<Eigen::Index>(h) * dh;
        const Mat& P = probs[idx];
        const auto go = g.block(o, c, L, dh);
        gv.block(o, c, L, dh).noalias() += P.transpose() * go;
        Mat dp;
        dp.noalias() = go * V.block(o, c, L, dh).transpose();
        Mat ds = P.cwiseProduct(dp);
        Vec row_dot = ds.rowwise().sum();
        ds.noalias() -= P.cwiseProduct(row_dot.replicate(1, L));
        ds *= scale;
        gq.block(o, c, L, dh).noalias() += ds * K.block(o, c, L, dh);
        gk.block(o, c, L, dh).noalias() += ds.transpose() * Q.block(o, c, L, dh);
      }
    }
  });
}

Tape::Var Tape::group_nll(Var scores, size_t group_size) {
  const size_t rows = static_cast<size_t>(value(scores).rows());
  return group_nll(scores, std::vector<size_t>(rows / group_size, group_size));
}

Tape::Var Tape::group_nll(Var scores, std::vector<size_t> sizes) {
  const Mat& s = value(scores);
  if (!s.allFinite()) throw NumericalError("non-finite ranking score");
  size_t total = 0;
  for (size_t n : sizes) total += n;
  if (sizes.empty() || total != static_cast<size_t>(s.rows()))
    throw ContractError("group sizes do not cover the scores");
  Mat soft(s.rows(), 1);
  double loss = 0;
  std::vector<Eigen::Index> starts;
  Eigen::Index at = 0;
  for (size_t n : sizes) {
    const auto block = s.block(at, 0, static_cast<Eigen::Index>(n), 1);
    const double mx = block.maxCoeff();
    const Mat e = (block.array() - mx).exp();
    const double z = e.sum();
    loss += mx + std::log(z) - block(0, 0);
    soft.block(at, 0, static_cast<Eigen::Index>(n), 1) = e / z;
    starts.push_back(at);
    at += static_cast<Eigen::Index>(n);
  }
  const double groups = static_cast<double>(sizes.size());
  loss /= groups;
  Mat out(1, 1);
  out(0, 0) = loss;
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [scores, groups, out_id, starts = std::move(starts),
                               soft = std::move(soft)](Tape& t, Gradients&) {
    const double g = t.nodes_[out_id].grad(0, 0) / groups;
    Mat d = soft;
    for (Eigen::Index st : starts) d(st, 0) -= 1.0;
    t.grad(scores.id) += d * g;
  });
}

Tape::Var Tape::bce_with_logits_sum(Var logits, std::vector<double> labels) {
  const Mat& z = value(logits);
  if (!z.allFinite()) throw NumericalError("non-finite tagging logit");
  double loss = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double x = z(i, 0);
    loss += std::max(x, 0.0) - labels[i] * x + std::log1p(std::exp(-std::abs(x)));
  }
  Mat out(1, 1);
  out(0, 0) = loss;
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [logits, out_id, labels = std::move(labels)](Tape& t, Gradients&) {
    const double g = t.nodes_[out_id].grad(0, 0);
    const Mat& z = t.value(logits);
    Mat& gz = t.grad(logits.id);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
      gz(i, 0) += g * (1.0 / (1.0 + std::exp(-z(i, 0))) - labels[i]);
  });
}

Tape::Var Tape::cross_entropy_mean(Var logits, std::vector<int> targets) {
  const Mat& z = value(logits);
  if (!z.allFinite()) throw NumericalError("non-finite vocabulary logit");
  const Eigen::Index n = z.rows();
  Mat soft(z.rows(), z.cols());
  double loss = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mx = z.row(r).maxCoeff();
    soft.row(r) = (z.row(r).array() - mx).exp();
    const double sum = soft.row(r).sum();
    soft.row(r) /= sum;
    loss += mx + std::log(sum) - z(r, targets[r]);
  }
  loss /= static_cast<double>(n);
  Mat out(1, 1);
  out(0, 0) = loss;
  const int out_id = static_cast<int>(nodes_.size());
  return push(std::move(out), [logits, out_id, soft = std::move(soft),
                               targets = std::move(targets)](Tape& t, Gradients&) {
    const double g = t.nodes_[out_id].grad(0, 0) / static_cast<double>(soft.rows());
    Mat d = soft;
    for (Eigen::Index r = 0; r < d.rows(); ++r) d(r, targets[r]) -= 1.0;
    t.grad(logits.id) += d * g;
  });
}

void Tape::backward(Var loss, Gradients& grads) {
  if (!record_) throw std::logic_error("backward on a non-recording tape");
  grad(loss.id).setConstant(1.0);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!has_grad(i)) continue;
    if (n.param >= 0) {
      grads[static_cast<size_t>(n.param)] += n.grad;
    } else if (n.back) {
      n.back(*this, grads);
    }
    // Intermediate gradients are no longer needed once propagated.
    if (n.param < 0) n.grad.resize(0, 0);
  }
}

}  // namespace eventbert
