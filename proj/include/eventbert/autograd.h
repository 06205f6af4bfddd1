// Reverse-mode automatic differentiation over dense row-major matrices.
//
// A Tape records operations as they run; backward() walks them in reverse
// and accumulates parameter gradients into a Gradients buffer. Rows are
// tokens: several sequences are packed one after another and attention is
// restricted to each sequence's Segment.

#ifndef EVENTBERT_AUTOGRAD_H_
#define EVENTBERT_AUTOGRAD_H_

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eventbert/rng.h"

namespace eventbert {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

enum class ParamGroup { kEncoder, kCorrelation, kContradiction, kMlm, kTask };

std::string_view group_name(ParamGroup g);

struct Parameter {
  std::string name;
  Mat value;
  ParamGroup group;
  bool decay;  // false for biases and layer-norm parameters
};

class ParameterStore {
 public:
  size_t add(std::string name, Mat value, ParamGroup group, bool decay);
  size_t size() const { return params_.size(); }
  Parameter& operator[](size_t i) { return params_[i]; }
  const Parameter& operator[](size_t i) const { return params_[i]; }
  // Throws std::out_of_range for unknown names.
  size_t index(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  size_t scalar_count() const;

 private:
  std::vector<Parameter> params_;
};

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore& store);

  Mat& operator[](size_t i) { return g_[i]; }
  const Mat& operator[](size_t i) const { return g_[i]; }
  size_t size() const { return g_.size(); }
  void zero();
  double global_norm() const;
  void scale(double factor);
  // Throws NumericalError naming the first parameter with a non-finite entry.
  void check_finite(const ParameterStore& store) const;

 private:
  std::vector<Mat> g_;
};

struct Segment {
  size_t offset;
  size_t length;
};

class Tape {
 public:
  struct Var {
    int id = -1;
  };

  // With record=false no backward closures are kept (inference).
  explicit Tape(bool record = true) : record_(record) {}

  Var constant(Mat value);
  Var param(const ParameterStore& store, size_t index);
  const Mat& value(Var v) const;
  double scalar(Var v) const { return value(v)(0, 0); }

  Var matmul(Var a, Var b);     // a * b
  Var matmul_nt(Var a, Var b);  // a * b^T
  Var add(Var a, Var b);
  Var add_row(Var a, Var row);  // row is 1 x cols, broadcast over a's rows
  Var scale(Var a, double factor);
  Var gelu(Var a);
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var dropout(Var x, double p, Rng& rng);
  // Rows of a parameter table; gradient is scattered back sparsely.
  Var embedding(const ParameterStore& store, size_t index, std::span<const int> ids);
  Var gather_rows(Var x, std::vector<size_t> rows);
  // Multi-head softmax attention within each segment.
  Var attention(Var q, Var k, Var v, std::vector<Segment> segments, size_t heads);

  // Mean over groups of -log softmax(group)[0]. scores is (groups*size) x 1.
  Var group_nll(Var scores, size_t group_size);
  // Same with consecutive groups of the given sizes.
  Var group_nll(Var scores, std::vector<size_t> sizes);
  // Sum of binary cross-entropy with logits. labels are 0 or 1.
  Var bce_with_logits_sum(Var logits, std::vector<double> labels);
  // Mean over rows of -log softmax(row)[target].
  Var cross_entropy_mean(Var logits, std::vector<int> targets);

  void backward(Var loss, Gradients& grads);

  size_t node_count() const { return nodes_.size(); }

 private:
  using Backward = std::function<void(Tape&, Gradients&)>;

  struct Node {
    Mat value;
    Mat grad;
    const Mat* ref = nullptr;  // parameter leaves alias the store
    int param = -1;
    Backward back;
  };

  Var push(Mat value, Backward back = {});
  Mat& grad(int id);
  bool has_grad(int id) const { return nodes_[id].grad.size() != 0; }

  bool record_;
  std::vector<Node> nodes_;
};

double gelu_value(double x);
double gelu_derivative(double x);

}  // namespace eventbert

#endif  // EVENTBERT_AUTOGRAD_H_
