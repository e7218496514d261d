#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trignet/mat.hpp"

namespace trignet {

class ParamStore;

using NodeId = int;

/// Gradients keyed by parameter name. Parameters never touched by the
/// tape appear with zero matrices of matching shape.
using GradMap = std::map<std::string, Mat>;

/// FLOP accounting convention, shared with the analytic cost model:
///   multiply = 1, add = 1 (so one multiply-add = 2),
///   exp = 4, div = 4, log = 4, tanh = 8, leaky_relu = 1 per entry,
///   comparisons / copies / gathers = 0.
/// The instrumented counter below and cost.hpp must agree exactly.
namespace flops {
constexpr uint64_t kExp = 4;
constexpr uint64_t kDiv = 4;
constexpr uint64_t kLog = 4;
constexpr uint64_t kTanh = 8;
/// Per-entry cost of a normalized softmax entry:
/// max-subtract (1) + exp (4) + sum-accumulate (1) + divide (4).
constexpr uint64_t kSoftmaxEntry = 10;
}  // namespace flops

/// Reverse-mode tape over Mat values. Operations execute eagerly, so a
/// node's value is available as soon as it is recorded; recording order
/// is the topological order the backward pass walks in reverse.
///
/// Every primitive validates that its output is finite and throws
/// otherwise; at desk scale the check is cheap and turns silent NaN
/// propagation into an immediate error.
class Tape {
  public:
    /// Leaf that receives no gradient.
    NodeId constant(Mat value);

    /// Leaf bound to a named parameter in `store`; the current value is
    /// copied in. The same parameter may appear at several nodes (tied
    /// weights); gradients accumulate.
    NodeId param(const ParamStore& store, const std::string& name);

    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId scale(NodeId a, double s);
    NodeId concat_cols(const std::vector<NodeId>& parts);
    /// Column-wise mean over rows: R x C -> 1 x C.
    NodeId mean_rows(NodeId a);
    NodeId leaky_relu(NodeId a, double negative_slope);
    NodeId tanh(NodeId a);

    /// Row softmax with an optional 0/1 mask (1 = participate). Masked
    /// entries produce 0; fully masked rows produce an all-zero row
    /// rather than NaN. Without a mask all entries participate.
    NodeId masked_row_softmax(NodeId a, std::optional<Mat> mask = std::nullopt);

    /// Softmax over the entries of an E x 1 column grouped by segment id
    /// (the sparse counterpart of masked_row_softmax; segments are the
    /// query nodes of a message-passing call). Empty segments simply
    /// have no entries. `segments[e]` in [0, num_segments).
    NodeId segment_softmax(NodeId a, std::vector<int> segments, int num_segments);

    /// Row gather: out[e] = a[index[e]].
    NodeId gather_rows(NodeId a, std::vector<int> index);
    /// Row scatter-add into `out_rows` zero rows: out[index[e]] += a[e].
    NodeId scatter_add_rows(NodeId a, std::vector<int> index, int out_rows);

    /// out[i][j] = m[i][j] * col[i][0]  (col is R x 1).
    NodeId mul_col_broadcast(NodeId m, NodeId col);
    /// out = s * m where s is a 1 x 1 node.
    NodeId mul_scalar_node(NodeId m, NodeId s);
    /// Elementwise multiply by a constant matrix (dropout masks).
    NodeId hadamard_const(NodeId m, Mat factor);
    /// 1 x 1 view of entry (r, c).
    NodeId pick(NodeId a, int r, int c);
    /// Elementwise -log(max(x, 1e-12)).
    NodeId neg_log_clamped(NodeId a);

    const Mat& value(NodeId id) const { return nodes_[id].value; }
    /// Gradient of the last backward() target w.r.t. node `id`.
    const Mat& grad(NodeId id) const;

    /// Reverse pass from a scalar (1 x 1) node. Throws otherwise.
    void backward(NodeId loss);

    /// Collect parameter gradients after backward(); every parameter in
    /// `store` is present, zero-filled when unreachable from the loss.
    GradMap param_grads(const ParamStore& store) const;

    size_t node_count() const { return nodes_.size(); }
    /// Forward FLOPs recorded so far, per the convention above.
    uint64_t flop_count() const { return flops_; }
    /// Total scalar values held by forward activations (all nodes).
    uint64_t value_count() const { return value_count_; }

  private:
    enum class Op {
        Constant,
        Param,
        MatMul,
        Add,
        Scale,
        ConcatCols,
        MeanRows,
        LeakyRelu,
        Tanh,
        MaskedRowSoftmax,
        SegmentSoftmax,
        GatherRows,
        ScatterAddRows,
        MulColBroadcast,
        MulScalarNode,
        HadamardConst,
        Pick,
        NegLogClamped,
    };

    struct Node {
        Op op;
        Mat value;
        int a = -1;
        int b = -1;
        double scalar = 0.0;            // Scale slope / LeakyRelu slope
        std::vector<int> index;         // gather/scatter/segment ids, concat input list
        int aux = 0;                    // scatter out_rows / segment count / pick row
        int aux2 = 0;                   // pick col
        Mat cmat;                       // mask or constant factor
        std::string param_name;
    };

    NodeId push(Node n);
    void check_id(NodeId id) const;

    std::vector<Node> nodes_;
    std::vector<Mat> grads_;
    uint64_t flops_ = 0;
    uint64_t value_count_ = 0;
};

/// Runs backward from `loss` and returns gradients for every parameter
/// in `store` (zeros for parameters the loss does not reach).
GradMap forward_backward(Tape& tape, NodeId loss, const ParamStore& store);

}  // namespace trignet
