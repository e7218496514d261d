#include "trignet/tape.hpp"

#include <algorithm>
#include <cmath>

#include "trignet/param_store.hpp"

namespace trignet {

namespace {
constexpr double kLogClamp = 1e-12;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::runtime_error(msg);
}
}  // namespace

NodeId Tape::push(Node n) {
    if (!n.value.all_finite())
        throw std::runtime_error("tape: non-finite value produced at node " +
                                 std::to_string(nodes_.size()));
    value_count_ += n.value.size();
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_id(NodeId id) const {
    require(id >= 0 && id < static_cast<NodeId>(nodes_.size()), "tape: bad node id");
}

NodeId Tape::constant(Mat value) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Tape::param(const ParamStore& store, const std::string& name) {
    Node n;
    n.op = Op::Param;
    n.value = store.get(name);
    n.param_name = name;
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    Node n;
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.value = trignet::matmul(nodes_[a].value, nodes_[b].value);
    flops_ += 2ull * nodes_[a].value.rows * nodes_[a].value.cols * nodes_[b].value.cols;
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    const Mat& A = nodes_[a].value;
    const Mat& B = nodes_[b].value;
    require(A.same_shape(B), "add: shape mismatch " + shape_str(A) + " vs " + shape_str(B));
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.value = A;
    for (size_t i = 0; i < B.size(); ++i) n.value.data[i] += B.data[i];
    flops_ += A.size();
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
    check_id(a);
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.scalar = s;
    n.value = nodes_[a].value;
    for (double& v : n.value.data) v *= s;
    flops_ += n.value.size();
    return push(std::move(n));
}

NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
    require(!parts.empty(), "concat_cols: no inputs");
    int rows = nodes_[parts[0]].value.rows;
    int cols = 0;
    for (NodeId p : parts) {
        check_id(p);
        require(nodes_[p].value.rows == rows, "concat_cols: row mismatch");
        cols += nodes_[p].value.cols;
    }
    Node n;
    n.op = Op::ConcatCols;
    n.index.assign(parts.begin(), parts.end());
    n.value = Mat(rows, cols);
    int off = 0;
    for (NodeId p : parts) {
        const Mat& src = nodes_[p].value;
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < src.cols; ++j) n.value.at(i, off + j) = src.at(i, j);
        off += src.cols;
    }
    return push(std::move(n));
}

NodeId Tape::mean_rows(NodeId a) {
    check_id(a);
    const Mat& A = nodes_[a].value;
    require(A.rows > 0, "mean_rows: empty input");
    Node n;
    n.op = Op::MeanRows;
    n.a = a;
    n.value = Mat(1, A.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) n.value.at(0, j) += A.at(i, j);
    for (int j = 0; j < A.cols; ++j) n.value.at(0, j) /= A.rows;
    flops_ += A.size() + static_cast<uint64_t>(A.cols) * flops::kDiv;
    return push(std::move(n));
}

NodeId Tape::leaky_relu(NodeId a, double negative_slope) {
    check_id(a);
    Node n;
    n.op = Op::LeakyRelu;
    n.a = a;
    n.scalar = negative_slope;
    n.value = nodes_[a].value;
    for (double& v : n.value.data)
        if (v < 0.0) v *= negative_slope;
    flops_ += n.value.size();
    return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) {
    check_id(a);
    Node n;
    n.op = Op::Tanh;
    n.a = a;
    n.value = nodes_[a].value;
    for (double& v : n.value.data) v = std::tanh(v);
    flops_ += n.value.size() * flops::kTanh;
    return push(std::move(n));
}

NodeId Tape::masked_row_softmax(NodeId a, std::optional<Mat> mask) {
    check_id(a);
    const Mat& A = nodes_[a].value;
    if (mask) {
        require(mask->same_shape(A), "masked_row_softmax: mask shape mismatch");
        for (double v : mask->data) require(v == 0.0 || v == 1.0, "masked_row_softmax: mask not 0/1");
    }
    Node n;
    n.op = Op::MaskedRowSoftmax;
    n.a = a;
    n.value = Mat(A.rows, A.cols);
    if (mask) n.cmat = *mask;
    uint64_t live = 0;
    for (int i = 0; i < A.rows; ++i) {
        double mx = -HUGE_VAL;
        for (int j = 0; j < A.cols; ++j)
            if (!mask || mask->at(i, j) != 0.0) mx = std::max(mx, A.at(i, j));
        if (mx == -HUGE_VAL) continue;  // fully masked row stays zero
        double sum = 0.0;
        for (int j = 0; j < A.cols; ++j) {
            if (mask && mask->at(i, j) == 0.0) continue;
            double e = std::exp(A.at(i, j) - mx);
            n.value.at(i, j) = e;
            sum += e;
            ++live;
        }
        for (int j = 0; j < A.cols; ++j)
            if (!mask || mask->at(i, j) != 0.0) n.value.at(i, j) /= sum;
    }
    flops_ += live * flops::kSoftmaxEntry;
    return push(std::move(n));
}

NodeId Tape::segment_softmax(NodeId a, std::vector<int> segments, int num_segments) {
    check_id(a);
    const Mat& A = nodes_[a].value;
    require(A.cols == 1, "segment_softmax: input must be E x 1");
    require(static_cast<int>(segments.size()) == A.rows, "segment_softmax: segment count mismatch");
    for (int s : segments) require(s >= 0 && s < num_segments, "segment_softmax: segment id out of range");
    Node n;
    n.op = Op::SegmentSoftmax;
    n.a = a;
    n.aux = num_segments;
    n.value = Mat(A.rows, 1);
    std::vector<double> mx(num_segments, -HUGE_VAL), sum(num_segments, 0.0);
    for (int e = 0; e < A.rows; ++e) mx[segments[e]] = std::max(mx[segments[e]], A.at(e, 0));
    for (int e = 0; e < A.rows; ++e) {
        double v = std::exp(A.at(e, 0) - mx[segments[e]]);
        n.value.at(e, 0) = v;
        sum[segments[e]] += v;
    }
    for (int e = 0; e < A.rows; ++e) n.value.at(e, 0) /= sum[segments[e]];
    n.index = std::move(segments);
    flops_ += static_cast<uint64_t>(A.rows) * flops::kSoftmaxEntry;
    return push(std::move(n));
}

NodeId Tape::gather_rows(NodeId a, std::vector<int> index) {
    check_id(a);
    const Mat& A = nodes_[a].value;
    for (int i : index) require(i >= 0 && i < A.rows, "gather_rows: index out of range");
    Node n;
    n.op = Op::GatherRows;
    n.a = a;
    n.value = Mat(static_cast<int>(index.size()), A.cols);
    for (size_t e = 0; e < index.size(); ++e)
        for (int j = 0; j < A.cols; ++j) n.value.at(static_cast<int>(e), j) = A.at(index[e], j);
    n.index = std::move(index);
    return push(std::move(n));
}

NodeId Tape::scatter_add_rows(NodeId a, std::vector<int> index, int out_rows) {
    check_id(a);
    const Mat& A = nodes_[a].value;
    require(static_cast<int>(index.size()) == A.rows, "scatter_add_rows: index count mismatch");
    for (int i : index) require(i >= 0 && i < out_rows, "scatter_add_rows: index out of range");
    Node n;
    n.op = Op::ScatterAddRows;
    n.a = a;
    n.aux = out_rows;
    n.value = Mat(out_rows, A.cols);
    for (int e = 0; e < A.rows; ++e)
        for (int j = 0; j < A.cols; ++j) n.value.at(index[e], j) += A.at(e, j);
    n.index = std::move(index);
    flops_ += A.size();
    return push(std::move(n));
}

NodeId Tape::mul_col_broadcast(NodeId m, NodeId col) {
    check_id(m);
    check_id(col);
    const Mat& M = nodes_[m].value;
    const Mat& C = nodes_[col].value;
    require(C.cols == 1 && C.rows == M.rows, "mul_col_broadcast: column shape mismatch");
    Node n;
    n.op = Op::MulColBroadcast;
    n.a = m;
    n.b = col;
    n.value = M;
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) n.value.at(i, j) *= C.at(i, 0);
    flops_ += M.size();
    return push(std::move(n));
}

NodeId Tape::mul_scalar_node(NodeId m, NodeId s) {
    check_id(m);
    check_id(s);
    const Mat& S = nodes_[s].value;
    require(S.rows == 1 && S.cols == 1, "mul_scalar_node: scalar operand must be 1x1");
    Node n;
    n.op = Op::MulScalarNode;
    n.a = m;
    n.b = s;
    n.value = nodes_[m].value;
    for (double& v : n.value.data) v *= S.at(0, 0);
    flops_ += n.value.size();
    return push(std::move(n));
}

NodeId Tape::hadamard_const(NodeId m, Mat factor) {
    check_id(m);
    const Mat& M = nodes_[m].value;
    require(factor.same_shape(M), "hadamard_const: shape mismatch");
    Node n;
    n.op = Op::HadamardConst;
    n.a = m;
    n.value = M;
    for (size_t i = 0; i < factor.size(); ++i) n.value.data[i] *= factor.data[i];
    n.cmat = std::move(factor);
    flops_ += M.size();
    return push(std::move(n));
}

NodeId Tape::pick(NodeId a, int r, int c) {
    check_id(a);
    const Mat& A = nodes_[a].value;
    require(r >= 0 && r < A.rows && c >= 0 && c < A.cols, "pick: index out of range");
    Node n;
    n.op = Op::Pick;
    n.a = a;
    n.aux = r;
    n.aux2 = c;
    n.value = Mat(1, 1);
    n.value.at(0, 0) = A.at(r, c);
    return push(std::move(n));
}

NodeId Tape::neg_log_clamped(NodeId a) {
    check_id(a);
    Node n;
    n.op = Op::NegLogClamped;
    n.a = a;
    n.value = nodes_[a].value;
    for (double& v : n.value.data) v = -std::log(std::max(v, kLogClamp));
    flops_ += n.value.size() * (flops::kLog + 1);
    return push(std::move(n));
}

const Mat& Tape::grad(NodeId id) const {
    check_id(id);
    require(!grads_.empty(), "grad: backward() has not run");
    return grads_[id];
}

void Tape::backward(NodeId loss) {
    check_id(loss);
    const Mat& L = nodes_[loss].value;
    require(L.rows == 1 && L.cols == 1, "backward: loss node must be scalar, got " + shape_str(L));

    grads_.assign(nodes_.size(), Mat());
    for (size_t i = 0; i < nodes_.size(); ++i)
        grads_[i] = Mat(nodes_[i].value.rows, nodes_[i].value.cols);
    grads_[loss].at(0, 0) = 1.0;

    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
        const Node& n = nodes_[id];
        const Mat& g = grads_[id];
        switch (n.op) {
            case Op::Constant:
            case Op::Param:
                break;
            case Op::MatMul: {
                const Mat& A = nodes_[n.a].value;
                const Mat& B = nodes_[n.b].value;
                // dA += g * B^T ; dB += A^T * g
                Mat& dA = grads_[n.a];
                for (int i = 0; i < A.rows; ++i)
                    for (int k = 0; k < A.cols; ++k) {
                        double acc = 0.0;
                        for (int j = 0; j < B.cols; ++j) acc += g.at(i, j) * B.at(k, j);
                        dA.at(i, k) += acc;
                    }
                Mat& dB = grads_[n.b];
                for (int k = 0; k < B.rows; ++k)
                    for (int j = 0; j < B.cols; ++j) {
                        double acc = 0.0;
                        for (int i = 0; i < A.rows; ++i) acc += A.at(i, k) * g.at(i, j);
                        dB.at(k, j) += acc;
                    }
                break;
            }
            case Op::Add: {
                for (size_t i = 0; i < g.size(); ++i) {
                    grads_[n.a].data[i] += g.data[i];
                    grads_[n.b].data[i] += g.data[i];
                }
                break;
            }
            case Op::Scale: {
                for (size_t i = 0; i < g.size(); ++i) grads_[n.a].data[i] += n.scalar * g.data[i];
                break;
            }
            case Op::ConcatCols: {
                int off = 0;
                for (int p : n.index) {
                    Mat& dp = grads_[p];
                    for (int i = 0; i < dp.rows; ++i)
                        for (int j = 0; j < dp.cols; ++j) dp.at(i, j) += g.at(i, off + j);
                    off += dp.cols;
                }
                break;
            }
            case Op::MeanRows: {
                Mat& da = grads_[n.a];
                const double inv = 1.0 / da.rows;
                for (int i = 0; i < da.rows; ++i)
                    for (int j = 0; j < da.cols; ++j) da.at(i, j) += g.at(0, j) * inv;
                break;
            }
            case Op::LeakyRelu: {
                const Mat& x = nodes_[n.a].value;
                for (size_t i = 0; i < g.size(); ++i)
                    grads_[n.a].data[i] += g.data[i] * (x.data[i] > 0.0 ? 1.0 : n.scalar);
                break;
            }
            case Op::Tanh: {
                for (size_t i = 0; i < g.size(); ++i)
                    grads_[n.a].data[i] += g.data[i] * (1.0 - n.value.data[i] * n.value.data[i]);
                break;
            }
            case Op::MaskedRowSoftmax: {
                const Mat& y = n.value;
                const bool has_mask = n.cmat.size() > 0;
                Mat& da = grads_[n.a];
                for (int i = 0; i < y.rows; ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < y.cols; ++j) dot += g.at(i, j) * y.at(i, j);
                    for (int j = 0; j < y.cols; ++j) {
                        if (has_mask && n.cmat.at(i, j) == 0.0) continue;
                        da.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
                    }
                }
                break;
            }
            case Op::SegmentSoftmax: {
                const Mat& y = n.value;
                std::vector<double> dot(n.aux, 0.0);
                for (int e = 0; e < y.rows; ++e) dot[n.index[e]] += g.at(e, 0) * y.at(e, 0);
                Mat& da = grads_[n.a];
                for (int e = 0; e < y.rows; ++e)
                    da.at(e, 0) += y.at(e, 0) * (g.at(e, 0) - dot[n.index[e]]);
                break;
            }
            case Op::GatherRows: {
                Mat& da = grads_[n.a];
                for (int e = 0; e < g.rows; ++e)
                    for (int j = 0; j < g.cols; ++j) da.at(n.index[e], j) += g.at(e, j);
                break;
            }
            case Op::ScatterAddRows: {
                Mat& da = grads_[n.a];
                for (int e = 0; e < da.rows; ++e)
                    for (int j = 0; j < da.cols; ++j) da.at(e, j) += g.at(n.index[e], j);
                break;
            }
            case Op::MulColBroadcast: {
                const Mat& M = nodes_[n.a].value;
                const Mat& C = nodes_[n.b].value;
                Mat& dM = grads_[n.a];
                Mat& dC = grads_[n.b];
                for (int i = 0; i < M.rows; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < M.cols; ++j) {
                        dM.at(i, j) += g.at(i, j) * C.at(i, 0);
                        acc += g.at(i, j) * M.at(i, j);
                    }
                    dC.at(i, 0) += acc;
                }
                break;
            }
            case Op::MulScalarNode: {
                const Mat& M = nodes_[n.a].value;
                const double s = nodes_[n.b].value.at(0, 0);
                double acc = 0.0;
                for (size_t i = 0; i < g.size(); ++i) {
                    grads_[n.a].data[i] += s * g.data[i];
                    acc += g.data[i] * M.data[i];
                }
                grads_[n.b].at(0, 0) += acc;
                break;
            }
            case Op::HadamardConst: {
                for (size_t i = 0; i < g.size(); ++i)
                    grads_[n.a].data[i] += g.data[i] * n.cmat.data[i];
                break;
            }
            case Op::Pick: {
                grads_[n.a].at(n.aux, n.aux2) += g.at(0, 0);
                break;
            }
            case Op::NegLogClamped: {
                const Mat& x = nodes_[n.a].value;
                for (size_t i = 0; i < g.size(); ++i)
                    if (x.data[i] > kLogClamp) grads_[n.a].data[i] += g.data[i] * (-1.0 / x.data[i]);
                break;
            }
        }
    }
}

GradMap Tape::param_grads(const ParamStore& store) const {
    require(!grads_.empty(), "param_grads: backward() has not run");
    GradMap out;
    for (const auto& e : store.entries()) out[e.name] = Mat(e.value.rows, e.value.cols);
    for (size_t id = 0; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        if (n.op != Op::Param) continue;
        auto it = out.find(n.param_name);
        require(it != out.end(), "param_grads: tape references unknown parameter " + n.param_name);
        Mat& acc = it->second;
        for (size_t i = 0; i < acc.size(); ++i) acc.data[i] += grads_[id].data[i];
    }
    return out;
}

GradMap forward_backward(Tape& tape, NodeId loss, const ParamStore& store) {
    tape.backward(loss);
    return tape.param_grads(store);
}

}  // namespace trignet
