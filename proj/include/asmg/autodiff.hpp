#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

namespace asmg::ad {

using Mat = Eigen::MatrixXd;

// Reverse-mode autodiff over dense matrices. Forward passes build an
// expression graph of shared_ptr nodes; backward() walks it once in
// reverse topological order.
struct Node {
    Mat val;
    Mat grad;  // same shape as val, lazily zeroed
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> back;  // reads this->grad, accumulates into parents
    bool requires_grad = false;

    void ensure_grad() {
        if (grad.size() == 0) grad = Mat::Zero(val.rows(), val.cols());
    }
};

using Var = std::shared_ptr<Node>;

inline Var constant(Mat v) {
    auto n = std::make_shared<Node>();
    n->val = std::move(v);
    return n;
}

inline Var scalar(double v) { return constant(Mat::Constant(1, 1, v)); }

inline Var param(Mat v) {
    auto n = std::make_shared<Node>();
    n->val = std::move(v);
    n->requires_grad = true;
    return n;
}

inline Var make_op(Mat v, std::vector<Var> parents, std::function<void(Node&)> back) {
    auto n = std::make_shared<Node>();
    n->val = std::move(v);
    bool rg = false;
    for (auto& p : parents) rg = rg || p->requires_grad;
    n->requires_grad = rg;
    if (rg) {
        n->parents = std::move(parents);
        n->back = std::move(back);
    }
    return n;
}

inline void accumulate(const Var& p, const Mat& g) {
    if (!p->requires_grad) return;
    p->ensure_grad();
    p->grad += g;
}

inline Var add(Var a, Var b) {
    return make_op(a->val + b->val, {a, b}, [](Node& n) {
        accumulate(n.parents[0], n.grad);
        accumulate(n.parents[1], n.grad);
    });
}

inline Var sub(Var a, Var b) {
    return make_op(a->val - b->val, {a, b}, [](Node& n) {
        accumulate(n.parents[0], n.grad);
        accumulate(n.parents[1], -n.grad);
    });
}

inline Var scale(Var a, double s) {
    return make_op(a->val * s, {a}, [s](Node& n) { accumulate(n.parents[0], n.grad * s); });
}

inline Var hadamard(Var a, Var b) {
    return make_op(a->val.cwiseProduct(b->val), {a, b}, [](Node& n) {
        accumulate(n.parents[0], n.grad.cwiseProduct(n.parents[1]->val));
        accumulate(n.parents[1], n.grad.cwiseProduct(n.parents[0]->val));
    });
}

inline Var cdiv(Var a, Var b) {
    return make_op(a->val.cwiseQuotient(b->val), {a, b}, [](Node& n) {
        const Mat& bv = n.parents[1]->val;
        accumulate(n.parents[0], n.grad.cwiseQuotient(bv));
        accumulate(n.parents[1],
                   -n.grad.cwiseProduct(n.val).cwiseQuotient(bv));
    });
}

// elementwise multiply by a fixed matrix (masks, degree scalings)
inline Var mul_const(Var a, const Mat& c) {
    return make_op(a->val.cwiseProduct(c), {a},
                   [c](Node& n) { accumulate(n.parents[0], n.grad.cwiseProduct(c)); });
}

inline Var matmul(Var a, Var b) {
    return make_op(a->val * b->val, {a, b}, [](Node& n) {
        accumulate(n.parents[0], n.grad * n.parents[1]->val.transpose());
        accumulate(n.parents[1], n.parents[0]->val.transpose() * n.grad);
    });
}

inline Var transpose(Var a) {
    return make_op(a->val.transpose(), {a},
                   [](Node& n) { accumulate(n.parents[0], n.grad.transpose()); });
}

inline Var exp(Var a) {
    return make_op(a->val.array().exp().matrix(), {a},
                   [](Node& n) { accumulate(n.parents[0], n.grad.cwiseProduct(n.val)); });
}

inline Var log(Var a) {
    return make_op(a->val.array().log().matrix(), {a}, [](Node& n) {
        accumulate(n.parents[0], n.grad.cwiseQuotient(n.parents[0]->val));
    });
}

inline Var tanh(Var a) {
    return make_op(a->val.array().tanh().matrix(), {a}, [](Node& n) {
        Mat one_minus = 1.0 - n.val.array().square();
        accumulate(n.parents[0], n.grad.cwiseProduct(one_minus.matrix()));
    });
}

inline Var square(Var a) {
    return make_op(a->val.array().square().matrix(), {a}, [](Node& n) {
        accumulate(n.parents[0], 2.0 * n.grad.cwiseProduct(n.parents[0]->val));
    });
}

// full reduction to a 1x1 node
inline Var sum(Var a) {
    return make_op(Mat::Constant(1, 1, a->val.sum()), {a}, [](Node& n) {
        accumulate(n.parents[0],
                   Mat::Constant(n.parents[0]->val.rows(), n.parents[0]->val.cols(),
                                 n.grad(0, 0)));
    });
}

inline Var cols(Var a, int start, int count) {
    return make_op(a->val.middleCols(start, count), {a}, [start, count](Node& n) {
        Mat g = Mat::Zero(n.parents[0]->val.rows(), n.parents[0]->val.cols());
        g.middleCols(start, count) = n.grad;
        accumulate(n.parents[0], g);
    });
}

inline Var gather_rows(Var a, const std::vector<int>& idx) {
    Mat v(static_cast<Eigen::Index>(idx.size()), a->val.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) v.row(i) = a->val.row(idx[i]);
    return make_op(std::move(v), {a}, [idx](Node& n) {
        Mat g = Mat::Zero(n.parents[0]->val.rows(), n.parents[0]->val.cols());
        for (std::size_t i = 0; i < idx.size(); ++i)
            g.row(idx[i]) += n.grad.row(i);
        accumulate(n.parents[0], g);
    });
}

// row-major reshape (Eigen storage is column-major, so map explicitly)
inline Var reshape_rowmajor(Var a, int rows, int cols_) {
    const Mat& v = a->val;
    Mat out(rows, cols_);
    int r0 = static_cast<int>(v.rows()), c0 = static_cast<int>(v.cols());
    for (int i = 0; i < rows * cols_; ++i)
        out(i / cols_, i % cols_) = v(i / c0, i % c0);
    return make_op(std::move(out), {a}, [r0, c0, cols_](Node& n) {
        Mat g(r0, c0);
        for (int i = 0; i < r0 * c0; ++i)
            g(i / c0, i % c0) = n.grad(i / cols_, i % cols_);
        accumulate(n.parents[0], g);
    });
}

// rowvec (1 x c) replicated n times
inline Var repeat_row(Var rowvec, int n_rows) {
    return make_op(rowvec->val.replicate(n_rows, 1), {rowvec}, [](Node& n) {
        accumulate(n.parents[0], n.grad.colwise().sum());
    });
}

// colvec (r x 1) replicated n times horizontally
inline Var repeat_col(Var colvec, int n_cols) {
    return make_op(colvec->val.replicate(1, n_cols), {colvec}, [](Node& n) {
        accumulate(n.parents[0], n.grad.rowwise().sum());
    });
}

// broadcast-add a 1x1 node over a matrix
inline Var add_scalar(Var a, Var s) {
    return make_op((a->val.array() + s->val(0, 0)).matrix(), {a, s}, [](Node& n) {
        accumulate(n.parents[0], n.grad);
        accumulate(n.parents[1], Mat::Constant(1, 1, n.grad.sum()));
    });
}

inline Var softmax_rows(Var a) {
    Mat v = a->val;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        Eigen::RowVectorXd r = v.row(i);
        r = (r.array() - r.maxCoeff()).exp();
        v.row(i) = r / r.sum();
    }
    return make_op(std::move(v), {a}, [](Node& n) {
        const Mat& s = n.val;
        Mat gs = n.grad.cwiseProduct(s);
        Eigen::VectorXd rowsum = gs.rowwise().sum();
        Mat g = gs - s.cwiseProduct(rowsum.replicate(1, s.cols()));
        accumulate(n.parents[0], g);
    });
}

// rowwise cross product of two N x 3 blocks
inline Var cross_rows(Var a, Var b) {
    Mat v(a->val.rows(), 3);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        Eigen::Vector3d x = a->val.row(i), y = b->val.row(i);
        v.row(i) = x.cross(y).transpose();
    }
    return make_op(std::move(v), {a, b}, [](Node& n) {
        Mat ga(n.grad.rows(), 3), gb(n.grad.rows(), 3);
        for (Eigen::Index i = 0; i < n.grad.rows(); ++i) {
            Eigen::Vector3d x = n.parents[0]->val.row(i);
            Eigen::Vector3d y = n.parents[1]->val.row(i);
            Eigen::Vector3d g = n.grad.row(i);
            ga.row(i) = y.cross(g).transpose();
            gb.row(i) = g.cross(x).transpose();
        }
        accumulate(n.parents[0], ga);
        accumulate(n.parents[1], gb);
    });
}

inline Var normalize_rows(Var a) {
    Mat v = a->val;
    Eigen::VectorXd lens = v.rowwise().norm();
    for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i) /= lens(i);
    return make_op(std::move(v), {a}, [lens](Node& n) {
        Mat g(n.grad.rows(), n.grad.cols());
        for (Eigen::Index i = 0; i < n.grad.rows(); ++i) {
            Eigen::RowVectorXd r = n.val.row(i);
            Eigen::RowVectorXd gi = n.grad.row(i);
            g.row(i) = (gi - r * (r.dot(gi))) / lens(i);
        }
        accumulate(n.parents[0], g);
    });
}

// Chamfer distance between two point sets as a differentiable 1x1 node.
// Nearest-neighbor pairings are held fixed at the evaluation point.
inline Var chamfer(Var a, Var b) {
    const Mat& av = a->val;
    const Mat& bv = b->val;
    std::vector<int> nn_ab(av.rows()), nn_ba(bv.rows());
    double total = 0.0;
    for (Eigen::Index i = 0; i < av.rows(); ++i) {
        Eigen::Index best;
        total += (bv.rowwise() - av.row(i)).rowwise().squaredNorm().minCoeff(&best);
        nn_ab[i] = static_cast<int>(best);
    }
    for (Eigen::Index j = 0; j < bv.rows(); ++j) {
        Eigen::Index best;
        total += (av.rowwise() - bv.row(j)).rowwise().squaredNorm().minCoeff(&best);
        nn_ba[j] = static_cast<int>(best);
    }
    return make_op(Mat::Constant(1, 1, total), {a, b}, [nn_ab, nn_ba](Node& n) {
        const Mat& av = n.parents[0]->val;
        const Mat& bv = n.parents[1]->val;
        double g = n.grad(0, 0);
        Mat ga = Mat::Zero(av.rows(), av.cols());
        Mat gb = Mat::Zero(bv.rows(), bv.cols());
        for (Eigen::Index i = 0; i < av.rows(); ++i) {
            Eigen::RowVectorXd d = av.row(i) - bv.row(nn_ab[i]);
            ga.row(i) += 2.0 * g * d;
            gb.row(nn_ab[i]) -= 2.0 * g * d;
        }
        for (Eigen::Index j = 0; j < bv.rows(); ++j) {
            Eigen::RowVectorXd d = bv.row(j) - av.row(nn_ba[j]);
            gb.row(j) += 2.0 * g * d;
            ga.row(nn_ba[j]) -= 2.0 * g * d;
        }
        accumulate(n.parents[0], ga);
        accumulate(n.parents[1], gb);
    });
}

// Mean over vertices of squared distance to the neighbor centroid.
inline Var laplacian(Var pos, const std::vector<std::vector<int>>& neighbors) {
    const Mat& x = pos->val;
    const int n = static_cast<int>(x.rows());
    Mat diff(n, x.cols());
    for (int j = 0; j < n; ++j) {
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
        for (int q : neighbors[j]) mean += x.row(q);
        mean /= static_cast<double>(neighbors[j].size());
        diff.row(j) = x.row(j) - mean;
    }
    double val = diff.rowwise().squaredNorm().sum() / n;
    return make_op(Mat::Constant(1, 1, val), {pos}, [neighbors, diff, n](Node& nd) {
        double g = nd.grad(0, 0);
        Mat gx = (2.0 * g / n) * diff;
        for (int j = 0; j < n; ++j) {
            double w = 1.0 / static_cast<double>(neighbors[j].size());
            for (int q : neighbors[j]) gx.row(q) -= (2.0 * g / n) * w * diff.row(j);
        }
        accumulate(nd.parents[0], gx);
    });
}

inline void backward(const Var& root) {
    // reverse topological order via iterative post-order DFS
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Var, std::size_t>> stack;
    if (!root->requires_grad) return;
    stack.push_back({root, 0});
    seen.insert(root.get());
    std::vector<Var> keep;  // keep shared ownership during traversal
    keep.push_back(root);
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Var p = node->parents[idx++];
            if (p->requires_grad && !seen.count(p.get())) {
                seen.insert(p.get());
                keep.push_back(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(node.get());
            stack.pop_back();
        }
    }
    root->ensure_grad();
    root->grad.setConstant(1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->back) {
            n->ensure_grad();
            n->back(*n);
        }
    }
}

// Gaussian KL(q || N(0,I)) summed over all entries of (mean, log_var).
inline Var gaussian_kl(Var mean, Var log_var) {
    Var var = exp(log_var);
    Var inner = sub(add(square(mean), var), log_var);
    return scale(sub(sum(inner), scalar(static_cast<double>(mean->val.size()))), 0.5);
}

// sum of squared differences
inline Var squared_error(Var a, Var b) { return sum(square(sub(a, b))); }

}  // namespace asmg::ad
