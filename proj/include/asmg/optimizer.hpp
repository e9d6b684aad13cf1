#pragma once

#include "asmg/autodiff.hpp"

namespace asmg {

// Adam over a fixed list of leaf parameter nodes.
class Adam {
  public:
    explicit Adam(std::vector<ad::Var> params, double lr = 1e-3, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto& p : params_) {
            m_.push_back(ad::Mat::Zero(p->val.rows(), p->val.cols()));
            v_.push_back(ad::Mat::Zero(p->val.rows(), p->val.cols()));
        }
    }

    void zero_grad() {
        for (auto& p : params_)
            if (p->grad.size() > 0) p->grad.setZero();
    }

    void step() {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            if (p->grad.size() == 0) continue;
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p->grad;
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
            ad::Mat mhat = m_[i] / bc1;
            ad::Mat vhat = v_[i] / bc2;
            p->val -= lr_ * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps_).matrix());
        }
    }

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

  private:
    std::vector<ad::Var> params_;
    std::vector<ad::Mat> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

}  // namespace asmg
