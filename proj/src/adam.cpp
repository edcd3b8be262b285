#include "dancer/adam.hpp"

#include <cmath>

namespace dancer {

void AdamState::step(ParamSet& params) {
    if (m_.empty()) {
        for (auto& p : params) {
            m_.push_back(Tensor::zeros(p.value.shape()));
            v_.push_back(Tensor::zeros(p.value.shape()));
        }
    }
    if (m_.size() != params.size()) throw UsageError("optimizer bound to a different parameter set");

    for (size_t i = 0; i < params.size(); ++i) {
        if (!m_[i].same_shape(params[i].value))
            throw UsageError("optimizer bound to a different parameter set");
        if (!params[i].grad.all_finite())
            throw TrainError("non-finite gradient in parameter " + params[i].name);
    }

    ++step_;
    real_t bc1 = 1.0 - std::pow(beta1_, static_cast<real_t>(step_));
    real_t bc2 = 1.0 - std::pow(beta2_, static_cast<real_t>(step_));
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& w = params[i].value;
        Tensor& g = params[i].grad;
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (int64_t j = 0; j < w.numel(); ++j) {
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
            real_t mhat = m[j] / bc1;
            real_t vhat = v[j] / bc2;
            w[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
        g.zero();
    }
}

}  // namespace dancer
