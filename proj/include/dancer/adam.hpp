#pragma once

#include <vector>

#include "dancer/tape.hpp"

namespace dancer {

// Adam with bias correction. Moment tensors are lazily shaped to the
// parameter set on the first step and stay aligned with it afterwards.
class AdamState {
  public:
    explicit AdamState(real_t lr = 0.0002, real_t beta1 = 0.9, real_t beta2 = 0.999,
                       real_t eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    real_t lr() const { return lr_; }
    void set_lr(real_t lr) { lr_ = lr; }
    int64_t step_count() const { return step_; }

    std::vector<Tensor>& moments_m() { return m_; }
    std::vector<Tensor>& moments_v() { return v_; }
    const std::vector<Tensor>& moments_m() const { return m_; }
    const std::vector<Tensor>& moments_v() const { return v_; }
    void set_step_count(int64_t s) { step_ = s; }

    // One update over all parameters; zeroes gradients afterwards.
    // Throws TrainError naming the parameter on a non-finite gradient.
    void step(ParamSet& params);

  private:
    real_t lr_, beta1_, beta2_, eps_;
    int64_t step_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace dancer
