#include "dancer/gradcheck.hpp"

#include <cmath>

namespace dancer {

const GradCheckReport::Entry* GradCheckReport::worst() const {
    const Entry* w = nullptr;
    for (const auto& e : entries)
        if (!w || e.max_rel_err > w->max_rel_err) w = &e;
    return w;
}

GradCheckReport gradient_check(const std::function<VarId(Tape&)>& build_loss, ParamSet& params,
                               real_t tolerance, real_t h,
                               const std::function<void(ParamSet&)>& post_backward) {
    auto eval = [&]() {
        Tape tape;
        VarId loss = build_loss(tape);
        return tape.val(loss)[0];
    };

    params.zero_grad();
    {
        Tape tape;
        VarId loss = build_loss(tape);
        tape.backward(loss);
    }
    if (post_backward) post_backward(params);

    std::vector<Tensor> analytic;
    for (auto& p : params) analytic.push_back(p.grad);

    GradCheckReport report;
    report.tolerance = tolerance;
    report.passed = true;
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& w = params[i].value;
        real_t worst = 0.0;
        for (int64_t j = 0; j < w.numel(); ++j) {
            real_t keep = w[j];
            w[j] = keep + h;
            real_t up = eval();
            w[j] = keep - h;
            real_t down = eval();
            w[j] = keep;
            real_t numeric = (up - down) / (2.0 * h);
            real_t a = analytic[i][j];
            // floor the denominator: below it the central difference sits at
            // its cancellation noise level and the ratio measures only noise
            real_t denom = std::max(std::abs(a) + std::abs(numeric), 1e-6);
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
        report.entries.push_back({params[i].name, worst});
        if (worst >= tolerance) report.passed = false;
    }
    params.zero_grad();
    return report;
}

}  // namespace dancer
