#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dancer/tape.hpp"

namespace dancer {

struct GradCheckReport {
    struct Entry {
        std::string name;
        real_t max_rel_err;
    };
    std::vector<Entry> entries;
    real_t tolerance = 0.0;
    bool passed = false;

    const Entry* worst() const;
};

// Compares analytic gradients of build_loss against central finite
// differences, coordinate by coordinate. build_loss must construct the full
// forward graph on the given tape and return the scalar loss node.
// post_backward, when set, runs after the analytic backward pass and before
// gradients are read; tests use it as a corruption hook.
GradCheckReport gradient_check(const std::function<VarId(Tape&)>& build_loss, ParamSet& params,
                               real_t tolerance, real_t h = 1e-4,
                               const std::function<void(ParamSet&)>& post_backward = {});

}  // namespace dancer
