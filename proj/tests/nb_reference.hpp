#pragma once

// Brute-force naive Bayes reference used as an independent oracle in tests.
// Works directly in probability space with plain counting; no log-space
// tricks, no shared code with the implementation under test.

#include <cstdint>
#include <vector>

#include "dancer/corpus.hpp"

namespace nbref {

struct Doc {
    std::vector<int32_t> ids;
    bool spam = false;
};

// Posterior p(spam | ids) with Laplace smoothing alpha over vocab_size.
inline double posterior_spam(const std::vector<Doc>& corpus, const std::vector<int32_t>& query,
                             int64_t vocab_size, double alpha) {
    double docs = 0, spam_docs = 0;
    std::vector<double> count_spam(static_cast<size_t>(vocab_size), 0);
    std::vector<double> count_ham(static_cast<size_t>(vocab_size), 0);
    double total_spam = 0, total_ham = 0;
    for (const auto& d : corpus) {
        docs += 1;
        if (d.spam) spam_docs += 1;
        for (int32_t id : d.ids) {
            if (d.spam) {
                count_spam[static_cast<size_t>(id)] += 1;
                total_spam += 1;
            } else {
                count_ham[static_cast<size_t>(id)] += 1;
                total_ham += 1;
            }
        }
    }
    double joint_spam = spam_docs / docs;
    double joint_ham = (docs - spam_docs) / docs;
    for (int32_t id : query) {
        joint_spam *= (count_spam[static_cast<size_t>(id)] + alpha) /
                      (total_spam + alpha * static_cast<double>(vocab_size));
        joint_ham *= (count_ham[static_cast<size_t>(id)] + alpha) /
                     (total_ham + alpha * static_cast<double>(vocab_size));
    }
    return joint_spam / (joint_spam + joint_ham);
}

inline std::vector<dancer::EncodedExample> to_examples(const std::vector<Doc>& corpus) {
    std::vector<dancer::EncodedExample> out;
    for (const auto& d : corpus)
        out.push_back({d.ids, d.spam ? dancer::Label::spam : dancer::Label::ham});
    return out;
}

}  // namespace nbref
