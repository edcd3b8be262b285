#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dancer/corpus.hpp"
#include "dancer/tensor.hpp"

namespace dancer {

struct Confidence {
    real_t p_spam = 0.0;
    real_t p_ham = 0.0;
};

// Multinomial naive Bayes with Laplace smoothing. Class index 0 = ham, 1 = spam.
class NBModel {
  public:
    NBModel() = default;
    NBModel(std::vector<real_t> log_prior, Tensor log_likelihood, real_t alpha);

    real_t log_prior(int cls) const { return log_prior_[static_cast<size_t>(cls)]; }
    real_t log_likelihood(int cls, int32_t token) const {
        return log_lik_.at(cls, token);
    }
    int64_t vocab_size() const { return log_lik_.cols(); }
    real_t alpha() const { return alpha_; }
    const Tensor& log_likelihood_table() const { return log_lik_; }
    const std::vector<real_t>& log_priors() const { return log_prior_; }

  private:
    std::vector<real_t> log_prior_;
    Tensor log_lik_;  // (2 x V)
    real_t alpha_ = 1.0;
};

NBModel train_nb(const std::vector<EncodedExample>& train, int64_t vocab_size,
                 real_t alpha = 1.0);

struct EvalResult {
    real_t accuracy = 0.0;
    real_t auc_roc = 0.0;
};

EvalResult evaluate(const NBModel& model, const std::vector<EncodedExample>& dataset);

// The attack-facing view of the target: classification confidences and a
// query counter, nothing else. Attack-side code takes OracleHandle only and
// never sees NBModel internals.
class OracleHandle {
  public:
    explicit OracleHandle(NBModel model, real_t temperature = 1.0);

    Confidence classify(std::span<const int32_t> ids) const;
    uint64_t query_count() const { return queries_.load(); }
    real_t temperature() const { return temperature_; }

    // Optional per-query sink, called as (query_index, p_ham).
    void set_query_log(std::function<void(uint64_t, real_t)> sink) { log_ = std::move(sink); }

  private:
    NBModel model_;
    real_t temperature_;
    mutable std::atomic<uint64_t> queries_{0};
    std::function<void(uint64_t, real_t)> log_;
};

}  // namespace dancer
