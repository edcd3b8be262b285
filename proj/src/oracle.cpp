#include "dancer/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace dancer {

NBModel::NBModel(std::vector<real_t> log_prior, Tensor log_likelihood, real_t alpha)
    : log_prior_(std::move(log_prior)), log_lik_(std::move(log_likelihood)), alpha_(alpha) {
    if (log_prior_.size() != 2 || log_lik_.rows() != 2)
        throw UsageError("naive Bayes model is binary");
    if (!log_lik_.all_finite()) throw TrainError("non-finite naive Bayes parameters");
}

NBModel train_nb(const std::vector<EncodedExample>& train, int64_t vocab_size, real_t alpha) {
    if (alpha <= 0.0) throw ConfigError("Laplace smoothing alpha must be positive");
    if (vocab_size < 1) throw ConfigError("vocab_size must be positive");

    int64_t doc_count[2] = {0, 0};
    std::vector<int64_t> token_count(2 * static_cast<size_t>(vocab_size), 0);
    int64_t total_tokens[2] = {0, 0};

    for (const auto& ex : train) {
        int c = ex.label == Label::spam ? 1 : 0;
        ++doc_count[c];
        for (int32_t id : ex.ids) {
            if (id < 0 || id >= vocab_size)
                throw DataError("token id out of range in training example");
            ++token_count[static_cast<size_t>(c) * vocab_size + static_cast<size_t>(id)];
            ++total_tokens[c];
        }
    }
    if (doc_count[0] == 0 || doc_count[1] == 0)
        throw DataError("training set must contain both classes");

    std::vector<real_t> log_prior(2);
    int64_t docs = doc_count[0] + doc_count[1];
    for (int c = 0; c < 2; ++c)
        log_prior[static_cast<size_t>(c)] =
            std::log(static_cast<real_t>(doc_count[c]) / static_cast<real_t>(docs));

    Tensor log_lik({2, vocab_size});
    for (int c = 0; c < 2; ++c) {
        real_t denom = static_cast<real_t>(total_tokens[c]) +
                       alpha * static_cast<real_t>(vocab_size);
        for (int64_t t = 0; t < vocab_size; ++t) {
            real_t num = static_cast<real_t>(
                             token_count[static_cast<size_t>(c) * vocab_size +
                                         static_cast<size_t>(t)]) +
                         alpha;
            log_lik.at(c, t) = std::log(num / denom);
        }
    }
    return NBModel(std::move(log_prior), std::move(log_lik), alpha);
}

OracleHandle::OracleHandle(NBModel model, real_t temperature)
    : model_(std::move(model)), temperature_(temperature) {
    if (temperature_ <= 0.0) throw ConfigError("oracle temperature must be positive");
}

Confidence OracleHandle::classify(std::span<const int32_t> ids) const {
    uint64_t index = queries_.fetch_add(1);
    for (int32_t id : ids)
        if (id < 0 || id >= model_.vocab_size())
            throw DataError("oracle query with out-of-range token id");

    real_t score[2];
    for (int c = 0; c < 2; ++c) {
        real_t s = model_.log_prior(c);
        for (int32_t id : ids) s += model_.log_likelihood(c, id);
        score[c] = s / temperature_;
    }
    // two-class softmax
    real_t mx = std::max(score[0], score[1]);
    real_t e0 = std::exp(score[0] - mx);
    real_t e1 = std::exp(score[1] - mx);
    Confidence conf{e1 / (e0 + e1), e0 / (e0 + e1)};
    if (log_) log_(index, conf.p_ham);
    return conf;
}

EvalResult evaluate(const NBModel& model, const std::vector<EncodedExample>& dataset) {
    if (dataset.empty()) throw DataError("cannot evaluate on an empty dataset");
    OracleHandle scorer(model);

    // validate up front; classify must not throw inside the parallel region
    for (const auto& ex : dataset)
        for (int32_t id : ex.ids)
            if (id < 0 || id >= model.vocab_size())
                throw DataError("evaluation example has an out-of-range token id");

    int64_t n = static_cast<int64_t>(dataset.size());
    std::vector<real_t> scores(static_cast<size_t>(n));
    std::vector<int> is_spam(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        const auto& ex = dataset[static_cast<size_t>(i)];
        scores[static_cast<size_t>(i)] = scorer.classify(ex.ids).p_spam;
        is_spam[static_cast<size_t>(i)] = ex.label == Label::spam ? 1 : 0;
    }

    int64_t pos = 0, neg = 0, correct = 0;
    for (int64_t i = 0; i < n; ++i) {
        bool predicted_spam = scores[static_cast<size_t>(i)] > 0.5;
        if (predicted_spam == (is_spam[static_cast<size_t>(i)] == 1)) ++correct;
        (is_spam[static_cast<size_t>(i)] ? pos : neg)++;
    }
    if (pos == 0 || neg == 0) throw DataError("AUC undefined on a single-class dataset");

    // Mann-Whitney rank statistic with average ranks over ties
    std::vector<int64_t> order(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
        return scores[static_cast<size_t>(a)] < scores[static_cast<size_t>(b)];
    });
    std::vector<real_t> rank(static_cast<size_t>(n));
    int64_t i = 0;
    while (i < n) {
        int64_t j = i;
        while (j + 1 < n && scores[static_cast<size_t>(order[static_cast<size_t>(j + 1)])] ==
                                scores[static_cast<size_t>(order[static_cast<size_t>(i)])])
            ++j;
        real_t avg = (static_cast<real_t>(i) + static_cast<real_t>(j)) / 2.0 + 1.0;
        for (int64_t k = i; k <= j; ++k)
            rank[static_cast<size_t>(order[static_cast<size_t>(k)])] = avg;
        i = j + 1;
    }
    real_t rank_sum_pos = 0.0;
    for (int64_t k = 0; k < n; ++k)
        if (is_spam[static_cast<size_t>(k)]) rank_sum_pos += rank[static_cast<size_t>(k)];
    real_t auc = (rank_sum_pos - static_cast<real_t>(pos) * (static_cast<real_t>(pos) + 1.0) / 2.0) /
                 (static_cast<real_t>(pos) * static_cast<real_t>(neg));

    return {static_cast<real_t>(correct) / static_cast<real_t>(n), auc};
}

}  // namespace dancer
