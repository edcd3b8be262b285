#pragma once

#include <filesystem>
#include <optional>

#include "dancer/generator.hpp"
#include "dancer/model_io.hpp"

namespace dancer {

struct CurriculumConfig {
    enum class Mode { full, low_confidence };
    Mode mode = Mode::full;
    double fraction = 0.10;
};

struct CollapseConfig {
    real_t threshold = 0.2;
    int64_t window = 5;
    bool early_stop = true;
};

struct AttackConfig {
    std::filesystem::path vocab_file;
    std::filesystem::path target_model;
    std::filesystem::path judge_checkpoint;
    std::filesystem::path attack_set;   // encoded split file; spam rows are attacked
    std::filesystem::path eval_set;     // optional held-out encoded split file
    std::filesystem::path train_data;   // optional; hygiene check against attack set
    std::filesystem::path out_dir;
    std::filesystem::path resume;       // optional policy checkpoint to continue from
    std::filesystem::path query_log;    // optional query_index<TAB>p_ham stream

    std::vector<double> lambda_adversarial = {0.5};
    std::optional<double> lambda_similar;  // default: 1 - lambda_adversarial
    int64_t epochs = 10;
    int64_t batch_size = 10;
    real_t lr = 0.0002;
    uint64_t seed = 1;
    real_t oracle_temperature = 1.0;
    int64_t probe_size = 32;
    int64_t sample_dump_every = 10;  // batches between episode dumps
    CurriculumConfig curriculum;
    CollapseConfig collapse;

    static AttackConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// The published adversarial weight sweep.
inline std::vector<double> default_lambda_sweep() { return {0.5, 0.8, 0.9, 0.95}; }

struct BatchRecord {
    int64_t epoch = 0;  // 0-based epoch being trained
    int64_t batch = 0;  // batch index within the epoch
    real_t mean_reward = 0.0;
    real_t mean_q_minus = 0.0;
    real_t mean_similarity = 0.0;
    real_t baseline = 0.0;
    uint64_t query_count = 0;  // cumulative oracle queries after this batch
    real_t diversity = 1.0;    // batch mean distinct-token ratio
    bool collapse_flagged = false;
};

struct EvalRecord {
    int64_t epochs_completed = 0;  // 0 = initialization
    real_t probe_mean_reward = 0.0;
    real_t eval_mean_q_minus = 0.0;  // NaN when no eval set configured
    uint64_t query_count = 0;
};

struct TrainingLog {
    std::vector<BatchRecord> batches;
    std::vector<EvalRecord> evals;
};

struct CollapseReport {
    std::vector<real_t> sample_ratios;
    real_t batch_mean = 1.0;
    bool flagged = false;
    int64_t first_flagged_batch = -1;  // global batch index
};

// Fraction of distinct non-marker tokens; outputs with no content count as 1.
real_t token_diversity_ratio(std::span<const int32_t> tokens);

// Sticky window detector: flags when the batch-mean ratio stays below the
// threshold for `window` consecutive batches.
class CollapseDetector {
  public:
    CollapseDetector(real_t threshold = 0.2, int64_t window = 5)
        : threshold_(threshold), window_(window) {}

    CollapseReport observe(const std::vector<std::vector<int32_t>>& outputs);
    bool flagged() const { return flagged_; }
    int64_t first_flagged_batch() const { return first_flagged_; }
    int64_t batches_seen() const { return batches_seen_; }

    // resume support
    void restore(int64_t batches_seen, int64_t consecutive_low, bool flagged,
                 int64_t first_flagged);
    int64_t consecutive_low() const { return consecutive_low_; }

  private:
    real_t threshold_;
    int64_t window_;
    int64_t batches_seen_ = 0;
    int64_t consecutive_low_ = 0;
    bool flagged_ = false;
    int64_t first_flagged_ = -1;
};

// Stateless single-batch wrapper around a fresh detector.
CollapseReport detect_mode_collapse(const std::vector<std::vector<int32_t>>& outputs,
                                    real_t threshold = 0.2, int64_t window = 5);

// The floor(fraction * n) lowest-p_spam examples (at least one), ties broken
// by original index. Every input must be spam-labeled; each is one query.
std::vector<EncodedExample> select_low_confidence(const std::vector<EncodedExample>& examples,
                                                  const OracleHandle& oracle,
                                                  double fraction = 0.10);

struct AttackResult {
    TrainingLog log;
    CollapseReport collapse;
    int64_t best_epoch = 0;       // epochs-completed index of the best probe metric
    real_t best_metric = 0.0;
    std::filesystem::path best_checkpoint;
    uint64_t episode_queries = 0;
    uint64_t eval_queries = 0;
    uint64_t final_query_count = 0;
    int64_t epochs_run = 0;
    bool halted_early = false;
};

// One REINFORCE attack run for a single adversarial weight. Writes log.tsv,
// eval.tsv, samples.txt, per-epoch checkpoints, and manifest.json under
// out_dir.
AttackResult run_attack_single(const AttackConfig& config, double lambda_adv,
                               const std::filesystem::path& out_dir);

// Runs every weight in config.lambda_adversarial; with more than one value,
// each run lands in out_dir/lambda_<value>/.
std::vector<AttackResult> run_attack(const AttackConfig& config);

struct ReportRow {
    int64_t index = 0;
    real_t q_minus_before = 0.0;
    real_t q_minus_after = 0.0;
    real_t similarity = 0.0;
    bool misclassified = false;
};

struct ReportSummary {
    std::vector<ReportRow> rows;
    real_t mean_q_before = 0.0;
    real_t mean_q_after = 0.0;
    real_t mean_similarity = 0.0;
    int64_t misclassified_count = 0;
};

// Greedy rewrites of eval_set under the given policy, scored before/after.
// Writes metrics.tsv, samples.txt, and optionally metrics.csv under out_dir.
ReportSummary write_report(const PolicyModel& policy, const OracleHandle& oracle,
                           const JudgeModel& judge, const std::vector<EncodedExample>& eval_set,
                           const Vocabulary& vocab, const std::filesystem::path& out_dir,
                           int64_t n_samples = 10, bool emit_csv = false);

}  // namespace dancer
