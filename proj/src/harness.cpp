#include "dancer/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_set>

namespace fs = std::filesystem;

namespace dancer {

namespace {

std::string format_real(real_t v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

uint64_t sequence_hash(const std::vector<int32_t>& ids) {
    uint64_t h = 1469598103934665603ULL;
    for (int32_t id : ids) {
        h ^= static_cast<uint64_t>(static_cast<uint32_t>(id));
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<EncodedExample> spam_subset(std::vector<EncodedExample> examples,
                                        const std::string& what) {
    std::erase_if(examples, [](const EncodedExample& e) { return e.label != Label::spam; });
    if (examples.empty()) throw DataError("no spam examples in " + what);
    return examples;
}

}  // namespace

AttackConfig AttackConfig::from_json(const nlohmann::json& j) {
    AttackConfig c;
    static const std::set<std::string> known = {
        "vocab", "target_model", "judge", "attack_set", "eval_set", "train_data",
        "out", "resume", "query_log", "lambda_adversarial", "lambda_similar",
        "epochs", "batch_size", "lr", "seed", "oracle_temperature", "probe_size",
        "sample_dump_every", "curriculum", "collapse"};
    for (auto& [key, val] : j.items())
        if (!known.count(key)) throw ConfigError("unknown config key: " + key);

    auto path = [&](const char* key, fs::path& dst) {
        if (j.contains(key)) dst = j.at(key).get<std::string>();
    };
    path("vocab", c.vocab_file);
    path("target_model", c.target_model);
    path("judge", c.judge_checkpoint);
    path("attack_set", c.attack_set);
    path("eval_set", c.eval_set);
    path("train_data", c.train_data);
    path("out", c.out_dir);
    path("resume", c.resume);
    path("query_log", c.query_log);

    if (j.contains("lambda_adversarial")) {
        const auto& lam = j.at("lambda_adversarial");
        c.lambda_adversarial.clear();
        if (lam.is_array())
            for (const auto& v : lam) c.lambda_adversarial.push_back(v.get<double>());
        else
            c.lambda_adversarial.push_back(lam.get<double>());
    }
    if (j.contains("lambda_similar")) c.lambda_similar = j.at("lambda_similar").get<double>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<int64_t>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int64_t>();
    if (j.contains("lr")) c.lr = j.at("lr").get<real_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("oracle_temperature"))
        c.oracle_temperature = j.at("oracle_temperature").get<real_t>();
    if (j.contains("probe_size")) c.probe_size = j.at("probe_size").get<int64_t>();
    if (j.contains("sample_dump_every"))
        c.sample_dump_every = j.at("sample_dump_every").get<int64_t>();
    if (j.contains("curriculum")) {
        const auto& cur = j.at("curriculum");
        std::string mode = cur.value("mode", "full");
        if (mode == "full")
            c.curriculum.mode = CurriculumConfig::Mode::full;
        else if (mode == "low_confidence")
            c.curriculum.mode = CurriculumConfig::Mode::low_confidence;
        else
            throw ConfigError("curriculum.mode must be full or low_confidence");
        c.curriculum.fraction = cur.value("fraction", 0.10);
    }
    if (j.contains("collapse")) {
        const auto& col = j.at("collapse");
        c.collapse.threshold = col.value("threshold", 0.2);
        c.collapse.window = col.value("window", static_cast<int64_t>(5));
        c.collapse.early_stop = col.value("early_stop", true);
    }

    if (c.epochs < 0 || c.batch_size < 1) throw ConfigError("bad epochs/batch_size");
    if (c.curriculum.fraction <= 0.0 || c.curriculum.fraction > 1.0)
        throw ConfigError("curriculum.fraction must lie in (0, 1]");
    for (double lam : c.lambda_adversarial)
        if (lam < 0.0 || lam > 1.0) throw ConfigError("lambda_adversarial must lie in [0, 1]");
    return c;
}

nlohmann::json AttackConfig::to_json() const {
    nlohmann::json j;
    j["vocab"] = vocab_file.string();
    j["target_model"] = target_model.string();
    j["judge"] = judge_checkpoint.string();
    j["attack_set"] = attack_set.string();
    if (!eval_set.empty()) j["eval_set"] = eval_set.string();
    if (!train_data.empty()) j["train_data"] = train_data.string();
    j["out"] = out_dir.string();
    if (!resume.empty()) j["resume"] = resume.string();
    if (!query_log.empty()) j["query_log"] = query_log.string();
    j["lambda_adversarial"] = lambda_adversarial;
    if (lambda_similar) j["lambda_similar"] = *lambda_similar;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["lr"] = lr;
    j["seed"] = seed;
    j["oracle_temperature"] = oracle_temperature;
    j["probe_size"] = probe_size;
    j["sample_dump_every"] = sample_dump_every;
    j["curriculum"] = {{"mode", curriculum.mode == CurriculumConfig::Mode::full
                                    ? "full"
                                    : "low_confidence"},
                       {"fraction", curriculum.fraction}};
    j["collapse"] = {{"threshold", collapse.threshold},
                     {"window", collapse.window},
                     {"early_stop", collapse.early_stop}};
    return j;
}

real_t token_diversity_ratio(std::span<const int32_t> tokens) {
    std::unordered_set<int32_t> distinct;
    int64_t total = 0;
    for (int32_t t : tokens) {
        if (t < kNumSpecials) continue;
        distinct.insert(t);
        ++total;
    }
    if (total == 0) return 1.0;  // no content, no diversity evidence
    return static_cast<real_t>(distinct.size()) / static_cast<real_t>(total);
}

CollapseReport CollapseDetector::observe(const std::vector<std::vector<int32_t>>& outputs) {
    if (outputs.empty()) throw UsageError("collapse detection on empty batch");
    CollapseReport report;
    real_t sum = 0.0;
    for (const auto& out : outputs) {
        real_t r = token_diversity_ratio(out);
        report.sample_ratios.push_back(r);
        sum += r;
    }
    report.batch_mean = sum / static_cast<real_t>(outputs.size());

    if (report.batch_mean < threshold_)
        ++consecutive_low_;
    else
        consecutive_low_ = 0;
    if (!flagged_ && consecutive_low_ >= window_) {
        flagged_ = true;
        first_flagged_ = batches_seen_;
    }
    ++batches_seen_;

    report.flagged = flagged_;
    report.first_flagged_batch = first_flagged_;
    return report;
}

void CollapseDetector::restore(int64_t batches_seen, int64_t consecutive_low, bool flagged,
                               int64_t first_flagged) {
    batches_seen_ = batches_seen;
    consecutive_low_ = consecutive_low;
    flagged_ = flagged;
    first_flagged_ = first_flagged;
}

CollapseReport detect_mode_collapse(const std::vector<std::vector<int32_t>>& outputs,
                                    real_t threshold, int64_t window) {
    CollapseDetector detector(threshold, window);
    return detector.observe(outputs);
}

std::vector<EncodedExample> select_low_confidence(const std::vector<EncodedExample>& examples,
                                                  const OracleHandle& oracle, double fraction) {
    if (examples.empty()) throw DataError("low-confidence selection on an empty set");
    if (fraction <= 0.0 || fraction > 1.0) throw ConfigError("fraction must lie in (0, 1]");
    for (const auto& ex : examples)
        if (ex.label != Label::spam)
            throw DataError("low-confidence selection expects spam-labeled examples");

    int64_t n = static_cast<int64_t>(examples.size());
    std::vector<real_t> p_spam(static_cast<size_t>(n));
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        try {
            p_spam[static_cast<size_t>(i)] =
                oracle.classify(examples[static_cast<size_t>(i)].ids).p_spam;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<int64_t> order(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
        return p_spam[static_cast<size_t>(a)] < p_spam[static_cast<size_t>(b)];
    });

    int64_t take = static_cast<int64_t>(std::floor(fraction * static_cast<double>(n)));
    take = std::max<int64_t>(1, std::min(take, n));
    std::vector<EncodedExample> out;
    out.reserve(static_cast<size_t>(take));
    for (int64_t i = 0; i < take; ++i)
        out.push_back(examples[static_cast<size_t>(order[static_cast<size_t>(i)])]);
    return out;
}

namespace {

struct RunState {
    int64_t epochs_completed = 0;
    int64_t global_batch = 0;
    uint64_t episode_queries = 0;
    uint64_t eval_queries = 0;
    int64_t best_epoch = 0;
    real_t best_metric = -1e300;  // finite so it survives a JSON round trip
    BaselineState baseline;
};

// Stable training knobs only: no run-local paths or epoch budget, so
// checkpoints from a resumed run match the uninterrupted run byte for byte.
nlohmann::json training_fingerprint(const AttackConfig& config) {
    return {{"seed", config.seed},
            {"lr", config.lr},
            {"batch_size", config.batch_size},
            {"oracle_temperature", config.oracle_temperature},
            {"probe_size", config.probe_size},
            {"sample_dump_every", config.sample_dump_every},
            {"curriculum",
             {{"mode", config.curriculum.mode == CurriculumConfig::Mode::full
                           ? "full"
                           : "low_confidence"},
              {"fraction", config.curriculum.fraction}}},
            {"collapse",
             {{"threshold", config.collapse.threshold},
              {"window", config.collapse.window},
              {"early_stop", config.collapse.early_stop}}}};
}

void write_attack_checkpoint(const fs::path& file, const PolicyModel& policy,
                             const AdamState& adam, const RunState& st,
                             const CollapseDetector& detector, double lambda_adv,
                             const AttackConfig& config) {
    Checkpoint ckpt;
    ckpt.metadata["kind"] = "policy";
    ckpt.metadata["config"] = config_to_json(policy.config);
    ckpt.metadata["lambda_adversarial"] = lambda_adv;
    ckpt.metadata["training"] = training_fingerprint(config);
    ckpt.metadata["epoch"] = st.epochs_completed;
    ckpt.metadata["global_batch"] = st.global_batch;
    ckpt.metadata["episode_queries"] = st.episode_queries;
    ckpt.metadata["eval_queries"] = st.eval_queries;
    ckpt.metadata["best_epoch"] = st.best_epoch;
    ckpt.metadata["best_metric"] = st.best_metric;
    ckpt.metadata["baseline"] = {{"value", st.baseline.value},
                                 {"decay", st.baseline.decay},
                                 {"initialized", st.baseline.initialized}};
    ckpt.metadata["collapse"] = {{"batches_seen", detector.batches_seen()},
                                 {"consecutive_low", detector.consecutive_low()},
                                 {"flagged", detector.flagged()},
                                 {"first_flagged_batch", detector.first_flagged_batch()}};
    ckpt.metadata["adam_step"] = adam.step_count();
    ckpt.add_params(policy.params);
    if (adam.step_count() > 0) {
        for (size_t i = 0; i < policy.params.size(); ++i) {
            ckpt.add("adam.m." + policy.params[i].name, adam.moments_m()[i]);
            ckpt.add("adam.v." + policy.params[i].name, adam.moments_v()[i]);
        }
    }
    ckpt.save(file);
}

void restore_attack_checkpoint(const fs::path& file, PolicyModel& policy, AdamState& adam,
                               RunState& st, CollapseDetector& detector) {
    Checkpoint ckpt = Checkpoint::load(file);
    if (ckpt.metadata.value("kind", "") != "policy")
        throw DataError(file.string() + ": not a policy checkpoint");
    if (config_from_json(ckpt.metadata.at("config")) != policy.config)
        throw ConfigError(file.string() + ": checkpoint architecture does not match the judge");
    ckpt.restore_params(policy.params);
    st.epochs_completed = ckpt.metadata.at("epoch").get<int64_t>();
    st.global_batch = ckpt.metadata.at("global_batch").get<int64_t>();
    st.episode_queries = ckpt.metadata.at("episode_queries").get<uint64_t>();
    st.eval_queries = ckpt.metadata.at("eval_queries").get<uint64_t>();
    st.best_epoch = ckpt.metadata.at("best_epoch").get<int64_t>();
    st.best_metric = ckpt.metadata.at("best_metric").get<real_t>();
    const auto& b = ckpt.metadata.at("baseline");
    st.baseline.value = b.at("value").get<real_t>();
    st.baseline.decay = b.at("decay").get<real_t>();
    st.baseline.initialized = b.at("initialized").get<bool>();
    const auto& col = ckpt.metadata.at("collapse");
    detector.restore(col.at("batches_seen").get<int64_t>(),
                     col.at("consecutive_low").get<int64_t>(),
                     col.at("flagged").get<bool>(),
                     col.at("first_flagged_batch").get<int64_t>());
    int64_t adam_step = ckpt.metadata.at("adam_step").get<int64_t>();
    if (adam_step > 0) {
        adam.set_step_count(adam_step);
        adam.moments_m().clear();
        adam.moments_v().clear();
        for (const auto& p : policy.params) {
            adam.moments_m().push_back(ckpt.require("adam.m." + p.name));
            adam.moments_v().push_back(ckpt.require("adam.v." + p.name));
        }
    }
}

std::string checkpoint_name(int64_t epoch) {
    std::ostringstream os;
    os << "policy_epoch_" << std::setw(4) << std::setfill('0') << epoch << ".ckpt";
    return os.str();
}

}  // namespace

AttackResult run_attack_single(const AttackConfig& config, double lambda_adv,
                               const fs::path& out_dir) {
    Vocabulary vocab = Vocabulary::load(config.vocab_file);
    NBModel nb = load_nb_model(config.target_model);
    if (nb.vocab_size() != vocab.size())
        throw ConfigError("target model vocabulary size does not match vocab file");
    JudgeModel judge = load_judge(config.judge_checkpoint);
    if (judge.config.vocab_size != vocab.size())
        throw ConfigError("judge vocabulary size does not match vocab file");

    OracleHandle oracle(std::move(nb), config.oracle_temperature);
    // queries arrive from parallel episode workers; buffer and write sorted
    std::map<uint64_t, real_t> query_entries;
    std::mutex query_mutex;
    if (!config.query_log.empty()) {
        oracle.set_query_log([&query_entries, &query_mutex](uint64_t index, real_t p_ham) {
            std::lock_guard<std::mutex> lock(query_mutex);
            query_entries.emplace(index, p_ham);
        });
    }

    std::vector<EncodedExample> attack =
        spam_subset(read_split_file(config.attack_set), config.attack_set.string());
    std::vector<EncodedExample> eval_set;
    if (!config.eval_set.empty())
        eval_set = spam_subset(read_split_file(config.eval_set), config.eval_set.string());

    // hygiene: the attack set must not leak into evaluation or training data
    std::unordered_set<uint64_t> attack_hashes;
    for (const auto& ex : attack) attack_hashes.insert(sequence_hash(ex.ids));
    for (const auto& ex : eval_set)
        if (attack_hashes.count(sequence_hash(ex.ids)))
            throw DataError("attack set and eval set share an example");
    if (!config.train_data.empty())
        for (const auto& ex : read_split_file(config.train_data))
            if (attack_hashes.count(sequence_hash(ex.ids)))
                throw DataError("attack set overlaps the target/judge training data");

    bool resuming = !config.resume.empty();
    uint64_t selection_queries = 0;
    if (config.curriculum.mode == CurriculumConfig::Mode::low_confidence) {
        uint64_t before = oracle.query_count();
        attack = select_low_confidence(attack, oracle, config.curriculum.fraction);
        selection_queries = oracle.query_count() - before;
    }

    const int64_t seq_len = static_cast<int64_t>(attack.front().ids.size());
    const int64_t content_len = seq_len - 2;
    for (const auto& ex : attack)
        if (static_cast<int64_t>(ex.ids.size()) != seq_len)
            throw DataError("attack set sequences have mixed lengths");
    if (content_len > judge.config.max_len)
        throw ConfigError("attack sequences exceed the judge's configured max_len");

    const double lambda_sim = config.lambda_similar ? *config.lambda_similar : 1.0 - lambda_adv;
    const int64_t max_gen = content_len + 1;  // room for content plus EOS

    fs::create_directories(out_dir);
    fs::create_directories(out_dir / "ckpt");
    std::ofstream log_out(out_dir / "log.tsv");
    std::ofstream eval_out(out_dir / "eval.tsv");
    std::ofstream samples_out(out_dir / "samples.txt");
    if (!log_out || !eval_out || !samples_out)
        throw DataError("cannot write run artifacts under " + out_dir.string());
    log_out << "epoch\tbatch\tmean_reward\tmean_q_minus\tmean_similarity\tbaseline\t"
               "query_count\tdiversity\tcollapse_flagged\n";
    eval_out << "epochs_completed\tprobe_mean_reward\teval_mean_q_minus\tquery_count\n";

    PolicyModel policy = init_policy(judge);
    AdamState adam(config.lr);
    CollapseDetector detector(config.collapse.threshold, config.collapse.window);
    RunState st;
    uint64_t restored_queries = 0;
    if (resuming) {
        restore_attack_checkpoint(config.resume, policy, adam, st, detector);
        restored_queries = st.episode_queries + st.eval_queries;
    } else {
        st.eval_queries += selection_queries;
    }

    AttackResult result;
    const uint64_t judge_checksum_before = judge.checksum();

    const int64_t probe_n = std::min<int64_t>(config.probe_size,
                                              static_cast<int64_t>(attack.size()));

    TrainingLog& log = result.log;
    auto eval_pass = [&](int64_t epochs_completed) {
        Seq2Seq net(policy.config, policy.params);
        real_t probe_sum = 0.0;
        for (int64_t i = 0; i < probe_n; ++i) {
            const auto& ex = attack[static_cast<size_t>(i)];
            auto rewrite = canonical_rewrite(greedy_decode(net, ex.ids, max_gen), content_len);
            probe_sum += compute_reward(ex.ids, rewrite, oracle, judge, lambda_adv, lambda_sim)
                             .combined;
        }
        st.eval_queries += static_cast<uint64_t>(probe_n);
        real_t eval_mean_q = std::numeric_limits<real_t>::quiet_NaN();
        if (!eval_set.empty()) {
            real_t q_sum = 0.0;
            for (const auto& ex : eval_set) {
                auto rewrite = canonical_rewrite(greedy_decode(net, ex.ids, max_gen), content_len);
                q_sum += oracle.classify(rewrite).p_ham;
            }
            st.eval_queries += eval_set.size();
            eval_mean_q = q_sum / static_cast<real_t>(eval_set.size());
        }
        EvalRecord rec{epochs_completed, probe_n > 0 ? probe_sum / static_cast<real_t>(probe_n)
                                                     : 0.0,
                       eval_mean_q, st.episode_queries + st.eval_queries};
        log.evals.push_back(rec);
        eval_out << rec.epochs_completed << '\t' << format_real(rec.probe_mean_reward) << '\t'
                 << format_real(rec.eval_mean_q_minus) << '\t' << rec.query_count << '\n';
        eval_out.flush();
        if (!detector.flagged() && rec.probe_mean_reward > st.best_metric) {
            st.best_metric = rec.probe_mean_reward;
            st.best_epoch = epochs_completed;
        }
    };

    if (!resuming) {
        eval_pass(0);
        write_attack_checkpoint(out_dir / "ckpt" / checkpoint_name(0), policy, adam, st,
                                detector, lambda_adv, config);
    }

    bool halted = false;
    for (int64_t epoch = st.epochs_completed; epoch < config.epochs && !halted; ++epoch) {
        std::vector<size_t> order(attack.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(derive_seed(config.seed, kSeedShuffle, static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        int64_t n_batches =
            (static_cast<int64_t>(order.size()) + config.batch_size - 1) / config.batch_size;
        for (int64_t b = 0; b < n_batches; ++b) {
            size_t start = static_cast<size_t>(b * config.batch_size);
            size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
            int64_t bn = static_cast<int64_t>(end - start);

            std::vector<EpisodeRecord> episodes(static_cast<size_t>(bn));
            std::exception_ptr failure;
#pragma omp parallel for schedule(static)
            for (int64_t i = 0; i < bn; ++i) {
                try {
                    const auto& ex = attack[order[start + static_cast<size_t>(i)]];
                    uint64_t seed =
                        derive_seed(config.seed, kSeedSample, static_cast<uint64_t>(epoch),
                                    static_cast<uint64_t>(b * config.batch_size + i));
                    EpisodeRecord ep = sample_rewrite(policy, ex.ids, seed, max_gen);
                    auto rewrite = canonical_rewrite(ep.output_tokens, content_len);
                    ep.reward =
                        compute_reward(ex.ids, rewrite, oracle, judge, lambda_adv, lambda_sim);
                    episodes[static_cast<size_t>(i)] = std::move(ep);
                } catch (...) {
#pragma omp critical
                    if (!failure) failure = std::current_exception();
                }
            }
            if (failure) std::rethrow_exception(failure);
            st.episode_queries += static_cast<uint64_t>(bn);

            std::vector<std::vector<int32_t>> outputs;
            outputs.reserve(episodes.size());
            for (const auto& ep : episodes) outputs.push_back(ep.output_tokens);
            CollapseReport collapse = detector.observe(outputs);

            reinforce_update(policy, episodes, st.baseline, adam);

            BatchRecord rec;
            rec.epoch = epoch;
            rec.batch = b;
            for (const auto& ep : episodes) {
                rec.mean_reward += ep.reward.combined;
                rec.mean_q_minus += ep.reward.q_minus;
                rec.mean_similarity += ep.reward.similarity;
            }
            rec.mean_reward /= static_cast<real_t>(bn);
            rec.mean_q_minus /= static_cast<real_t>(bn);
            rec.mean_similarity /= static_cast<real_t>(bn);
            rec.baseline = st.baseline.value;
            rec.query_count = st.episode_queries + st.eval_queries;
            rec.diversity = collapse.batch_mean;
            rec.collapse_flagged = collapse.flagged;
            log.batches.push_back(rec);
            log_out << rec.epoch << '\t' << rec.batch << '\t' << format_real(rec.mean_reward)
                    << '\t' << format_real(rec.mean_q_minus) << '\t'
                    << format_real(rec.mean_similarity) << '\t' << format_real(rec.baseline)
                    << '\t' << rec.query_count << '\t' << format_real(rec.diversity) << '\t'
                    << (rec.collapse_flagged ? 1 : 0) << '\n';
            log_out.flush();

            if (config.sample_dump_every > 0 && st.global_batch % config.sample_dump_every == 0) {
                const auto& ep = episodes.front();
                samples_out << "# epoch " << epoch << " batch " << b << " reward "
                            << format_real(ep.reward.combined) << " q_minus "
                            << format_real(ep.reward.q_minus) << " similarity "
                            << format_real(ep.reward.similarity) << '\n';
                samples_out << "input:  " << decode_tokens(ep.input_ids, vocab) << '\n';
                samples_out << "output: " << decode_tokens(ep.output_tokens, vocab) << "\n\n";
                samples_out.flush();
            }

            ++st.global_batch;
            if (config.collapse.early_stop && detector.flagged() &&
                st.global_batch >= detector.first_flagged_batch() + config.collapse.window) {
                halted = true;
                break;
            }
        }

        if (!halted) {
            st.epochs_completed = epoch + 1;
            eval_pass(st.epochs_completed);
            write_attack_checkpoint(out_dir / "ckpt" / checkpoint_name(st.epochs_completed),
                                    policy, adam, st, detector, lambda_adv, config);
        }
    }

    if (halted)
        write_attack_checkpoint(out_dir / "policy_final.ckpt", policy, adam, st, detector,
                                lambda_adv, config);

    if (judge.checksum() != judge_checksum_before)
        throw TrainError("judge parameters changed during the attack run");

    uint64_t fresh_queries = st.episode_queries + st.eval_queries - restored_queries +
                             (resuming ? selection_queries : 0);
    if (oracle.query_count() != fresh_queries)
        throw TrainError("oracle query accounting mismatch");

    result.collapse.flagged = detector.flagged();
    result.collapse.first_flagged_batch = detector.first_flagged_batch();
    result.best_epoch = st.best_epoch;
    result.best_metric = st.best_metric;
    result.best_checkpoint = out_dir / "ckpt" / checkpoint_name(st.best_epoch);
    result.episode_queries = st.episode_queries;
    result.eval_queries = st.eval_queries;
    result.final_query_count = st.episode_queries + st.eval_queries;
    result.epochs_run = st.epochs_completed;
    result.halted_early = halted;

    if (!config.query_log.empty()) {
        std::ofstream query_out(config.query_log);
        if (!query_out) throw DataError("cannot write " + config.query_log.string());
        for (const auto& [index, p_ham] : query_entries)
            query_out << index << '\t' << format_real(p_ham) << '\n';
    }

    nlohmann::json manifest;
    manifest["kind"] = "attack-run";
    manifest["lambda_adversarial"] = lambda_adv;
    manifest["lambda_similar"] = lambda_sim;
    manifest["config"] = config.to_json();
    manifest["epochs_run"] = result.epochs_run;
    manifest["halted_early"] = result.halted_early;
    manifest["collapse"] = {{"flagged", result.collapse.flagged},
                            {"first_flagged_batch", result.collapse.first_flagged_batch}};
    manifest["best"] = {{"epoch", result.best_epoch},
                        {"metric", result.best_metric},
                        {"checkpoint", result.best_checkpoint.string()}};
    manifest["queries"] = {{"episodes", result.episode_queries},
                           {"evaluation", result.eval_queries},
                           {"total", result.final_query_count}};
    manifest["artifacts"] = {"log.tsv", "eval.tsv", "samples.txt", "ckpt/"};
    std::ofstream manifest_out(out_dir / "manifest.json");
    manifest_out << manifest.dump(2) << '\n';

    return result;
}

std::vector<AttackResult> run_attack(const AttackConfig& config) {
    if (config.lambda_adversarial.empty()) throw ConfigError("no adversarial weights configured");
    std::vector<AttackResult> results;
    for (double lam : config.lambda_adversarial) {
        fs::path out = config.out_dir;
        if (config.lambda_adversarial.size() > 1) {
            std::ostringstream sub;
            sub << "lambda_" << lam;
            out /= sub.str();
        }
        results.push_back(run_attack_single(config, lam, out));
    }
    return results;
}

ReportSummary write_report(const PolicyModel& policy, const OracleHandle& oracle,
                           const JudgeModel& judge, const std::vector<EncodedExample>& eval_set,
                           const Vocabulary& vocab, const fs::path& out_dir, int64_t n_samples,
                           bool emit_csv) {
    if (eval_set.empty()) throw DataError("empty report evaluation set");
    fs::create_directories(out_dir);

    Seq2Seq net(policy.config, const_cast<ParamSet&>(policy.params));
    const int64_t content_len = static_cast<int64_t>(eval_set.front().ids.size()) - 2;
    for (const auto& ex : eval_set)
        if (static_cast<int64_t>(ex.ids.size()) != content_len + 2)
            throw DataError("report evaluation set has mixed sequence lengths");

    ReportSummary summary;
    std::ofstream metrics(out_dir / "metrics.tsv");
    std::ofstream samples(out_dir / "samples.txt");
    if (!metrics || !samples) throw DataError("cannot write report under " + out_dir.string());
    metrics << "index\tq_minus_before\tq_minus_after\tsimilarity\tmisclassified\n";

    for (size_t i = 0; i < eval_set.size(); ++i) {
        const auto& ex = eval_set[i];
        auto rewrite = canonical_rewrite(greedy_decode(net, ex.ids, content_len + 1), content_len);
        ReportRow row;
        row.index = static_cast<int64_t>(i);
        row.q_minus_before = oracle.classify(ex.ids).p_ham;
        row.q_minus_after = oracle.classify(rewrite).p_ham;
        row.similarity = cosine_similarity_or_zero(encode_sentence(judge, ex.ids),
                                                   encode_sentence(judge, rewrite));
        row.misclassified = row.q_minus_after > 0.5;
        summary.rows.push_back(row);
        summary.mean_q_before += row.q_minus_before;
        summary.mean_q_after += row.q_minus_after;
        summary.mean_similarity += row.similarity;
        if (row.misclassified) ++summary.misclassified_count;

        metrics << row.index << '\t' << format_real(row.q_minus_before) << '\t'
                << format_real(row.q_minus_after) << '\t' << format_real(row.similarity) << '\t'
                << (row.misclassified ? 1 : 0) << '\n';
        if (static_cast<int64_t>(i) < n_samples) {
            samples << "input  (C_ham " << format_real(row.q_minus_before)
                    << "): " << decode_tokens(ex.ids, vocab) << '\n';
            samples << "output (C_ham " << format_real(row.q_minus_after)
                    << "): " << decode_tokens(rewrite, vocab) << "\n\n";
        }
    }
    real_t n = static_cast<real_t>(eval_set.size());
    summary.mean_q_before /= n;
    summary.mean_q_after /= n;
    summary.mean_similarity /= n;
    metrics << "# mean\t" << format_real(summary.mean_q_before) << '\t'
            << format_real(summary.mean_q_after) << '\t' << format_real(summary.mean_similarity)
            << '\t' << summary.misclassified_count << '\n';

    if (emit_csv) {
        std::ofstream csv(out_dir / "metrics.csv");
        csv << "index,q_minus_before,q_minus_after,similarity,misclassified\n";
        for (const auto& row : summary.rows)
            csv << row.index << ',' << format_real(row.q_minus_before) << ','
                << format_real(row.q_minus_after) << ',' << format_real(row.similarity) << ','
                << (row.misclassified ? 1 : 0) << '\n';
    }

    nlohmann::json manifest;
    manifest["kind"] = "report";
    manifest["examples"] = summary.rows.size();
    manifest["mean_q_minus_before"] = summary.mean_q_before;
    manifest["mean_q_minus_after"] = summary.mean_q_after;
    manifest["mean_similarity"] = summary.mean_similarity;
    manifest["misclassified"] = summary.misclassified_count;
    manifest["artifacts"] = emit_csv
                                ? nlohmann::json{"metrics.tsv", "samples.txt", "metrics.csv"}
                                : nlohmann::json{"metrics.tsv", "samples.txt"};
    std::ofstream manifest_out(out_dir / "manifest.json");
    manifest_out << manifest.dump(2) << '\n';
    return summary;
}

}  // namespace dancer
