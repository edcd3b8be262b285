// dancer: adversarial rewriting attacks on a spam/ham text classifier.
//
// Subcommands cover the full pipeline: preprocess a raw corpus, train and
// evaluate the naive Bayes target, pretrain the autoencoder judge, run
// REINFORCE attack training, select a low-confidence curriculum, and report
// rewrites from a trained policy.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "dancer/harness.hpp"

using namespace dancer;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTrain = 4;

nlohmann::json read_json_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

void write_manifest(const fs::path& out_dir, const nlohmann::json& entries) {
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw DataError("cannot write manifest under " + out_dir.string());
    out << entries.dump(2) << '\n';
}

std::vector<EncodedExample> encode_all(const std::vector<RawExample>& raw,
                                       const Vocabulary& vocab, int64_t content_len) {
    std::vector<EncodedExample> out(raw.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(raw.size()); ++i)
        out[static_cast<size_t>(i)] = encode_example(raw[static_cast<size_t>(i)], vocab,
                                                     content_len);
    return out;
}

int cmd_preprocess(const std::string& input, const std::string& format, int64_t k, int64_t len,
                   uint64_t seed, const std::string& out) {
    std::vector<RawExample> raw;
    if (format == "dirs")
        raw = load_raw_dirs(input);
    else if (format == "tsv")
        raw = load_raw_tsv(input);
    else
        throw ConfigError("unknown input format: " + format);

    DatasetSplits splits = split_dataset(raw, {0.8, 0.1, 0.1}, seed);
    Vocabulary vocab = build_vocabulary(splits.train, k);

    fs::path out_dir(out);
    fs::create_directories(out_dir);
    vocab.save(out_dir / "vocab.txt");
    write_split_file(out_dir / "train.tsv", encode_all(splits.train, vocab, len));
    write_split_file(out_dir / "validation.tsv", encode_all(splits.validation, vocab, len));
    write_split_file(out_dir / "test.tsv", encode_all(splits.test, vocab, len));

    auto counts = [](const SplitCounts& c) {
        return nlohmann::json{{"ham", c.ham}, {"spam", c.spam}, {"total", c.total()}};
    };
    nlohmann::json manifest = {
        {"kind", "preprocess"},
        {"input", input},
        {"format", format},
        {"k_per_class", k},
        {"content_len", len},
        {"seed", seed},
        {"vocab_size", vocab.size()},
        {"splits",
         {{"train", counts(splits.train_counts)},
          {"validation", counts(splits.validation_counts)},
          {"test", counts(splits.test_counts)}}},
        {"artifacts", {"vocab.txt", "train.tsv", "validation.tsv", "test.tsv"}}};
    write_manifest(out_dir, manifest);

    std::cout << "vocabulary: " << vocab.size() << " tokens (with markers)\n";
    std::cout << "train: " << splits.train_counts.ham << " ham, " << splits.train_counts.spam
              << " spam\n";
    std::cout << "validation: " << splits.validation_counts.ham << " ham, "
              << splits.validation_counts.spam << " spam\n";
    std::cout << "test: " << splits.test_counts.ham << " ham, " << splits.test_counts.spam
              << " spam\n";
    return 0;
}

int cmd_train_target(const std::string& train, const std::string& vocab_file, real_t alpha,
                     const std::string& out) {
    Vocabulary vocab = Vocabulary::load(vocab_file);
    auto data = read_split_file(train);
    NBModel model = train_nb(data, vocab.size(), alpha);
    save_nb_model(model, out);
    std::cout << "trained target on " << data.size() << " examples, vocab " << vocab.size()
              << ", alpha " << alpha << "\n";
    return 0;
}

int cmd_eval_target(const std::string& model_file, const std::string& data_file) {
    NBModel model = load_nb_model(model_file);
    auto data = read_split_file(data_file);
    EvalResult r = evaluate(model, data);
    std::cout << "accuracy " << r.accuracy << "\n";
    std::cout << "auc_roc " << r.auc_roc << "\n";
    return 0;
}

int cmd_pretrain_judge(const std::string& train, const std::string& vocab_file, int64_t epochs,
                       real_t lr, int64_t batch, int64_t embed, int64_t hidden, uint64_t seed,
                       real_t stop_nll, const std::string& out, bool quiet) {
    Vocabulary vocab = Vocabulary::load(vocab_file);
    auto data = read_split_file(train);

    EncoderDecoderConfig config;
    config.vocab_size = vocab.size();
    config.embed_dim = embed;
    config.hidden_dim = hidden;
    config.max_len = static_cast<int64_t>(data.front().ids.size()) - 2;

    PretrainOptions opt;
    opt.epochs = epochs;
    opt.lr = lr;
    opt.batch_size = batch;
    opt.seed = seed;
    opt.stop_below_nll = stop_nll;
    opt.checkpoint_file = out;
    if (!quiet)
        opt.progress = [](int64_t epoch, real_t nll) {
            std::cout << "epoch " << epoch << " nll " << nll << "\n";
        };
    JudgeModel judge = pretrain_judge(data, config, opt);
    save_judge(judge, out);
    std::cout << "judge saved to " << out << "\n";
    return 0;
}

int cmd_select_curriculum(const std::string& model_file, const std::string& data_file,
                          double fraction, const std::string& out) {
    NBModel model = load_nb_model(model_file);
    OracleHandle oracle(std::move(model));
    auto data = read_split_file(data_file);
    std::erase_if(data, [](const EncodedExample& e) { return e.label != Label::spam; });
    if (data.empty()) throw DataError("no spam examples in " + data_file);
    auto picked = select_low_confidence(data, oracle, fraction);
    write_split_file(out, picked);
    std::cout << "selected " << picked.size() << " of " << data.size()
              << " spam examples (queries: " << oracle.query_count() << ")\n";
    return 0;
}

int cmd_attack(const AttackConfig& config) {
    auto results = run_attack(config);
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::cout << "lambda_adversarial " << config.lambda_adversarial[i] << ": epochs "
                  << r.epochs_run << (r.halted_early ? " (halted on collapse)" : "")
                  << ", best epoch " << r.best_epoch << " metric " << r.best_metric
                  << ", queries " << r.final_query_count << "\n";
        if (r.collapse.flagged)
            std::cout << "  collapse flagged at batch " << r.collapse.first_flagged_batch << "\n";
    }
    return 0;
}

int cmd_report(const std::string& policy_file, const std::string& model_file,
               const std::string& judge_file, const std::string& data_file,
               const std::string& vocab_file, const std::string& out, int64_t n_samples,
               bool emit_csv) {
    Checkpoint ckpt = Checkpoint::load(policy_file);
    if (ckpt.metadata.value("kind", "") != "policy")
        throw DataError(policy_file + ": not a policy checkpoint");
    PolicyModel policy;
    policy.config = config_from_json(ckpt.metadata.at("config"));
    Rng dummy(0);
    Seq2Seq::init_params(policy.config, policy.params, dummy);
    ckpt.restore_params(policy.params);

    NBModel model = load_nb_model(model_file);
    OracleHandle oracle(std::move(model));
    JudgeModel judge = load_judge(judge_file);
    Vocabulary vocab = Vocabulary::load(vocab_file);
    auto data = read_split_file(data_file);
    std::erase_if(data, [](const EncodedExample& e) { return e.label != Label::spam; });
    if (data.empty()) throw DataError("no spam examples in " + data_file);

    ReportSummary s = write_report(policy, oracle, judge, data, vocab, out, n_samples, emit_csv);
    std::cout << "examples " << s.rows.size() << "\n";
    std::cout << "mean q_minus before " << s.mean_q_before << "\n";
    std::cout << "mean q_minus after " << s.mean_q_after << "\n";
    std::cout << "mean similarity " << s.mean_similarity << "\n";
    std::cout << "misclassified " << s.misclassified_count << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAN-style REINFORCE rewriting attacks on a naive Bayes spam classifier"};
    app.require_subcommand(1);

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "tokenize, split, and encode a raw corpus");
    std::string pre_input, pre_format = "tsv", pre_out;
    int64_t pre_k = 3000, pre_len = 30;
    uint64_t pre_seed = 1;
    pre->add_option("--input", pre_input)->required();
    pre->add_option("--format", pre_format)->check(CLI::IsMember({"dirs", "tsv"}));
    pre->add_option("--k", pre_k, "top tokens kept per class");
    pre->add_option("--len", pre_len, "content length per example");
    pre->add_option("--seed", pre_seed);
    pre->add_option("--out", pre_out)->required();

    // train-target
    auto* tt = app.add_subcommand("train-target", "train the naive Bayes target");
    std::string tt_train, tt_vocab, tt_out;
    real_t tt_alpha = 1.0;
    tt->add_option("--train", tt_train)->required();
    tt->add_option("--vocab", tt_vocab)->required();
    tt->add_option("--alpha", tt_alpha, "Laplace smoothing");
    tt->add_option("--out", tt_out)->required();

    // eval-target
    auto* et = app.add_subcommand("eval-target", "accuracy and AUC of a trained target");
    std::string et_model, et_data;
    et->add_option("--model", et_model)->required();
    et->add_option("--data", et_data)->required();

    // pretrain-judge
    auto* pj = app.add_subcommand("pretrain-judge", "pretrain the autoencoder judge");
    std::string pj_train, pj_vocab, pj_out;
    int64_t pj_epochs = 1000, pj_batch = 50, pj_embed = 32, pj_hidden = 64;
    real_t pj_lr = 0.0002, pj_stop_nll = 0.0;
    uint64_t pj_seed = 1;
    bool pj_quiet = false;
    pj->add_option("--train", pj_train)->required();
    pj->add_option("--vocab", pj_vocab)->required();
    pj->add_option("--epochs", pj_epochs);
    pj->add_option("--lr", pj_lr);
    pj->add_option("--batch", pj_batch);
    std::vector<int64_t> pj_dims;
    pj->add_option("--dims", pj_dims, "embed,hidden pair")->delimiter(',')->expected(1, 2);
    pj->add_option("--embed", pj_embed);
    pj->add_option("--hidden", pj_hidden);
    pj->add_option("--seed", pj_seed);
    pj->add_option("--stop-nll", pj_stop_nll, "stop once epoch NLL falls below this");
    pj->add_option("--out", pj_out)->required();
    pj->add_flag("--quiet", pj_quiet);

    // select-curriculum
    auto* sc = app.add_subcommand("select-curriculum",
                                  "keep the lowest-confidence spam examples");
    std::string sc_model, sc_data, sc_out;
    double sc_fraction = 0.10;
    sc->add_option("--model", sc_model)->required();
    sc->add_option("--data", sc_data)->required();
    sc->add_option("--fraction", sc_fraction);
    sc->add_option("--out", sc_out)->required();

    // attack
    auto* at = app.add_subcommand("attack", "run REINFORCE attack training");
    std::string at_config;
    std::string at_vocab, at_model, at_judge, at_data, at_eval, at_train_data, at_out, at_resume,
        at_query_log;
    std::vector<double> at_lambda;
    bool at_sweep = false;
    int64_t at_epochs = -1, at_batch = -1, at_probe = -1;
    double at_lr = -1.0, at_temp = -1.0;
    int64_t at_seed = -1;
    std::string at_curriculum;
    double at_fraction = -1.0;
    at->add_option("--config", at_config, "JSON config file; flags override");
    at->add_option("--vocab", at_vocab);
    at->add_option("--target-model", at_model);
    at->add_option("--judge", at_judge);
    at->add_option("--data", at_data, "attack set (encoded split file)");
    at->add_option("--eval", at_eval, "held-out eval set");
    at->add_option("--train-data", at_train_data, "training split for the overlap check");
    at->add_option("--out", at_out);
    at->add_option("--resume", at_resume, "policy checkpoint to resume from");
    at->add_option("--query-log", at_query_log);
    at->add_option("--lambda", at_lambda, "adversarial weight(s)");
    at->add_flag("--sweep", at_sweep, "use the published lambda sweep");
    at->add_option("--epochs", at_epochs);
    at->add_option("--batch", at_batch);
    at->add_option("--lr", at_lr);
    at->add_option("--seed", at_seed);
    at->add_option("--oracle-temperature", at_temp);
    at->add_option("--probe", at_probe, "probe subset size for checkpoint selection");
    at->add_option("--curriculum", at_curriculum)->check(CLI::IsMember({"full", "low_confidence"}));
    at->add_option("--fraction", at_fraction, "low-confidence curriculum fraction");

    // report
    auto* rp = app.add_subcommand("report", "score rewrites from a trained policy");
    std::string rp_policy, rp_model, rp_judge, rp_data, rp_vocab, rp_out;
    int64_t rp_samples = 10;
    bool rp_csv = false;
    std::string rp_run;
    rp->add_option("--policy", rp_policy, "policy checkpoint; defaults to the run's best");
    rp->add_option("--run", rp_run, "attack run directory (reads best checkpoint from manifest)");
    rp->add_option("--model", rp_model)->required();
    rp->add_option("--judge", rp_judge)->required();
    rp->add_option("--data", rp_data)->required();
    rp->add_option("--vocab", rp_vocab)->required();
    rp->add_option("--out", rp_out)->required();
    rp->add_option("--samples", rp_samples);
    rp->add_flag("--emit-csv", rp_csv);

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed())
            return cmd_preprocess(pre_input, pre_format, pre_k, pre_len, pre_seed, pre_out);
        if (tt->parsed()) return cmd_train_target(tt_train, tt_vocab, tt_alpha, tt_out);
        if (et->parsed()) return cmd_eval_target(et_model, et_data);
        if (pj->parsed()) {
            if (pj_dims.size() == 2) {
                pj_embed = pj_dims[0];
                pj_hidden = pj_dims[1];
            } else if (!pj_dims.empty()) {
                throw ConfigError("--dims expects embed,hidden");
            }
            return cmd_pretrain_judge(pj_train, pj_vocab, pj_epochs, pj_lr, pj_batch, pj_embed,
                                      pj_hidden, pj_seed, pj_stop_nll, pj_out, pj_quiet);
        }
        if (sc->parsed()) return cmd_select_curriculum(sc_model, sc_data, sc_fraction, sc_out);
        if (at->parsed()) {
            AttackConfig config;
            if (!at_config.empty()) config = AttackConfig::from_json(read_json_file(at_config));
            if (!at_vocab.empty()) config.vocab_file = at_vocab;
            if (!at_model.empty()) config.target_model = at_model;
            if (!at_judge.empty()) config.judge_checkpoint = at_judge;
            if (!at_data.empty()) config.attack_set = at_data;
            if (!at_eval.empty()) config.eval_set = at_eval;
            if (!at_train_data.empty()) config.train_data = at_train_data;
            if (!at_out.empty()) config.out_dir = at_out;
            if (!at_resume.empty()) config.resume = at_resume;
            if (!at_query_log.empty()) config.query_log = at_query_log;
            if (at_sweep) config.lambda_adversarial = default_lambda_sweep();
            if (!at_lambda.empty()) config.lambda_adversarial = at_lambda;
            if (at_epochs >= 0) config.epochs = at_epochs;
            if (at_batch > 0) config.batch_size = at_batch;
            if (at_lr > 0) config.lr = at_lr;
            if (at_seed >= 0) config.seed = static_cast<uint64_t>(at_seed);
            if (at_temp > 0) config.oracle_temperature = at_temp;
            if (at_probe > 0) config.probe_size = at_probe;
            if (at_curriculum == "full") config.curriculum.mode = CurriculumConfig::Mode::full;
            if (at_curriculum == "low_confidence")
                config.curriculum.mode = CurriculumConfig::Mode::low_confidence;
            if (at_fraction > 0) config.curriculum.fraction = at_fraction;
            if (config.vocab_file.empty() || config.target_model.empty() ||
                config.judge_checkpoint.empty() || config.attack_set.empty() ||
                config.out_dir.empty())
                throw ConfigError(
                    "attack needs vocab, target model, judge, attack set, and out dir");
            return cmd_attack(config);
        }
        if (rp->parsed()) {
            if (rp_policy.empty()) {
                if (rp_run.empty())
                    throw ConfigError("report needs --policy or --run");
                nlohmann::json manifest =
                    read_json_file(fs::path(rp_run) / "manifest.json");
                rp_policy = manifest.at("best").at("checkpoint").get<std::string>();
            }
            return cmd_report(rp_policy, rp_model, rp_judge, rp_data, rp_vocab, rp_out,
                              rp_samples, rp_csv);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const TrainError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return kExitTrain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
