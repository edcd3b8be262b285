#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dancer/common.hpp"

namespace dancer {

enum class Label : int32_t { ham = 0, spam = 1 };

inline const char* label_name(Label l) { return l == Label::spam ? "spam" : "ham"; }
Label parse_label(const std::string& s);

struct RawExample {
    std::string text;
    Label label = Label::ham;
};

// Token ids are dense; the first four are reserved markers in this order.
constexpr int32_t kPad = 0;
constexpr int32_t kUnk = 1;
constexpr int32_t kSos = 2;
constexpr int32_t kEos = 3;
constexpr int32_t kNumSpecials = 4;

class Vocabulary {
  public:
    Vocabulary();

    // token must not already be present
    int32_t add_token(const std::string& token);
    int32_t id_of(const std::string& token) const;  // kUnk when absent
    const std::string& token_of(int32_t id) const;
    bool contains(const std::string& token) const;
    int32_t size() const { return static_cast<int32_t>(tokens_.size()); }

    const std::vector<std::string>& tokens() const { return tokens_; }

    void save(const std::filesystem::path& file) const;
    static Vocabulary load(const std::filesystem::path& file);

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int32_t> index_;
};

struct EncodedExample {
    std::vector<int32_t> ids;  // SOS + L content ids + EOS
    Label label = Label::ham;
};

struct SplitCounts {
    int64_t ham = 0;
    int64_t spam = 0;
    int64_t total() const { return ham + spam; }
};

struct DatasetSplits {
    std::vector<RawExample> train, validation, test;
    uint64_t split_seed = 0;
    SplitCounts train_counts, validation_counts, test_counts;
};

// Lowercases ASCII letters and splits on ASCII whitespace. Throws DataError
// on malformed UTF-8, with `origin` naming the offending record.
std::vector<std::string> tokenize(const std::string& text, const std::string& origin = "input");

// Union of the k most frequent tokens per class, ties broken by token order.
Vocabulary build_vocabulary(const std::vector<RawExample>& train, int64_t k_per_class = 3000);

// SOS + exactly L ids (UNK for out-of-vocabulary, PAD fill) + EOS.
std::vector<int32_t> normalize_and_encode(const std::vector<std::string>& tokens,
                                          const Vocabulary& vocab, int64_t content_len = 30);

EncodedExample encode_example(const RawExample& raw, const Vocabulary& vocab,
                              int64_t content_len = 30);

// Deterministic shuffle under seed, then contiguous floor-ratio partition.
DatasetSplits split_dataset(const std::vector<RawExample>& examples,
                            const std::array<double, 3>& ratios, uint64_t seed);

std::string decode_tokens(const std::vector<int32_t>& ids, const Vocabulary& vocab);

// --- ingestion and split files ---

// `dirs` layout: root/spam/*.txt and root/ham/*.txt, one message per file.
std::vector<RawExample> load_raw_dirs(const std::filesystem::path& root);
// TSV layout: label<TAB>text per line.
std::vector<RawExample> load_raw_tsv(const std::filesystem::path& file);

void write_split_file(const std::filesystem::path& file,
                      const std::vector<EncodedExample>& examples);
std::vector<EncodedExample> read_split_file(const std::filesystem::path& file);

}  // namespace dancer
