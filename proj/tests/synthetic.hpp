#pragma once

// Synthetic spam/ham corpora with a controllable amount of class-exclusive
// signal per message. Shared filler tokens overlap fully between classes;
// each message carries a few tokens seen only in its own class.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dancer/corpus.hpp"
#include "dancer/rng.hpp"

namespace synth {

struct CorpusSpec {
    int64_t n_docs = 400;        // balanced between classes
    int64_t n_shared = 40;       // shared filler token types
    int64_t n_exclusive = 8;     // exclusive token types per class
    int64_t exclusive_min = 1;   // exclusive tokens per message
    int64_t exclusive_max = 1;
    int64_t doc_len = 12;
    uint64_t seed = 7;
};

inline std::vector<dancer::RawExample> make_corpus(const CorpusSpec& spec) {
    dancer::Rng rng(spec.seed);
    std::vector<dancer::RawExample> out;
    for (int64_t d = 0; d < spec.n_docs; ++d) {
        bool spam = d % 2 == 1;
        int64_t n_exclusive =
            spec.exclusive_min +
            static_cast<int64_t>(rng.next_index(
                static_cast<uint64_t>(spec.exclusive_max - spec.exclusive_min + 1)));
        std::vector<std::string> tokens;
        for (int64_t t = 0; t < spec.doc_len; ++t)
            tokens.push_back("common" + std::to_string(rng.next_index(
                                            static_cast<uint64_t>(spec.n_shared))));
        for (int64_t k = 0; k < n_exclusive && k < spec.doc_len; ++k) {
            int64_t pos = static_cast<int64_t>(rng.next_index(
                static_cast<uint64_t>(spec.doc_len)));
            std::string word = (spam ? "offer" : "memo") +
                               std::to_string(rng.next_index(
                                   static_cast<uint64_t>(spec.n_exclusive)));
            tokens[static_cast<size_t>(pos)] = word;
        }
        std::string text;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (i) text += ' ';
            text += tokens[i];
        }
        out.push_back({text, spam ? dancer::Label::spam : dancer::Label::ham});
    }
    return out;
}

inline void write_tsv(const std::filesystem::path& file,
                      const std::vector<dancer::RawExample>& examples) {
    std::ofstream out(file);
    for (const auto& ex : examples)
        out << dancer::label_name(ex.label) << '\t' << ex.text << '\n';
}

inline bool is_exclusive_spam_token(const std::string& token) {
    return token.rfind("offer", 0) == 0;
}

}  // namespace synth
