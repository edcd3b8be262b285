#include "dancer/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "dancer/rng.hpp"

namespace fs = std::filesystem;

namespace dancer {

Label parse_label(const std::string& s) {
    if (s == "spam") return Label::spam;
    if (s == "ham") return Label::ham;
    throw DataError("unknown label '" + s + "' (expected spam or ham)");
}

namespace {

const std::array<const char*, kNumSpecials> kSpecialTokens = {"<PAD>", "<UNK>", "<SOS>", "<EOS>"};

bool is_special_token(const std::string& t) {
    for (const char* s : kSpecialTokens)
        if (t == s) return true;
    return false;
}

// Validates UTF-8 well-formedness (RFC 3629: no overlongs, surrogates, > U+10FFFF).
bool valid_utf8(const std::string& s) {
    size_t i = 0, n = s.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        size_t len;
        uint32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c >> 5) == 0x6) {
            len = 2;
            cp = c & 0x1f;
        } else if ((c >> 4) == 0xe) {
            len = 3;
            cp = c & 0x0f;
        } else if ((c >> 3) == 0x1e) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n) return false;
        for (size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc >> 6) != 0x2) return false;
            cp = (cp << 6) | (cc & 0x3f);
        }
        if (len == 2 && cp < 0x80) return false;
        if (len == 3 && cp < 0x800) return false;
        if (len == 4 && cp < 0x10000) return false;
        if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
        i += len;
    }
    return true;
}

bool ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text, const std::string& origin) {
    if (!valid_utf8(text)) throw DataError("invalid UTF-8 in " + origin);
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (ascii_space(c)) {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Vocabulary::Vocabulary() {
    for (const char* s : kSpecialTokens) {
        index_.emplace(s, static_cast<int32_t>(tokens_.size()));
        tokens_.emplace_back(s);
    }
}

int32_t Vocabulary::add_token(const std::string& token) {
    if (index_.count(token)) throw UsageError("token already in vocabulary: " + token);
    int32_t id = static_cast<int32_t>(tokens_.size());
    index_.emplace(token, id);
    tokens_.push_back(token);
    return id;
}

int32_t Vocabulary::id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int32_t id) const {
    if (id < 0 || id >= size()) throw DataError("token id out of range");
    return tokens_[static_cast<size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const { return index_.count(token) > 0; }

void Vocabulary::save(const fs::path& file) const {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read " + file.string());
    Vocabulary v;
    std::string line;
    int32_t ln = 0;
    while (std::getline(in, line)) {
        if (ln < kNumSpecials) {
            if (line != kSpecialTokens[static_cast<size_t>(ln)])
                throw DataError(file.string() + ": line " + std::to_string(ln + 1) +
                                " must be " + kSpecialTokens[static_cast<size_t>(ln)]);
        } else {
            if (line.empty()) throw DataError(file.string() + ": empty token line");
            v.add_token(line);
        }
        ++ln;
    }
    if (ln < kNumSpecials) throw DataError(file.string() + ": missing special token lines");
    return v;
}

Vocabulary build_vocabulary(const std::vector<RawExample>& train, int64_t k_per_class) {
    if (k_per_class <= 0) throw ConfigError("k_per_class must be positive");
    if (train.empty()) throw DataError("empty training set");

    // ordered maps give the lexicographic tie-break for free
    std::map<std::string, int64_t> counts[2];
    bool seen[2] = {false, false};
    for (const auto& ex : train) {
        int c = ex.label == Label::spam ? 1 : 0;
        seen[c] = true;
        for (auto& tok : tokenize(ex.text))
            if (!is_special_token(tok)) ++counts[c][tok];
    }
    if (!seen[0] || !seen[1]) throw DataError("training set must contain both classes");

    auto top_k = [&](const std::map<std::string, int64_t>& m) {
        std::vector<std::pair<std::string, int64_t>> items(m.begin(), m.end());
        std::stable_sort(items.begin(), items.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        if (static_cast<int64_t>(items.size()) > k_per_class)
            items.resize(static_cast<size_t>(k_per_class));
        return items;
    };

    std::map<std::string, int64_t> selected;  // ordered for deterministic id assignment
    for (int c = 0; c < 2; ++c)
        for (auto& [tok, cnt] : top_k(counts[c])) selected.emplace(tok, cnt);

    Vocabulary vocab;
    for (auto& [tok, cnt] : selected) vocab.add_token(tok);
    return vocab;
}

std::vector<int32_t> normalize_and_encode(const std::vector<std::string>& tokens,
                                          const Vocabulary& vocab, int64_t content_len) {
    std::vector<int32_t> ids;
    ids.reserve(static_cast<size_t>(content_len) + 2);
    ids.push_back(kSos);
    for (int64_t i = 0; i < content_len; ++i) {
        if (i < static_cast<int64_t>(tokens.size()))
            ids.push_back(vocab.id_of(tokens[static_cast<size_t>(i)]));
        else
            ids.push_back(kPad);
    }
    ids.push_back(kEos);
    return ids;
}

EncodedExample encode_example(const RawExample& raw, const Vocabulary& vocab,
                              int64_t content_len) {
    return {normalize_and_encode(tokenize(raw.text), vocab, content_len), raw.label};
}

namespace {
SplitCounts count_classes(const std::vector<RawExample>& v) {
    SplitCounts c;
    for (const auto& e : v) (e.label == Label::spam ? c.spam : c.ham)++;
    return c;
}
}  // namespace

DatasetSplits split_dataset(const std::vector<RawExample>& examples,
                            const std::array<double, 3>& ratios, uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
    if (examples.size() < 3) throw DataError("need at least 3 examples to split");

    std::vector<size_t> order(examples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(seed, kSeedSplit));
    rng.shuffle(order);

    int64_t n = static_cast<int64_t>(examples.size());
    int64_t n_train = static_cast<int64_t>(std::floor(ratios[0] * static_cast<double>(n)));
    int64_t n_val = static_cast<int64_t>(std::floor(ratios[1] * static_cast<double>(n)));

    DatasetSplits splits;
    splits.split_seed = seed;
    for (int64_t i = 0; i < n; ++i) {
        const RawExample& ex = examples[order[static_cast<size_t>(i)]];
        if (i < n_train)
            splits.train.push_back(ex);
        else if (i < n_train + n_val)
            splits.validation.push_back(ex);
        else
            splits.test.push_back(ex);
    }
    splits.train_counts = count_classes(splits.train);
    splits.validation_counts = count_classes(splits.validation);
    splits.test_counts = count_classes(splits.test);
    return splits;
}

std::string decode_tokens(const std::vector<int32_t>& ids, const Vocabulary& vocab) {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out.push_back(' ');
        out += vocab.token_of(ids[i]);
    }
    return out;
}

std::vector<RawExample> load_raw_dirs(const fs::path& root) {
    std::vector<RawExample> out;
    for (Label label : {Label::ham, Label::spam}) {
        fs::path dir = root / label_name(label);
        if (!fs::is_directory(dir)) throw DataError("missing class directory " + dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f, std::ios::binary);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            if (tokenize(text, f.string()).empty())
                throw DataError("empty message in " + f.string());
            out.push_back({std::move(text), label});
        }
    }
    if (out.empty()) throw DataError("no .txt messages under " + root.string());
    return out;
}

std::vector<RawExample> load_raw_tsv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read " + file.string());
    std::vector<RawExample> out;
    std::string line;
    int64_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        std::string where = file.string() + ":" + std::to_string(ln);
        if (tab == std::string::npos) throw DataError(where + ": expected label<TAB>text");
        std::string text = line.substr(tab + 1);
        if (tokenize(text, where).empty()) throw DataError(where + ": empty message text");
        out.push_back({std::move(text), parse_label(line.substr(0, tab))});
    }
    if (out.empty()) throw DataError("no examples in " + file.string());
    return out;
}

void write_split_file(const fs::path& file, const std::vector<EncodedExample>& examples) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    for (const auto& ex : examples) {
        out << label_name(ex.label) << '\t';
        for (size_t i = 0; i < ex.ids.size(); ++i) {
            if (i) out << ',';
            out << ex.ids[i];
        }
        out << '\n';
    }
}

std::vector<EncodedExample> read_split_file(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read " + file.string());
    std::vector<EncodedExample> out;
    std::string line;
    int64_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        std::string where = file.string() + ":" + std::to_string(ln);
        if (tab == std::string::npos) throw DataError(where + ": expected label<TAB>ids");
        EncodedExample ex;
        ex.label = parse_label(line.substr(0, tab));
        size_t pos = tab + 1;
        while (pos <= line.size()) {
            size_t comma = line.find(',', pos);
            std::string field = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                            : comma - pos);
            try {
                ex.ids.push_back(static_cast<int32_t>(std::stol(field)));
            } catch (const std::exception&) {
                throw DataError(where + ": bad token id '" + field + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (ex.ids.size() < 2) throw DataError(where + ": sequence too short");
        out.push_back(std::move(ex));
    }
    if (out.empty()) throw DataError("no examples in " + file.string());
    return out;
}

}  // namespace dancer
