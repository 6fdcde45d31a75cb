#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssn4/rng.hpp"
#include "ssn4/tensor.hpp"

namespace ssn4 {

// Rhetorical categories in canonical index order.
enum class Label : int {
    Background = 0,
    Objective = 1,
    Methods = 2,
    Results = 3,
    Conclusions = 4,
};

inline constexpr int kNumLabels = 5;

const char* label_name(Label l);
const std::vector<std::string>& label_names();
// Case-insensitive; accepts singular and plural spellings of each category.
std::optional<Label> label_from_string(std::string_view s);

struct Sentence {
    std::string raw_text;             // byte-exact as read from the file
    std::vector<std::string> tokens;  // never empty
    std::optional<Label> gold;        // absent for unlabeled prediction input
};

struct Abstract {
    std::string id;
    std::vector<Sentence> sentences;  // at least one, file order
};

// Lowercases, splits on whitespace and punctuation (punctuation marks become
// single-character tokens), and replaces standalone digit runs with "<num>".
// Bytes >= 0x80 are treated as word characters so UTF-8 sequences stay intact.
std::vector<std::string> tokenize(std::string_view raw);

// Abstracts are delimited by a "###<id>" header line followed by one
// "<LABEL>\t<sentence>" line per sentence; blank lines separate abstracts.
// An empty label (line starting with the tab) marks an unlabeled sentence.
std::vector<Abstract> parse_rct_file(std::string_view text);
std::vector<Abstract> load_rct_file(const std::string& path);
std::string serialize_rct(std::span<const Abstract> abstracts);
void save_rct_file(const std::string& path, std::span<const Abstract> abstracts);

// Token <-> index mapping with PAD = 0 and UNK = 1 reserved. Real tokens are
// inserted by descending corpus frequency, ties broken lexicographically.
class Vocabulary {
public:
    static constexpr int kPadIndex = 0;
    static constexpr int kUnkIndex = 1;
    static constexpr const char* kPadToken = "<pad>";
    static constexpr const char* kUnkToken = "<unk>";

    static Vocabulary build(std::span<const Abstract> abstracts, int min_count);
    // One "<token>\t<index>" line per entry, UTF-8, in index order.
    static Vocabulary load(const std::string& path);
    static Vocabulary from_tokens(std::vector<std::string> tokens_in_index_order,
                                  int min_count);

    void save(const std::string& path) const;

    // Total: unknown tokens map to the UNK index.
    int index_of(std::string_view token) const;
    bool contains(std::string_view token) const;
    const std::string& token(int index) const;
    int size() const { return static_cast<int>(tokens_.size()); }
    int min_count() const { return min_count_; }
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    Vocabulary() = default;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
    int min_count_ = 1;
};

struct EmbeddingMatrix {
    Tensor matrix;    // |V| x d
    double coverage;  // fraction of non-reserved vocabulary tokens found in the file
};

// word2vec text format: "<count> <dim>" header, then "<word> <f1> ... <fd>"
// per line. Rows for vocabulary tokens found in the file are copied; missing
// tokens, PAD, and UNK keep their Glorot initialization.
EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab,
                                int dim, Rng& rng);

std::vector<int> encode_sentence(const Sentence& sentence, const Vocabulary& vocab);
std::vector<std::vector<int>> encode_abstract(const Abstract& abstract,
                                              const Vocabulary& vocab);
std::vector<std::string> decode_indices(std::span<const int> indices,
                                        const Vocabulary& vocab);

}  // namespace ssn4
