#include "ssn4/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ssn4/layers.hpp"

namespace ssn4 {

namespace {

const std::vector<std::string> kLabelNames = {
    "BACKGROUND", "OBJECTIVE", "METHODS", "RESULTS", "CONCLUSIONS"};

std::string upper_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

bool is_digit_run(const std::string& tok) {
    for (unsigned char c : tok)
        if (!std::isdigit(c)) return false;
    return !tok.empty();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

const char* label_name(Label l) { return kLabelNames[static_cast<std::size_t>(l)].c_str(); }

const std::vector<std::string>& label_names() { return kLabelNames; }

std::optional<Label> label_from_string(std::string_view s) {
    std::string u = upper_ascii(s);
    if (u == "BACKGROUND" || u == "BACKGROUNDS") return Label::Background;
    if (u == "OBJECTIVE" || u == "OBJECTIVES") return Label::Objective;
    if (u == "METHODS" || u == "METHOD") return Label::Methods;
    if (u == "RESULTS" || u == "RESULT") return Label::Results;
    if (u == "CONCLUSIONS" || u == "CONCLUSION") return Label::Conclusions;
    return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        if (is_digit_run(word))
            out.emplace_back("<num>");
        else
            out.push_back(word);
        word.clear();
    };
    for (unsigned char c : raw) {
        if (is_word_byte(c)) {
            word += c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
        } else if (std::isspace(c)) {
            flush();
        } else {
            flush();
            out.emplace_back(1, static_cast<char>(c));
        }
    }
    flush();
    return out;
}

std::vector<Abstract> parse_rct_file(std::string_view text) {
    std::vector<Abstract> abstracts;
    Abstract current;
    bool in_abstract = false;
    int line_no = 0;

    auto finish = [&](int at_line) {
        if (!in_abstract) return;
        if (current.sentences.empty())
            throw ParseError("abstract '" + current.id + "' has no sentences", at_line);
        abstracts.push_back(std::move(current));
        current = Abstract{};
        in_abstract = false;
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        bool last = eol == std::string_view::npos;
        std::string_view line = text.substr(pos, last ? text.size() - pos : eol - pos);
        pos = last ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (line.empty()) {
            if (last && !in_abstract && text.empty()) break;
            finish(line_no);
            if (last) break;
            continue;
        }
        if (line.starts_with("###")) {
            finish(line_no);
            std::string_view id = line.substr(3);
            if (id.empty()) throw ParseError("header has no abstract id", line_no);
            current.id = std::string(id);
            in_abstract = true;
        } else {
            if (!in_abstract)
                throw ParseError("sentence line before any ### header", line_no);
            std::size_t tab = line.find('\t');
            if (tab == std::string_view::npos)
                throw ParseError("sentence line without a tab separator", line_no);
            std::string_view label_text = line.substr(0, tab);
            std::string_view sent_text = line.substr(tab + 1);
            Sentence s;
            s.raw_text = std::string(sent_text);
            if (!label_text.empty()) {
                auto l = label_from_string(label_text);
                if (!l)
                    throw ParseError("unknown label '" + std::string(label_text) + "'", line_no);
                s.gold = *l;
            }
            s.tokens = tokenize(s.raw_text);
            if (s.tokens.empty())
                throw ParseError("sentence has no tokens", line_no);
            current.sentences.push_back(std::move(s));
        }
        if (last) {
            finish(line_no);
            break;
        }
    }
    finish(line_no);
    return abstracts;
}

std::vector<Abstract> load_rct_file(const std::string& path) {
    return parse_rct_file(read_file(path));
}

std::string serialize_rct(std::span<const Abstract> abstracts) {
    std::string out;
    for (std::size_t i = 0; i < abstracts.size(); ++i) {
        if (i) out += "\n";
        out += "###";
        out += abstracts[i].id;
        out += "\n";
        for (const Sentence& s : abstracts[i].sentences) {
            if (s.gold) out += label_name(*s.gold);
            out += "\t";
            out += s.raw_text;
            out += "\n";
        }
    }
    return out;
}

void save_rct_file(const std::string& path, std::span<const Abstract> abstracts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << serialize_rct(abstracts);
}

Vocabulary Vocabulary::build(std::span<const Abstract> abstracts, int min_count) {
    if (min_count < 1) throw ShapeError("min_count must be >= 1");
    std::unordered_map<std::string, long long> counts;
    for (const Abstract& a : abstracts)
        for (const Sentence& s : a.sentences)
            for (const std::string& t : s.tokens) ++counts[t];

    std::vector<std::pair<std::string, long long>> kept;
    kept.reserve(counts.size());
    for (auto& [tok, c] : counts)
        if (c >= min_count) kept.emplace_back(tok, c);
    std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });

    Vocabulary v;
    v.min_count_ = min_count;
    v.tokens_ = {kPadToken, kUnkToken};
    for (auto& [tok, c] : kept) v.tokens_.push_back(tok);
    for (std::size_t i = 0; i < v.tokens_.size(); ++i)
        v.index_.emplace(v.tokens_[i], static_cast<int>(i));
    return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens_in_index_order,
                                   int min_count) {
    if (tokens_in_index_order.size() < 2 ||
        tokens_in_index_order[0] != kPadToken || tokens_in_index_order[1] != kUnkToken)
        throw DataError("vocabulary must start with the PAD and UNK tokens");
    Vocabulary v;
    v.min_count_ = min_count;
    v.tokens_ = std::move(tokens_in_index_order);
    for (std::size_t i = 0; i < v.tokens_.size(); ++i)
        if (!v.index_.emplace(v.tokens_[i], static_cast<int>(i)).second)
            throw DataError("duplicate vocabulary token: " + v.tokens_[i]);
    return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError("vocabulary line without a tab", line_no);
        std::string tok = line.substr(0, tab);
        int idx = -1;
        auto res = std::from_chars(line.data() + tab + 1, line.data() + line.size(), idx);
        if (res.ec != std::errc{} || idx != static_cast<int>(tokens.size()))
            throw ParseError("vocabulary indices must be 0,1,2,... in order", line_no);
        tokens.push_back(std::move(tok));
    }
    return from_tokens(std::move(tokens), 1);
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file: " + path);
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        out << tokens_[i] << '\t' << i << '\n';
}

int Vocabulary::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnkIndex : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
    return index_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(int index) const {
    if (index < 0 || index >= size()) throw ShapeError("vocabulary index out of range");
    return tokens_[static_cast<std::size_t>(index)];
}

EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab,
                                int dim, Rng& rng) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty embedding file: " + path);
    long long declared_count = 0;
    int declared_dim = 0;
    {
        std::istringstream header(line);
        if (!(header >> declared_count >> declared_dim))
            throw ParseError("embedding header must be '<count> <dim>'", 1);
    }
    if (declared_dim != dim)
        throw DataError("embedding dimension mismatch: file has " +
                        std::to_string(declared_dim) + ", expected " + std::to_string(dim));

    Tensor matrix = glorot_init({vocab.size(), dim}, rng);
    std::vector<char> found(static_cast<std::size_t>(vocab.size()), 0);

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string word;
        row >> word;
        if (!vocab.contains(word)) continue;  // row irrelevant to this vocabulary
        int idx = vocab.index_of(word);
        for (int j = 0; j < dim; ++j) {
            double x;
            if (!(row >> x))
                throw ParseError("unparseable embedding value for '" + word + "'", line_no);
            matrix.at(idx, j) = x;
        }
        double extra;
        if (row >> extra)
            throw ParseError("too many values for '" + word + "'", line_no);
        found[static_cast<std::size_t>(idx)] = 1;
    }

    int real = vocab.size() - 2;
    int hit = 0;
    for (int i = 2; i < vocab.size(); ++i) hit += found[static_cast<std::size_t>(i)];
    double coverage = real == 0 ? 1.0 : static_cast<double>(hit) / real;
    return {std::move(matrix), coverage};
}

std::vector<int> encode_sentence(const Sentence& sentence, const Vocabulary& vocab) {
    std::vector<int> out;
    out.reserve(sentence.tokens.size());
    for (const std::string& t : sentence.tokens) out.push_back(vocab.index_of(t));
    return out;
}

std::vector<std::vector<int>> encode_abstract(const Abstract& abstract,
                                              const Vocabulary& vocab) {
    std::vector<std::vector<int>> out;
    out.reserve(abstract.sentences.size());
    for (const Sentence& s : abstract.sentences) out.push_back(encode_sentence(s, vocab));
    return out;
}

std::vector<std::string> decode_indices(std::span<const int> indices,
                                        const Vocabulary& vocab) {
    std::vector<std::string> out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(vocab.token(i));
    return out;
}

}  // namespace ssn4
