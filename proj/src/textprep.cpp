#include "branchscope/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "branchscope/csv.hpp"
#include "branchscope/error.hpp"
#include "branchscope/stemmer.hpp"

namespace branchscope {

const std::vector<std::string>& english_stopwords() {
  static const std::vector<std::string> words = {
      "a",        "about",    "above",   "after",    "again",   "against",    "ain",      "all",     "am",
      "an",       "and",      "any",     "are",      "aren",    "as",         "at",       "be",      "because",
      "been",     "before",   "being",   "below",    "between", "both",       "but",      "by",      "can",
      "could",    "couldn",   "d",       "did",      "didn",    "do",         "does",     "doesn",   "doing",
      "don",      "down",     "during",  "each",     "few",     "for",        "from",     "further", "had",
      "hadn",     "has",      "hasn",    "have",     "haven",   "having",     "he",       "her",     "here",
      "hers",     "herself",  "him",     "himself",  "his",     "how",        "i",        "if",      "in",
      "into",     "is",       "isn",     "it",       "its",     "itself",     "just",     "ll",      "m",
      "ma",       "me",       "might",   "mightn",   "more",    "most",       "must",     "mustn",   "my",
      "myself",   "needn",    "no",      "nor",      "not",     "now",        "o",        "of",      "off",
      "on",       "once",     "only",    "or",       "other",   "our",        "ours",     "ourselves", "out",
      "over",     "own",      "re",      "s",        "same",    "shan",       "she",      "should",  "shouldn",
      "so",       "some",     "such",    "t",        "than",    "that",       "the",      "their",   "theirs",
      "them",     "themselves", "then",  "there",    "these",   "they",       "this",     "those",   "through",
      "to",       "too",      "under",   "until",    "up",      "ve",         "very",     "was",     "wasn",
      "we",       "were",     "weren",   "what",     "when",    "where",      "which",    "while",   "who",
      "whom",     "why",      "will",    "with",     "won",     "would",      "wouldn",   "y",       "you",
      "your",     "yours",    "yourself", "yourselves", "also", "however",    "thus",     "may",     "within",
      "without",  "via",      "upon",    "whereas",  "therefore", "herein",   "among",    "amongst", "yet",
  };
  return words;
}

TokenPipelineConfig TokenPipelineConfig::standard() {
  TokenPipelineConfig config;
  const auto& words = english_stopwords();
  config.stopwords.insert(words.begin(), words.end());
  return config;
}

std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path) {
  std::unordered_set<std::string> out;
  for (auto& w : read_word_list(path)) out.insert(std::move(w));
  return out;
}

namespace {

bool is_token_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool all_ascii_letters(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c < 0x80 && std::isalpha(c); });
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenPipelineConfig& config) {
  if (config.min_token_len < 1) throw std::invalid_argument("min_token_len must be at least 1");
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && is_token_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) continue;
    std::string token(text.substr(start, i - start));
    if (all_digits(token)) continue;
    if (config.fold_case) {
      for (auto& c : token) {
        if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    if (config.stopwords.contains(token)) continue;
    if (config.stemmer == Stemmer::Porter && all_ascii_letters(token)) token = porter_stem(token);
    if (token.size() < config.min_token_len) continue;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

std::string document_text(const Record& record) { return record.title + " " + record.abstract; }

TokenizedCorpus tokenize_corpus(const Corpus& corpus, const TokenPipelineConfig& config) {
  TokenizedCorpus out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) out.push_back(tokenize(document_text(doc), config));
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::size_t> doc_freq, double threshold)
    : words_(std::move(words)), doc_freq_(std::move(doc_freq)), threshold_(threshold) {
  if (doc_freq_.size() != words_.size()) doc_freq_.resize(words_.size(), 0);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<std::uint32_t>(i)).second) {
      throw DataError("duplicate vocabulary word '" + words_[i] + "'");
    }
  }
}

std::int64_t Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

Vocabulary build_vocabulary(const TokenizedCorpus& docs, double threshold, FrequencyMode mode) {
  if (docs.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  if (threshold < 0.0) throw std::invalid_argument("threshold must be nonnegative");
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // doc freq, token freq
  std::size_t total_tokens = 0;
  for (const auto& tokens : docs) {
    std::set<std::string_view> seen;
    for (const auto& t : tokens) {
      auto& c = counts[t];
      ++c.second;
      ++total_tokens;
      if (seen.insert(t).second) ++c.first;
    }
  }
  const double base = mode == FrequencyMode::Document ? static_cast<double>(docs.size()) : static_cast<double>(total_tokens);
  const double cutoff = threshold * base;
  std::vector<std::string> words;
  std::vector<std::size_t> df;
  for (const auto& [word, c] : counts) {
    double freq = mode == FrequencyMode::Document ? static_cast<double>(c.first) : static_cast<double>(c.second);
    if (freq > cutoff) {
      words.push_back(word);
      df.push_back(c.first);
    }
  }
  if (words.empty()) throw DataError("vocabulary is empty at threshold " + std::to_string(threshold));
  return Vocabulary(std::move(words), std::move(df), threshold);
}

Vocabulary build_vocabulary(const Corpus& corpus, const TokenPipelineConfig& config, double threshold,
                            FrequencyMode mode) {
  return build_vocabulary(tokenize_corpus(corpus, config), threshold, mode);
}

// ---------------------------------------------------------------------------

DocTermMatrix::DocTermMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  row_ptr_.assign(rows_ + 1, 0);
  for (std::size_t i = 0; i < triplets.size();) {
    const auto& t = triplets[i];
    if (t.row >= rows_ || t.col >= cols_) throw std::out_of_range("matrix entry outside declared shape");
    double v = 0.0;
    std::size_t j = i;
    for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j) {
      if (triplets[j].value < 0.0) throw std::invalid_argument("matrix entries must be nonnegative");
      v += triplets[j].value;
    }
    if (v != 0.0) {
      col_idx_.push_back(t.col);
      values_.push_back(v);
      ++row_ptr_[t.row + 1];
    }
    i = j;
  }
  for (std::size_t r = 0; r < rows_; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

DocTermMatrix DocTermMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
  std::size_t cols = dense.empty() ? 0 : dense.front().size();
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < dense.size(); ++r) {
    if (dense[r].size() != cols) throw std::invalid_argument("ragged dense matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      if (dense[r][c] != 0.0) t.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), dense[r][c]});
    }
  }
  return DocTermMatrix(dense.size(), cols, std::move(t));
}

double DocTermMatrix::at(std::size_t row, std::size_t col) const {
  auto idx = row_indices(row);
  auto it = std::lower_bound(idx.begin(), idx.end(), col);
  if (it == idx.end() || *it != col) return 0.0;
  return row_values(row)[static_cast<std::size_t>(it - idx.begin())];
}

std::vector<double> DocTermMatrix::row_sums() const {
  std::vector<double> s(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (double v : row_values(r)) s[r] += v;
  }
  return s;
}

std::vector<double> DocTermMatrix::col_sums() const {
  std::vector<double> s(cols_, 0.0);
  for (std::size_t i = 0; i < values_.size(); ++i) s[col_idx_[i]] += values_[i];
  return s;
}

double DocTermMatrix::total() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

std::vector<DocTermMatrix::Triplet> DocTermMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    auto idx = row_indices(r);
    auto val = row_values(r);
    for (std::size_t i = 0; i < idx.size(); ++i) t.push_back({static_cast<std::uint32_t>(r), idx[i], val[i]});
  }
  return t;
}

DocTermMatrix DocTermMatrix::transposed() const {
  auto t = triplets();
  for (auto& e : t) std::swap(e.row, e.col);
  return DocTermMatrix(cols_, rows_, std::move(t));
}

DocTermMatrix DocTermMatrix::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
  DocTermMatrix out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

DocTermMatrix build_matrix(const TokenizedCorpus& docs, const Vocabulary& vocabulary) {
  std::vector<DocTermMatrix::Triplet> t;
  for (std::size_t r = 0; r < docs.size(); ++r) {
    for (const auto& token : docs[r]) {
      auto col = vocabulary.find(token);
      if (col >= 0) t.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(col), 1.0});
    }
  }
  return DocTermMatrix(docs.size(), vocabulary.size(), std::move(t));
}

DocTermMatrix build_matrix(const Corpus& corpus, const Vocabulary& vocabulary, const TokenPipelineConfig& config) {
  return build_matrix(tokenize_corpus(corpus, config), vocabulary);
}

void write_matrix(const std::filesystem::path& path, const DocTermMatrix& matrix) {
  csv::Table table{{"row", "col", "count"}, {}};
  table.rows.reserve(matrix.nonzeros());
  for (const auto& t : matrix.triplets()) {
    char buf[32];
    if (t.value == std::floor(t.value) && t.value < 1e15) {
      std::snprintf(buf, sizeof buf, "%.0f", t.value);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", t.value);
    }
    table.rows.push_back({std::to_string(t.row), std::to_string(t.col), buf});
  }
  csv::write_file(path, table);
}

DocTermMatrix read_matrix(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  auto table = csv::read_file(path);
  auto rc = table.column("row");
  auto cc = table.column("col");
  auto vc = table.column("count");
  std::vector<DocTermMatrix::Triplet> t;
  t.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    t.push_back({static_cast<std::uint32_t>(std::stoul(row[rc])), static_cast<std::uint32_t>(std::stoul(row[cc])),
                 std::stod(row[vc])});
  }
  return DocTermMatrix(rows, cols, std::move(t));
}

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocabulary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (const auto& w : vocabulary.words()) out << w << '\n';
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.push_back(line);
  }
  return words;
}

}  // namespace branchscope
