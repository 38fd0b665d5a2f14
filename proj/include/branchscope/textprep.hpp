#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "branchscope/ingest.hpp"

namespace branchscope {

enum class Stemmer {
  None,
  Porter,
};

struct TokenPipelineConfig {
  std::unordered_set<std::string> stopwords;
  Stemmer stemmer = Stemmer::Porter;
  std::size_t min_token_len = 2;
  bool fold_case = true;

  // Bundled English stopword list, Porter stemming, min length 2.
  static TokenPipelineConfig standard();
};

const std::vector<std::string>& english_stopwords();
// One word per line; blank lines and '#' comments ignored.
std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path);

// Splits on every character that is not an ASCII letter or digit (bytes of
// multi-byte UTF-8 sequences count as word characters). Pure-number tokens are
// dropped, then case folding, stopword removal, stemming and the length filter
// are applied in that order.
std::vector<std::string> tokenize(std::string_view text, const TokenPipelineConfig& config);

// Title and abstract joined by one space.
std::string document_text(const Record& record);

using TokenizedCorpus = std::vector<std::vector<std::string>>;
TokenizedCorpus tokenize_corpus(const Corpus& corpus, const TokenPipelineConfig& config);

enum class FrequencyMode {
  Document,  // number of documents containing the word
  Token,     // total occurrences of the word
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, std::vector<std::size_t> doc_freq, double threshold);

  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::size_t>& doc_freq() const noexcept { return doc_freq_; }
  double threshold() const noexcept { return threshold_; }
  std::size_t size() const noexcept { return words_.size(); }

  // Column of a word, or -1.
  std::int64_t find(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::size_t> doc_freq_;
  double threshold_ = 0.0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// A word is kept iff its frequency is strictly greater than threshold times the
// number of documents (Document mode) or the number of tokens (Token mode).
// Throws DataError when nothing survives.
Vocabulary build_vocabulary(const TokenizedCorpus& docs, double threshold = 0.0001,
                            FrequencyMode mode = FrequencyMode::Document);
Vocabulary build_vocabulary(const Corpus& corpus, const TokenPipelineConfig& config, double threshold = 0.0001,
                            FrequencyMode mode = FrequencyMode::Document);

/// Sparse nonnegative matrix in compressed row form.
///
/// Rows are documents in corpus order and columns are vocabulary words. Entries
/// are stored as doubles so that the co-clustering code can operate on rescaled
/// matrices as well as raw counts.
class DocTermMatrix {
 public:
  struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
  };

  DocTermMatrix() = default;
  // Duplicate coordinates are summed; zero entries dropped. Negative values throw.
  DocTermMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static DocTermMatrix from_dense(const std::vector<std::vector<double>>& dense);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::uint32_t> row_indices(std::size_t row) const {
    return {col_idx_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }
  std::span<const double> row_values(std::size_t row) const {
    return {values_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }

  double at(std::size_t row, std::size_t col) const;
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  double total() const;

  DocTermMatrix transposed() const;
  DocTermMatrix scaled(double factor) const;
  std::vector<Triplet> triplets() const;

  bool operator==(const DocTermMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

DocTermMatrix build_matrix(const TokenizedCorpus& docs, const Vocabulary& vocabulary);
DocTermMatrix build_matrix(const Corpus& corpus, const Vocabulary& vocabulary, const TokenPipelineConfig& config);

// `row,col,count` triplets with a header row. The row count is taken from
// `rows`, since trailing all-zero rows leave no triplets.
void write_matrix(const std::filesystem::path& path, const DocTermMatrix& matrix);
DocTermMatrix read_matrix(const std::filesystem::path& path, std::size_t rows, std::size_t cols);

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocabulary);
std::vector<std::string> read_word_list(const std::filesystem::path& path);

}  // namespace branchscope
