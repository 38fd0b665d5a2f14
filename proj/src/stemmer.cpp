#include "branchscope/stemmer.hpp"

#include <array>
#include <utility>

namespace branchscope {

namespace {

class Word {
 public:
  explicit Word(std::string_view w) : b_(w) {}

  std::string take() && { return std::move(b_); }
  std::size_t size() const { return b_.size(); }

  bool ends_with(std::string_view s) const { return std::string_view(b_).ends_with(s); }

  // Measure of the stem b_[0, len): number of VC sequences.
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(i)) ++i;
    while (i < len) {
      while (i < len && !consonant(i)) ++i;
      if (i >= len) break;
      ++m;
      while (i < len && consonant(i)) ++i;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i) {
      if (!consonant(i)) return true;
    }
    return false;
  }

  // *d: stem of length len ends with a double consonant.
  bool double_consonant(std::size_t len) const {
    return len >= 2 && b_[len - 1] == b_[len - 2] && consonant(len - 1);
  }

  // *o: stem ends cvc and the final c is not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) return false;
    char c = b_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  void replace_suffix(std::size_t suffix_len, std::string_view with) {
    b_.resize(b_.size() - suffix_len);
    b_.append(with);
  }

  char back() const { return b_.back(); }
  void pop_back() { b_.pop_back(); }

 private:
  bool consonant(std::size_t i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 || !consonant(i - 1);
      default: return true;
    }
  }

  std::string b_;
};

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// Applies the first (longest-listed) matching rule when the remaining stem has
// measure > min_measure. Returns true when a suffix matched, whether or not it
// was replaced.
template <std::size_t N>
bool apply_rules(Word& w, const std::array<Rule, N>& rules, int min_measure) {
  for (const auto& rule : rules) {
    if (!w.ends_with(rule.suffix)) continue;
    std::size_t stem = w.size() - rule.suffix.size();
    if (w.measure(stem) > min_measure) w.replace_suffix(rule.suffix.size(), rule.replacement);
    return true;
  }
  return false;
}

void step1a(Word& w) {
  if (w.ends_with("sses")) w.replace_suffix(4, "ss");
  else if (w.ends_with("ies")) w.replace_suffix(3, "i");
  else if (w.ends_with("ss")) return;
  else if (w.ends_with("s")) w.replace_suffix(1, "");
}

void step1b(Word& w) {
  if (w.ends_with("eed")) {
    if (w.measure(w.size() - 3) > 0) w.replace_suffix(3, "ee");
    return;
  }
  std::size_t cut = 0;
  if (w.ends_with("ed") && w.has_vowel(w.size() - 2)) cut = 2;
  else if (w.ends_with("ing") && w.has_vowel(w.size() - 3)) cut = 3;
  if (!cut) return;
  w.replace_suffix(cut, "");
  if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
    w.replace_suffix(0, "e");
  } else if (w.double_consonant(w.size())) {
    char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.pop_back();
  } else if (w.measure(w.size()) == 1 && w.cvc(w.size())) {
    w.replace_suffix(0, "e");
  }
}

void step1c(Word& w) {
  if (w.ends_with("y") && w.has_vowel(w.size() - 1)) w.replace_suffix(1, "i");
}

void step2(Word& w) {
  static constexpr std::array<Rule, 20> rules{{
      {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},    {"anci", "ance"},   {"izer", "ize"},
      {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},    {"eli", "e"},       {"ousli", "ous"},
      {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},     {"alism", "al"},    {"iveness", "ive"},
      {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},     {"iviti", "ive"},   {"biliti", "ble"},
  }};
  // Suffixes are disjoint except for pairs like ational/tional; checking
  // longer first keeps the longest-match rule.
  static const auto ordered = [] {
    auto r = rules;
    std::stable_sort(r.begin(), r.end(), [](const Rule& a, const Rule& b) { return a.suffix.size() > b.suffix.size(); });
    return r;
  }();
  apply_rules(w, ordered, 0);
}

void step3(Word& w) {
  static constexpr std::array<Rule, 7> rules{{
      {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ness", ""}, {"ful", ""},
  }};
  apply_rules(w, rules, 0);
}

void step4(Word& w) {
  static constexpr std::array<Rule, 18> rules{{
      {"ement", ""}, {"ance", ""}, {"ence", ""}, {"able", ""}, {"ible", ""}, {"ment", ""},
      {"ant", ""},   {"ent", ""},  {"ism", ""},  {"ate", ""},  {"iti", ""},  {"ous", ""},
      {"ive", ""},   {"ize", ""},  {"al", ""},   {"er", ""},   {"ic", ""},   {"ou", ""},
  }};
  // "ion" needs its own condition: stem ends in s or t.
  if (w.ends_with("ion") && !w.ends_with("tion") && !w.ends_with("sion")) return;
  if (w.ends_with("ion")) {
    if (w.measure(w.size() - 3) > 1) w.replace_suffix(3, "");
    return;
  }
  apply_rules(w, rules, 1);
}

void step5(Word& w) {
  if (w.ends_with("e")) {
    std::size_t stem = w.size() - 1;
    int m = w.measure(stem);
    if (m > 1 || (m == 1 && !w.cvc(stem))) w.pop_back();
  }
  if (w.ends_with("ll") && w.measure(w.size()) > 1) w.pop_back();
}

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.size() <= 2) return std::string(word);
  Word w(word);
  step1a(w);
  step1b(w);
  step1c(w);
  step2(w);
  step3(w);
  step4(w);
  step5(w);
  return std::move(w).take();
}

}  // namespace branchscope
